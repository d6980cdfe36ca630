"""Brute-force ground truth for the counting claims used elsewhere.

Functions here avoid the shortcuts taken by the constructions they check:
predictor tables are enumerated outright, hit sets are recomputed from the
definition, and A-sets are rebuilt by ranging over the whole G-space.
"""
from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from typing import Iterator

from . import budget as _budget
from .budget import EnumBudget
from .encoding import (AllEqualFamily, BinPredictorFamily, GFamily, HashFamily,
                       NoisyLevelFamily, ResolverFamily, TargetSetFamily,
                       encode_word, g_space_size, level_k_blocks)
from .forcing import Certificate, PkCondition, bucket_key, validate_condition
from .seqcore import TablePredictor, UltWord, all_words, fmt
from .trees import PrefixTree, build_window_predictor, is_coverable

__all__ = [
    "EnumBudget", "enum_predictors", "predictor_count", "exhaustive_cover_number",
    "brute_cover_number", "cover_bounds", "verify_a_set_bound", "a_set_bruteforce",
    "weak_hypothesis_bruteforce", "no_full_window_predictor", "verify_certificate",
    "verify_halving_all_trees", "all_trees", "random_family", "random_ultword",
    "random_bucket_conditions", "evasion_uniqueness",
]


def predictor_count(n: int, depth: int) -> int:
    entries = sum(n ** d for d in range(depth))
    return n ** entries


def enum_predictors(n: int, depth: int, budget=None) -> Iterator[TablePredictor]:
    """Every table predictor on words of length < depth, lexicographic by table."""
    _budget.resolve(budget).check(f"predictors (n={n}, depth={depth})", predictor_count(n, depth))
    words = list(all_words(n, depth - 1))
    for vals in itertools.product(range(n), repeat=len(words)):
        yield TablePredictor(n, depth, dict(zip(words, vals)))


# -- cover numbers -------------------------------------------------------------

def exhaustive_cover_number(n: int, L: int, k: int, budget=None) -> int:
    """Least number of predictors hitting every word of n^L in every k-window.

    Branch and bound over partitions of n^L into single-predictor coverable
    groups; coverability comes from the tree module.
    """
    if k > L:
        return 1
    words = list(itertools.product(range(n), repeat=L))
    _budget.resolve(budget).check("cover partition search", len(words))
    mode = "exact" if n == 2 else "brute"
    cache: dict = {}

    def coverable(group):
        key = frozenset(group)
        if key not in cache:
            cache[key] = is_coverable(key, k, mode=mode, n=n)[0]
        return cache[key]

    best = [len(words)]

    def assign(i, groups):
        if len(groups) >= best[0]:
            return
        if i == len(words):
            best[0] = len(groups)
            return
        w = words[i]
        for g in groups:
            g.append(w)
            if coverable(g):
                assign(i + 1, groups)
            g.pop()
        groups.append([w])
        assign(i + 1, groups)
        groups.pop()

    assign(0, [])
    return best[0]


def _covered_mask(table: dict, words: list, k: int) -> int:
    mask = 0
    for idx, w in enumerate(words):
        run = 0
        for i, s in enumerate(w):
            run = 0 if table[w[:i]] == s else run + 1
            if run >= k:
                break
        else:
            mask |= 1 << idx
    return mask


def _covered_sets(n: int, L: int, k: int, budget=None) -> list:
    words = list(itertools.product(range(n), repeat=L))
    internal = list(all_words(n, L - 1))
    _budget.resolve(budget).check("predictor tables", n ** len(internal))
    masks = {_covered_mask(dict(zip(internal, vals)), words, k)
             for vals in itertools.product(range(n), repeat=len(internal))}
    return sorted(masks)


def brute_cover_number(n: int, L: int, k: int, budget=None) -> int:
    """Cover number by enumerating every predictor table and searching unions."""
    if k > L:
        return 1
    full = (1 << n ** L) - 1
    masks = _covered_sets(n, L, k, budget)
    maximal = [a for a in masks if not any(a != b and a | b == b for b in masks)]
    layer, seen, r = {0}, {0}, 0
    while full not in layer:
        r += 1
        layer = {s | a for s in layer for a in maximal} - seen
        seen |= layer
    return r


def cover_bounds(n: int, L: int, k: int, budget=None):
    """(counting lower bound, greedy upper bound) for the cover number."""
    if k > L:
        return 1, 1
    masks = _covered_sets(n, L, k, budget)
    total = n ** L
    biggest = max(bin(m).count("1") for m in masks)
    lower = math.ceil(total / biggest)
    full = (1 << total) - 1
    got, upper = 0, 0
    while got != full:
        got |= max(masks, key=lambda m: bin(m & ~got).count("1"))
        upper += 1
    return lower, upper


# -- A-sets ---------------------------------------------------------------------

def a_set_bruteforce(sigma: tuple, fam: BinPredictorFamily, budget=None) -> frozenset:
    """Level-k blocks after sigma, straight from the definition over all of G."""
    n, k = fam.n, fam.k
    m, j = divmod(len(sigma), k)
    size = g_space_size(n, k)
    _budget.resolve(budget).check("G-space", size)
    out = set(itertools.product(range(n), repeat=k))
    for gi in range(size):
        g = GFamily.from_index(n, k, gi)
        pi = fam.predictor(gi, j)
        for b in list(out):
            enc = encode_word(sigma + b, g, j, (m + 1) * k).symbols
            if not any(pi(enc[:m * k + i]) == enc[m * k + i] for i in range(k)):
                out.discard(b)
    return frozenset(out)


def weak_hypothesis_bruteforce(y, fam: BinPredictorFamily, m0: int, H: int, budget=None):
    """First (g-index, j, block) where pi^(g,j) misses a whole block of y's encoding."""
    n, k = fam.n, fam.k
    size = g_space_size(n, k)
    _budget.resolve(budget).check("G-space", size)
    for gi in range(size):
        g = GFamily.from_index(n, k, gi)
        for j in range(k):
            last = (H - j - k) // k - 1
            if last < m0:
                continue
            enc = encode_word(y, g, j, (last + 1) * k).symbols
            pi = fam.predictor(gi, j)
            for m in range(m0, last + 1):
                if not any(pi(enc[:m * k + i]) == enc[m * k + i] for i in range(k)):
                    return gi, j, m
    return None


def random_ultword(n: int, rng: random.Random, max_pre: int = 5, max_per: int = 6) -> UltWord:
    pre = tuple(rng.randrange(n) for _ in range(rng.randint(0, max_pre)))
    per = tuple(rng.randrange(n) for _ in range(rng.randint(1, max_per)))
    return UltWord(pre, per, n)


def random_family(n: int, k: int, rng: random.Random, depth: int = 6) -> BinPredictorFamily:
    """Draw from a mix of family kinds, including the extremal target-set kind."""
    blocks = list(itertools.product(range(n), repeat=k))
    kinds = ["all-equal", "hash", "target", "noisy-level"]
    if g_space_size(n, k) <= 4096:
        kinds.append("opaque")
    kind = rng.choice(kinds)
    if kind == "all-equal":
        return AllEqualFamily(TablePredictor.random(2, depth + k + 1, rng), n, k)
    if kind == "hash":
        return HashFamily(n, k, rng.getrandbits(32), rng.sample(blocks, rng.randint(0, 2)))
    if kind == "target":
        size = rng.randint(1, min(len(blocks), 1 << k))
        return TargetSetFamily(n, k, rng.sample(blocks, size))
    if kind == "noisy-level":
        return NoisyLevelFamily(random_ultword(n, rng), k, rng.getrandbits(32),
                                rng.sample(blocks, rng.randint(0, 1)))
    inner = HashFamily(n, k, rng.getrandbits(32), rng.sample(blocks, 1))
    return ResolverFamily(n, k, inner.predictor)


def verify_a_set_bound(n: int, k: int, depth: int, mode: str = "trials", trials: int = 1000,
                       seed: int = 0, budget=None) -> dict:
    """Check |A_sigma^k| <= 2**k - 1 and report the largest size seen."""
    sizes: Counter = Counter()
    witnesses: list = []
    families = 0
    prefixes = 0

    def record(fam, sigma):
        # ClaimViolated propagates: a violation stops the run
        nonlocal prefixes, witnesses
        prefixes += 1
        size = len(level_k_blocks(fam, sigma, budget))
        sizes[size] += 1
        top = max(sizes)
        if size == top:
            if witnesses and witnesses[0]["size"] < top:
                witnesses = []
            if len(witnesses) < 5:
                witnesses.append({"sigma": fmt(sigma), "family": repr(fam), "size": size})

    if mode == "exhaustive":
        for pi in enum_predictors(2, depth, budget):
            families += 1
            fam = AllEqualFamily(pi, n, k)
            for sigma in all_words(n, depth):
                record(fam, sigma)
    elif mode == "trials":
        rng = random.Random(seed)
        for _ in range(trials):
            families += 1
            fam = random_family(n, k, rng)
            sigma = tuple(rng.randrange(n) for _ in range(rng.randint(0, depth)))
            record(fam, sigma)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return {
        "claim": "|A_sigma^k| < 2^k",
        "parameters": {"n": n, "k": k, "depth": depth, "trials": trials if mode == "trials" else None},
        "mode": mode,
        "seed": seed if mode == "trials" else None,
        "counts": {"families": families, "prefixes": prefixes, "violations": 0,
                   "sizes": {str(s): c for s, c in sorted(sizes.items())}},
        "max_observed": max(sizes) if sizes else 0,
        "bound": (1 << k) - 1,
        "witnesses": witnesses,
    }


# -- window certificates ----------------------------------------------------------

def no_full_window_predictor(k: int, budget=None) -> dict:
    """Every binary guess table on the depth-k window misses at least one pattern."""
    internal = [w for d in range(k) for w in itertools.product((0, 1), repeat=d)]
    _budget.resolve(budget).check("window fragments", 2 ** len(internal))
    patterns = list(itertools.product((0, 1), repeat=k))
    entries, hit_counts = [], Counter()
    for vals in itertools.product((0, 1), repeat=len(internal)):
        table = dict(zip(internal, vals))
        missed = [p for p in patterns if all(table[p[:i]] != p[i] for i in range(k))]
        hit_counts[len(patterns) - len(missed)] += 1
        entries.append(["".join(map(str, vals)), [fmt(p) for p in missed]])
    return {
        "claim": "no predictor fragment hits all 2^k window patterns",
        "parameters": {"k": k},
        "mode": "exhaustive",
        "seed": None,
        "counts": {"fragments": len(entries), "hits": {str(h): c for h, c in hit_counts.items()}},
        "max_hits": max(hit_counts),
        "ok": all(missed for _, missed in entries),
        "witnesses": entries,
    }


def verify_certificate(cert: Certificate, conditions: list[PkCondition]) -> dict:
    """Re-derive a sharpness certificate without trusting its construction.

    Checks that the conditions are valid and share one bucket, that the
    listed fragments are exactly all guess tables on the window below the
    shared node, and that each one misses some condition's word on the
    whole window.
    """
    k = cert.k
    problems = []
    if len(conditions) != 1 << k:
        problems.append(f"expected {1 << k} conditions, got {len(conditions)}")
    if not all(validate_condition(p) for p in conditions):
        problems.append("some condition is invalid")
    if len({bucket_key(p) for p in conditions}) != 1:
        problems.append("conditions span several buckets")
    a = len(cert.node)
    windows = {f.segment(a, a + k) for p in conditions for f in p.F if f.prefix(a) == cert.node}
    if len(windows) != 1 << k:
        problems.append(f"only {len(windows)} window patterns below the node")
    internal = [w for d in range(k) for w in itertools.product((0, 1), repeat=d)]
    expected = {"".join(map(str, v)) for v in itertools.product((0, 1), repeat=len(internal))}
    listed = [frag for frag, _ in cert.entries]
    if set(listed) != expected or len(listed) != len(expected):
        problems.append("fragment list is not the full enumeration")
    for frag, missed in cert.entries:
        table = dict(zip(internal, (int(c) for c in frag)))
        pat = tuple(int(c) for c in missed)
        if pat not in windows or any(table[pat[:i]] == pat[i] for i in range(k)):
            problems.append(f"fragment {frag} does not miss {missed}")
    return {"ok": not problems, "fragments": len(listed), "problems": problems[:10]}


# -- halving predictor over all trees ------------------------------------------------

def all_trees(L: int) -> Iterator[frozenset]:
    """Every non-empty set of binary words of length L (as leaf sets)."""
    words = list(itertools.product((0, 1), repeat=L))
    for mask in range(1, 1 << len(words)):
        yield frozenset(w for i, w in enumerate(words) if mask >> i & 1)


def verify_halving_all_trees(L: int, k: int) -> dict:
    """Prove the tree halving predictor sound on every binary tree of depth L.

    Trees meeting the window-trace bound are generated bottom-up and grouped
    by their truncation to depth k, which is all the predictor reads at a
    node. For each group we track the miss-run values r for which some
    member has a branch reaching k consecutive misses when entered with a
    run of r. Soundness means no depth-L group is bad at r = 0. The root
    guess of each group is taken from build_window_predictor itself.
    """
    decisions: dict = {}

    def root_guess(trunc):
        if trunc not in decisions:
            decisions[trunc] = build_window_predictor(PrefixTree(trunc), k).table[()]
        return decisions[trunc]

    layer = {frozenset([()]): (1, frozenset())}
    for h in range(1, L + 1):
        d = min(h, k)
        nxt: dict = {}
        options = [(None, (1, frozenset()))] + list(layer.items())
        for (ta, (ca, ua)), (tb, (cb, ub)) in itertools.product(options, repeat=2):
            if ta is None and tb is None:
                continue
            trunc = frozenset(
                [(0,) + x[:d - 1] for x in (ta or ())] + [(1,) + x[:d - 1] for x in (tb or ())])
            if h >= k and len(trunc) >= 1 << k:
                continue
            v = root_guess(trunc)
            bad = set()
            for r in range(k):
                for sym, t, u in ((0, ta, ua), (1, tb, ub)):
                    if t is None:
                        continue
                    r2 = 0 if sym == v else r + 1
                    if r2 >= k or r2 in u:
                        bad.add(r)
            count, prev_bad = nxt.get(trunc, (0, frozenset()))
            nxt[trunc] = (count + ca * cb, prev_bad | bad)
        layer = nxt
    trees = sum(c for c, _ in layer.values())
    failing = [sorted(fmt(x) for x in t) for t, (_, u) in layer.items() if 0 in u]
    return {"L": L, "k": k, "trees": trees, "truncation_classes": len(layer),
            "failing_classes": failing[:5], "ok": not failing}


# -- linked families and evasion ----------------------------------------------------

def random_bucket_conditions(k: int, rng: random.Random, count: int | None = None,
                             max_ell: int = 3, max_words: int = 2) -> list[PkCondition]:
    """Up to 2**k - 1 valid conditions sharing one random bucket."""
    ell = rng.randint(0, max_ell)
    sigma = {w: rng.randrange(2) for w in all_words(2, ell)}
    if count is None:
        count = rng.randint(1, (1 << k) - 1)
    out = []
    for _ in range(count):
        F, heads = [], set()
        for _ in range(rng.randint(0, max_words)):
            head = tuple(rng.randrange(2) for _ in range(ell))
            if head in heads:
                continue
            heads.add(head)
            tail = random_ultword(2, rng, max_pre=4, max_per=4)
            pre = head + (sigma[head],) + tail.pre
            F.append(UltWord(pre, tail.period, 2))
        out.append(PkCondition(k, ell, sigma, tuple(F)))
    return out


def evasion_uniqueness(k: int, depth: int = 4, budget=None) -> dict:
    """For every depth-limited table, exactly one k-block after each aligned word is all-miss.

    Also confirms that block equals evade_in_window's answer.
    """
    from .trees import evade_in_window

    patterns = list(itertools.product((0, 1), repeat=k))
    sigmas = [w for w in all_words(2, max(depth - k, 0)) if len(w) % k == 0]
    tables = failures = 0
    for pi in enum_predictors(2, depth, budget):
        tables += 1
        for s in sigmas:
            misses = [p for p in patterns if all(pi(s + p[:i]) != p[i] for i in range(k))]
            if misses != [evade_in_window(pi, s, k)]:
                failures += 1
    return {"k": k, "depth": depth, "tables": tables, "prefixes": len(sigmas),
            "failures": failures, "ok": failures == 0}
