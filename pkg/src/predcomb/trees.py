"""Prefix trees of equal-length words and window prediction along their branches."""
from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

from . import budget as _budget
from .errors import AlphabetMismatch, HorizonTooSmall, NodeAbsent, WindowOverflow
from .seqcore import DIGITS, Predictor, TablePredictor, UltWord, Word, _symbols, fmt, infer_n


def _as_tuple(w, n) -> tuple:
    if isinstance(w, Word):
        return w.symbols
    return _symbols(w, n)


@dataclass(frozen=True)
class PrefixTree:
    """The prefix closure of a non-empty set of words of one common length."""

    words: frozenset
    n: int = 2

    def __post_init__(self):
        words = frozenset(_as_tuple(w, self.n) for w in self.words)
        if not words:
            raise ValueError("a prefix tree needs at least one maximal word")
        if len({len(w) for w in words}) != 1:
            raise ValueError("maximal words must share one length")
        object.__setattr__(self, "words", words)

    @classmethod
    def from_json(cls, data, n: int | None = None) -> "PrefixTree":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(frozenset(data), infer_n("".join(data), n))

    def to_json(self) -> list:
        return sorted(fmt(w) for w in self.words)

    @property
    def depth(self) -> int:
        return len(next(iter(self.words)))

    @cached_property
    def _counts(self) -> dict:
        # node -> {length: number of tree nodes of that length extending it}
        nodes = {w[:i] for w in self.words for i in range(len(w) + 1)}
        counts: dict = defaultdict(lambda: defaultdict(int))
        for v in nodes:
            for i in range(len(v) + 1):
                counts[v[:i]][len(v)] += 1
        return {v: dict(c) for v, c in counts.items()}

    @property
    def nodes(self) -> frozenset:
        return frozenset(self._counts)

    def __contains__(self, node) -> bool:
        return tuple(node) in self._counts

    def ext_count(self, node: tuple, length: int) -> int:
        c = self._counts.get(node)
        return 0 if c is None else c.get(length, 0)

    def children(self, node: tuple) -> list:
        return [node + (s,) for s in range(self.n) if node + (s,) in self._counts]

    def sorted_nodes(self) -> list:
        return sorted(self._counts, key=lambda v: (len(v), v))


@dataclass(frozen=True)
class BlockTree:
    """A prefix tree with level marks m_0 < m_1 < ... and exact branching per block.

    Every node at level marks[j] has exactly bounds[j] extensions at level
    marks[j + 1].
    """

    tree: PrefixTree
    marks: tuple
    bounds: tuple

    def __post_init__(self):
        marks, bounds = tuple(self.marks), tuple(self.bounds)
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "bounds", bounds)
        if len(bounds) != len(marks) - 1:
            raise ValueError("need one bound per pair of consecutive marks")
        if any(a >= b for a, b in zip(marks, marks[1:])) or marks[-1] > self.tree.depth:
            raise ValueError("marks must increase and stay within the tree depth")
        for j, bound in enumerate(bounds):
            for v in self.tree.nodes:
                if len(v) == marks[j]:
                    got = self.tree.ext_count(v, marks[j + 1])
                    if got != bound:
                        raise ValueError(f"node {fmt(v)!r} has {got} extensions at level "
                                         f"{marks[j + 1]}, declared {bound}")

    def to_json(self) -> dict:
        return {"words": self.tree.to_json(), "marks": list(self.marks), "bounds": list(self.bounds)}

    @classmethod
    def from_json(cls, data, n: int | None = None) -> "BlockTree":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(PrefixTree.from_json(data["words"], n), tuple(data["marks"]), tuple(data["bounds"]))


def split_block_tree(marks: Sequence[int], bounds: Sequence[int], rng=None) -> BlockTree:
    """Binary block tree whose splitting sits at the start of each block.

    bounds[j] must be a power of two 2**s; the first s levels after
    marks[j] are fully binary, the rest of the block follows one bit per
    node (random when ``rng`` is given, else 0).
    """
    if marks[0] != 0:
        raise ValueError("the first mark must be 0")
    nodes = [()]
    for j, bound in enumerate(bounds):
        s = bound.bit_length() - 1
        if bound != 1 << s or s > marks[j + 1] - marks[j]:
            raise ValueError(f"bound {bound} must be a power of two fitting its block")
        for _ in range(s):
            nodes = [v + (b,) for v in nodes for b in (0, 1)]
        for _ in range(marks[j + 1] - marks[j] - s):
            nodes = [v + ((rng.randrange(2) if rng else 0),) for v in nodes]
    return BlockTree(PrefixTree(frozenset(nodes)), tuple(marks), tuple(bounds))


def window_traces(T: PrefixTree, sigma, k: int) -> set:
    sigma = _as_tuple(sigma, T.n)
    if sigma not in T:
        raise NodeAbsent(fmt(sigma))
    if len(sigma) + k > T.depth:
        raise HorizonTooSmall(f"window of length {k} below depth {len(sigma)} exceeds {T.depth}")
    a = len(sigma)
    return {w[a:a + k] for w in T.words if w[:a] == sigma}


def halving_choice(T: PrefixTree, sigma: tuple, k: int) -> int:
    """Next-symbol guess at a tree node.

    Take the least level i such that sigma has fewer than 2**i tree
    extensions i steps down, then guess the child with the most
    extensions at that same depth (least symbol on ties).
    """
    a = len(sigma)
    top = min(k, T.depth - a)
    level = top
    for i in range(top + 1):
        if T.ext_count(sigma, a + i) < 1 << i:
            level = i
            break
    if level == 0:
        return 0
    sizes = [T.ext_count(sigma + (s,), a + level) for s in range(T.n)]
    return max(range(T.n), key=lambda s: (sizes[s], -s))


def first_overflow(T: PrefixTree, k: int):
    """First node (by length, then lexicographically) with 2**k or more window traces."""
    for v in T.sorted_nodes():
        if len(v) + k > T.depth:
            break
        count = T.ext_count(v, len(v) + k)
        if count >= 1 << k:
            return v, count
    return None


def build_window_predictor(T: PrefixTree, k: int) -> TablePredictor:
    """Predictor hitting every branch of T in every window [a, a+k) of [0, depth).

    Requires fewer than 2**k window traces below every node; off-tree words
    get 0.
    """
    bad = first_overflow(T, k)
    if bad is not None:
        raise WindowOverflow(bad[0], bad[1])
    table = {v: halving_choice(T, v, k) for v in T.nodes if len(v) < T.depth}
    return TablePredictor(T.n, T.depth, table)


def _search_fragment(T: PrefixTree, k: int):
    """Exact search for a tree predictor with no k consecutive misses on any branch.

    Branches below a node are independent once the current miss run is
    fixed, so the exhaustive search memoises on (node, run).
    """
    L = T.depth
    memo: dict = {}

    def solve(node, run):
        key = (node, run)
        if key in memo:
            return memo[key] is not None
        if len(node) == L:
            memo[key] = -1
            return True
        kids = T.children(node)
        for v in range(T.n):
            if all((0 if c[-1] == v else run + 1) < k and solve(c, 0 if c[-1] == v else run + 1)
                   for c in kids):
                memo[key] = v
                return True
        memo[key] = None
        return False

    if not solve((), 0):
        return None
    table: dict = {}
    stack = [((), 0)]
    while stack:
        node, run = stack.pop()
        if len(node) == L:
            continue
        v = memo[(node, run)]
        table[node] = v
        for c in T.children(node):
            stack.append((c, 0 if c[-1] == v else run + 1))
    return TablePredictor(T.n, L, table)


def is_coverable(S: Iterable, k: int, mode: str = "exact", n: int | None = None, budget=None):
    """Can one predictor hit every word of S in every k-window?

    ``mode="exact"`` (binary only) uses the window-trace criterion and
    returns the overflowing node or the halving predictor as witness;
    ``mode="brute"`` searches predictor fragments on the tree for any n.
    """
    words = list(S)
    if n is None:
        if words and isinstance(words[0], Word):
            n = words[0].n
        elif all(isinstance(w, str) for w in words):
            n = infer_n("".join(words))
        else:
            n = max(2, 1 + max(max(w, default=0) for w in words))
    T = PrefixTree(frozenset(words), n)
    if mode == "exact":
        if n != 2:
            raise ValueError("exact coverability is only characterised for binary words")
        bad = first_overflow(T, k)
        if bad is not None:
            return False, bad[0]
        return True, build_window_predictor(T, k)
    if mode == "brute":
        _budget.resolve(budget).check("tree fragment search", len(T.nodes) * k * n)
        found = _search_fragment(T, k)
        return (found is not None), found
    raise ValueError(f"unknown mode {mode!r}")


def window_fragments(n: int, k: int, budget=None):
    """All guess tables on the internal nodes of the full n-ary tree of depth k."""
    internal = list(itertools.chain.from_iterable(
        itertools.product(range(n), repeat=d) for d in range(k)))
    _budget.resolve(budget).check("window fragments", n ** len(internal))
    for values in itertools.product(range(n), repeat=len(internal)):
        yield dict(zip(internal, values))


def fragment_hits(fragment: dict, n: int, k: int) -> set:
    """Traces of length k that receive at least one hit from the fragment."""
    return {t for t in itertools.product(range(n), repeat=k)
            if any(fragment[t[:i]] == t[i] for i in range(k))}


def max_coverable_size(n: int, k: int, budget=None) -> int:
    """Largest trace set inside one window [0, k) that a single predictor hits entirely."""
    return max(len(fragment_hits(f, n, k)) for f in window_fragments(n, k, budget))


def evade_in_window(pi: Predictor, sigma, k: int) -> tuple:
    """The continuation of sigma that pi misses at each of the next k positions."""
    if pi.n != 2:
        raise AlphabetMismatch("window evasion is binary")
    w = _as_tuple(sigma, 2)
    tau: tuple = ()
    for _ in range(k):
        tau += (1 - pi(w + tau),)
    return tau


@dataclass(frozen=True, eq=False)
class BlockMap:
    """A map from words of length divisible by k to words of length k."""

    k: int
    fn: Callable[[tuple], tuple]
    name: str = "block-map"

    def __call__(self, sigma) -> tuple:
        sigma = _as_tuple(sigma, 2)
        if len(sigma) % self.k:
            raise ValueError(f"|sigma| = {len(sigma)} is not a multiple of {self.k}")
        return tuple(self.fn(sigma))

    @classmethod
    def constant(cls, tau, k: int | None = None) -> "BlockMap":
        tau = _as_tuple(tau, 2)
        return cls(k or len(tau), lambda _s: tau, f"const {fmt(tau)}")

    def __repr__(self):
        return f"BlockMap({self.name!r}, k={self.k})"


def phi_from_predictor(pi: Predictor, k: int) -> BlockMap:
    if pi.n != 2:
        raise AlphabetMismatch("window evasion is binary")
    return BlockMap(k, lambda s: evade_in_window(pi, s, k), f"phi[{getattr(pi, 'name', pi.kind)}]")


def block_matches(psi: BlockMap, g, k: int, H: int) -> list:
    """Blocks i with (i+1)k <= H where psi guesses g's next block exactly."""
    gs = g.prefix(H) if isinstance(g, UltWord) else tuple(g)[:H]
    return [i for i in range(H // k) if psi(gs[:i * k]) == gs[i * k:(i + 1) * k]]


@dataclass(frozen=True)
class StarReport:
    ok: bool
    threshold: int
    entries: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "threshold": self.threshold, "entries": list(self.entries)}


def check_star(F: Sequence[UltWord], Psi: Sequence[BlockMap], k: int, H: int, t: int) -> StarReport:
    """For each block map, find a word of F that it guesses on at least t blocks."""
    if t * k > H:
        raise HorizonTooSmall(f"{t} blocks of length {k} do not fit in {H}")
    for g in F:
        if g.n != 2:
            raise AlphabetMismatch("the star property is binary")
    entries = []
    for s, psi in enumerate(Psi):
        best_count, best_word = -1, None
        for idx, g in enumerate(F):
            count = len(block_matches(psi, g, k, H))
            if count > best_count:
                best_count, best_word = count, idx
            if count >= t:
                break
        ok = best_count >= t
        entries.append({"psi": s, "name": psi.name, "ok": ok,
                        "word": best_word if ok else None, "matches": max(best_count, 0)})
    return StarReport(all(e["ok"] for e in entries), t, tuple(entries))
