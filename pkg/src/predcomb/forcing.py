"""Finite conditions approximating a binary predictor that k-constantly predicts a set of reals.

A condition ``(ell, sigma, F)`` fixes the predictor on every binary word of
length <= ell and promises that, in any extension, each ``f`` in ``F`` is
hit in every length-k window strictly after position ell.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import budget as _budget
from .errors import (BucketMismatch, InvalidCondition, LinkednessViolated,
                     NoCommonExtension, VerificationFailed, WindowOverflow)
from .seqcore import UltWord, _symbols, all_words, fmt
from .trees import BlockMap, PrefixTree, build_window_predictor


def binary_words(max_len: int) -> list:
    """Binary words of length <= max_len in canonical (length, lexicographic) order."""
    return list(all_words(2, max_len))


def sigma_from_bits(ell: int, bits) -> dict:
    words = binary_words(ell)
    bits = [int(b) for b in bits]
    if len(bits) != len(words):
        raise ValueError(f"need {len(words)} bits for ell={ell}, got {len(bits)}")
    return dict(zip(words, bits))


@dataclass(frozen=True, eq=False)
class PkCondition:
    k: int
    ell: int
    sigma: Mapping
    F: tuple = ()

    def __post_init__(self):
        sigma = {(_symbols(w, 2) if isinstance(w, str) else tuple(w)): int(v)
                 for w, v in self.sigma.items()}
        F = tuple(UltWord.parse(f, 2) if isinstance(f, str) else f for f in self.F)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "F", F)

    def __repr__(self):
        return (f"PkCondition(k={self.k}, ell={self.ell}, |sigma|={len(self.sigma)}, "
                f"F=[{', '.join(map(str, self.F))}])")

    def to_json(self) -> dict:
        return {"k": self.k, "ell": self.ell,
                "sigma": {fmt(w): v for w, v in sorted(self.sigma.items(), key=lambda t: (len(t[0]), t[0]))},
                "F": [str(f) for f in self.F]}

    @classmethod
    def from_json(cls, data) -> "PkCondition":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data["k"]), int(data["ell"]), dict(data["sigma"]), tuple(data["F"]))


@dataclass(frozen=True)
class Validation:
    ok: bool
    violations: tuple = ()

    def __bool__(self):
        return self.ok


def validate_condition(p: PkCondition) -> Validation:
    """Check the domain, separation and agreement clauses; never raises."""
    out = []
    expected = set(binary_words(p.ell)) if p.ell >= 0 else set()
    keys = set(p.sigma)
    missing, extra = expected - keys, keys - expected
    bad_values = sorted(w for w, v in p.sigma.items() if v not in (0, 1))
    if p.ell < 0 or missing or extra or bad_values:
        out.append({"clause": "domain", "missing": sorted(fmt(w) for w in missing)[:8],
                    "extra": sorted(fmt(w) for w in extra)[:8],
                    "bad_values": [fmt(w) for w in bad_values[:8]]})
    for i, f in enumerate(p.F):
        if f.n != 2:
            out.append({"clause": "alphabet", "witness": i})
    if p.ell >= 0:
        seen: dict = {}
        for i, f in enumerate(p.F):
            head = f.prefix(p.ell)
            if head in seen:
                out.append({"clause": "separation", "witness": [seen[head], i]})
            else:
                seen[head] = i
        for i, f in enumerate(p.F):
            if p.sigma.get(f.prefix(p.ell)) != f[p.ell]:
                out.append({"clause": "agreement", "witness": i})
    return Validation(not out, tuple(out))


def window_miss(tau: Mapping, f: UltWord, k: int, start: int, stop: int):
    """Least a in [start, stop - k] with tau missing f on all of [a, a+k), else None."""
    run = 0
    fs = f.prefix(stop)
    for i in range(start, stop):
        if tau.get(fs[:i]) == fs[i]:
            run = 0
        else:
            run += 1
            if run == k:
                return i - k + 1
    return None


def extends(q: PkCondition, p: PkCondition):
    """Whether q <= p; returns ``(verdict, first violation or None)``."""
    for name, c in (("q", q), ("p", p)):
        v = validate_condition(c)
        if not v:
            raise InvalidCondition(f"{name} is not a condition: {v.violations[0]}")
    if q.k != p.k:
        raise InvalidCondition(f"conditions of different posets (k={q.k} vs k={p.k})")
    if q.ell < p.ell:
        return False, {"clause": "length", "witness": [q.ell, p.ell]}
    for w, v in p.sigma.items():
        if q.sigma.get(w) != v:
            return False, {"clause": "table", "witness": fmt(w)}
    for f in p.F:
        if f not in q.F:
            return False, {"clause": "subset", "witness": str(f)}
    for f in p.F:
        a = window_miss(q.sigma, f, p.k, p.ell + 1, q.ell)
        if a is not None:
            return False, {"clause": "window", "witness": [str(f), a]}
    return True, None


@dataclass(frozen=True)
class BucketKey:
    ell: int
    sigma: str

    def __str__(self):
        return f"{self.ell}:{self.sigma}"


def bucket_key(p: PkCondition) -> BucketKey:
    bits = "".join(str(p.sigma[w]) for w in binary_words(p.ell))
    return BucketKey(p.ell, bits)


def _dedupe(words: Sequence[UltWord]) -> list:
    out: list = []
    for w in words:
        if w not in out:
            out.append(w)
    return out


def separation_level(G: Sequence[UltWord], start: int) -> int:
    """Least m >= start at which the words of G have pairwise distinct prefixes."""
    m = start
    while len({g.prefix(m) for g in G}) < len(G):
        m += 1
    return m


def common_extension(ps: Sequence[PkCondition], budget=None) -> PkCondition:
    """A condition below every member of a same-bucket list.

    Each level-ell node carries at most one branch per input condition, so
    with at most 2**k - 1 inputs every window below it has fewer than 2**k
    traces and the tree halving predictor fills the new levels.
    """
    if not ps:
        raise ValueError("need at least one condition")
    k = ps[0].k
    key = bucket_key(ps[0]) if validate_condition(ps[0]) else None
    for p in ps:
        v = validate_condition(p)
        if not v:
            raise InvalidCondition(f"input is not a condition: {v.violations[0]}")
        if p.k != k or bucket_key(p) != key:
            raise BucketMismatch(f"{bucket_key(p)} differs from {key}")
    ell, sigma = ps[0].ell, ps[0].sigma
    G = _dedupe([f for p in ps for f in p.F])
    m = separation_level(G, ell + 1)
    _budget.resolve(budget).check("extension table", (1 << (m + 1)) - 1)

    tau = dict(sigma)
    for w in all_words(2, m, ell + 1):
        tau[w] = 0
    if m > ell:
        by_node: dict = {}
        for g in G:
            by_node.setdefault(g.prefix(ell), []).append(g)
        for node, branches in by_node.items():
            tree = PrefixTree(frozenset(g.prefix(m) for g in branches))
            try:
                pred = build_window_predictor(tree, k)
            except WindowOverflow as exc:
                raise NoCommonExtension(
                    f"{len(branches)} branches through {fmt(node)!r} fill a window") from exc
            for w, v in pred.table.items():
                if len(w) > ell:
                    tau[w] = v
        for g in G:
            tau[g.prefix(m)] = g[m]
    q = PkCondition(k, m, tau, tuple(G))
    if not validate_condition(q):
        raise VerificationFailed(f"constructed extension is invalid: {validate_condition(q).violations}")
    for p in ps:
        ok, why = extends(q, p)
        if not ok:
            raise VerificationFailed(f"constructed condition does not extend {p!r}: {why}")
    return q


@dataclass(frozen=True)
class Certificate:
    """Every guess table on a full window misses one of the listed patterns entirely."""

    claim: str
    k: int
    node: tuple
    entries: tuple  # (fragment bits, missed pattern) pairs

    def to_dict(self) -> dict:
        return {"claim": self.claim, "k": self.k, "node": fmt(self.node),
                "size": len(self.entries),
                "entries": [[frag, missed] for frag, missed in self.entries]}


def window_certificate(k: int, node: tuple = (), budget=None) -> Certificate:
    """Enumerate all binary guess tables on the 2**k - 1 internal window nodes."""
    internal = binary_words(k - 1)
    _budget.resolve(budget).check("window fragments", 1 << len(internal))
    entries = []
    for bits in itertools.product((0, 1), repeat=len(internal)):
        frag = dict(zip(internal, bits))
        missed: tuple = ()
        for _ in range(k):
            missed += (1 - frag[missed],)
        entries.append(("".join(map(str, bits)), fmt(missed)))
    return Certificate("every window fragment misses some pattern", k, node, tuple(entries))


def sharpness_witness(k: int, ell: int = 0, budget=None):
    """2**k same-bucket conditions with no common extension, plus the certificate.

    All words share the prefix 0^(ell+1) and then realise every k-bit
    pattern on [ell+1, ell+1+k), continuing with zeros.
    """
    sigma = {w: 0 for w in binary_words(ell)}
    stem = (0,) * (ell + 1)
    conditions = [PkCondition(k, ell, sigma, (UltWord(stem + pat, (0,)),))
                  for pat in itertools.product((0, 1), repeat=k)]
    return conditions, window_certificate(k, stem, budget)


@dataclass(frozen=True)
class ExclusionMap:
    """Per cell, the block values some member condition forces a name to avoid."""

    k: int
    cells: tuple = field(default_factory=tuple)


def _least_free(excluded, k):
    for tau in itertools.product((0, 1), repeat=k):
        if tau not in excluded:
            return tau
    return None


def extract_guessers(em: ExclusionMap) -> list:
    """One block map per cell, guessing the least value the cell does not exclude."""
    k = em.k
    for c, cell in enumerate(em.cells):
        for sigma, excluded in cell.items():
            if _least_free(excluded, k) is None:
                raise LinkednessViolated(c, sigma)
    maps = []
    for c, cell in enumerate(em.cells):
        def guess(sigma, cell=cell, c=c):
            tau = _least_free(cell.get(sigma, frozenset()), k)
            if tau is None:
                raise LinkednessViolated(c, sigma)
            return tau
        maps.append(BlockMap(k, guess, f"guesser[{c}]"))
    return maps


def forced_avoidance(p: PkCondition, sigma: tuple) -> frozenset:
    """Values p forces the generic evasion map at sigma to avoid.

    Sound but not complete: uses the part of the evasion pattern decided by
    p's table and the window obligations of p's words beyond ell.
    """
    k, a = p.k, len(sigma)
    decided = max(0, min(k, p.ell - a + 1))
    c: tuple = ()
    for r in range(decided):
        c += (1 - p.sigma[sigma + c],)
    out = {tau for tau in itertools.product((0, 1), repeat=k) if tau[:decided] != c}
    if a >= p.ell + 1:
        for f in p.F:
            if f.prefix(a) == sigma:
                out.add(f.segment(a, a + k))
    return frozenset(out)


def exclusion_map_from_conditions(cells: Sequence[Sequence[PkCondition]], k: int,
                                  blocks: int) -> ExclusionMap:
    """Exclusions over all block-aligned words of up to ``blocks`` blocks."""
    out = []
    for cell in cells:
        table = {}
        for i in range(blocks + 1):
            for sigma in itertools.product((0, 1), repeat=i * k):
                excluded = frozenset().union(*(forced_avoidance(p, sigma) for p in cell))
                if excluded:
                    table[sigma] = excluded
        out.append(table)
    return ExclusionMap(k, tuple(out))
