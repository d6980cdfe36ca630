"""Reduction of n-ary k-constant prediction to binary weak prediction.

A *G-family* ``g = (g_0, ..., g_{k-1})`` sends each length-k block over
``range(n)`` to a k-bit pattern. Encoding a word ``y`` at phase ``j`` writes
``g_i(y[mk+j : (m+1)k+j])`` at binary position ``mk+i``. Given one binary
predictor per (g, j), the A-sets record which k-step continuations of a
prefix are hit by every encoder, and ``psi`` predicts by always steering
toward the larger surviving A-set.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from . import budget as _budget
from .errors import (AlphabetMismatch, ClaimViolated, HorizonTooSmall,
                     HypothesisFails, LevelUndefined, PhaseMismatch)
from .seqcore import (HitReport, Predictor, RulePredictor, TablePredictor,
                      UltWord, Word, all_words, check_constant, values)


def block_index(block, n: int) -> int:
    idx = 0
    for s in block:
        idx = idx * n + s
    return idx


def mix(*parts) -> int:
    """Deterministic 64-bit hash of nested int tuples (splitmix64 finaliser)."""
    z = (hash(parts) + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


@dataclass(frozen=True)
class GFamily:
    """k maps from n-ary length-k blocks to bits, stored as truth tables.

    Table inputs are in lexicographic order of the block.
    """

    n: int
    k: int
    tables: tuple

    def __post_init__(self):
        tables = tuple(tuple(int(b) for b in t) for t in self.tables)
        if len(tables) != self.k:
            raise ValueError(f"need {self.k} component maps, got {len(tables)}")
        size = self.n ** self.k
        for t in tables:
            if len(t) != size or any(b not in (0, 1) for b in t):
                raise ValueError(f"each table must be {size} bits")
        object.__setattr__(self, "tables", tables)

    def value(self, i: int, block) -> int:
        return self.tables[i][block_index(block, self.n)]

    def pattern(self, block) -> tuple:
        idx = block_index(block, self.n)
        return tuple(t[idx] for t in self.tables)

    @property
    def index(self) -> int:
        idx = 0
        for t in self.tables:
            for b in t:
                idx = (idx << 1) | b
        return idx

    @classmethod
    def from_index(cls, n: int, k: int, index: int) -> "GFamily":
        size = n ** k
        total = size * k
        if not 0 <= index < 1 << total:
            raise IndexError(index)
        bits = [(index >> (total - 1 - p)) & 1 for p in range(total)]
        return cls(n, k, tuple(tuple(bits[i * size:(i + 1) * size]) for i in range(k)))

    @classmethod
    def from_patterns(cls, n: int, k: int, assignment: Mapping) -> "GFamily":
        """Family sending each listed block to its pattern and everything else to 0s."""
        size = n ** k
        tables = [[0] * size for _ in range(k)]
        for block, pat in assignment.items():
            idx = block_index(block, n)
            for i in range(k):
                tables[i][idx] = pat[i]
        return cls(n, k, tuple(tuple(t) for t in tables))

    @classmethod
    def projections(cls, n: int, k: int) -> "GFamily":
        """g_i(s) = s(i); only meaningful for binary blocks but defined as s(i) mod 2."""
        blocks = list(itertools.product(range(n), repeat=k))
        return cls(n, k, tuple(tuple(b[i] % 2 for b in blocks) for i in range(k)))

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k,
                "tables": ["".join(map(str, t)) for t in self.tables]}

    @classmethod
    def from_json(cls, data) -> "GFamily":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data["n"]), int(data["k"]), tuple(tuple(int(c) for c in t) for t in data["tables"]))


class GSpace(Sequence):
    """All (2**(n**k))**k G-families, indexed in lexicographic order."""

    def __init__(self, n: int, k: int):
        self.n, self.k = n, k

    def __len__(self):
        return 1 << (self.k * self.n ** self.k)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return [self[i] for i in range(*idx.indices(len(self)))]
        if idx < 0:
            idx += len(self)
        return GFamily.from_index(self.n, self.k, idx)

    def __iter__(self):
        for idx in range(len(self)):
            yield GFamily.from_index(self.n, self.k, idx)


def g_space_size(n: int, k: int) -> int:
    return 1 << (k * n ** k)


def enum_g_families(n: int, k: int, budget=None) -> GSpace:
    if n < 2 or k < 1:
        raise ValueError("need n >= 2 and k >= 1")
    _budget.resolve(budget).check(f"G-space (n={n}, k={k})", g_space_size(n, k))
    return GSpace(n, k)


def _encode_bits(ys: Sequence[int], g: GFamily, j: int, blocks: int) -> tuple:
    k = g.k
    out: list = []
    for m in range(blocks):
        out.extend(g.pattern(ys[m * k + j:(m + 1) * k + j]))
    return tuple(out)


def encode_word(y, g: GFamily, j: int, out_len: int) -> Word:
    """Binary encoding of y at phase j, truncated to out_len bits."""
    if not 0 <= j < g.k:
        raise ValueError(f"phase {j} outside [0, {g.k})")
    if getattr(y, "n", g.n) != g.n:
        raise AlphabetMismatch(f"word over {y.n} symbols, family over {g.n}")
    blocks = -(-out_len // g.k)
    ys = values(y, blocks * g.k + j)
    return Word(_encode_bits(ys, g, j, blocks)[:out_len], 2)


def encode_prefix(sigma, g: GFamily, j: int) -> Word:
    """Encoding of a finite prefix whose length is congruent to j mod k."""
    syms = sigma.symbols if isinstance(sigma, Word) else tuple(sigma)
    if len(syms) % g.k != j:
        raise PhaseMismatch(f"|sigma| = {len(syms)} is not {j} mod {g.k}")
    return Word(_encode_bits(syms, g, j, len(syms) // g.k), 2)


def encode_ult(y: UltWord, g: GFamily, j: int) -> UltWord:
    """The (eventually periodic) infinite encoding of an UltWord."""
    k = g.k
    first_periodic = max(0, -(-(len(y.pre) - j) // k))
    block_period = len(y.period) // math.gcd(len(y.period), k)
    ys = y.prefix((first_periodic + block_period + 1) * k + j)
    pre = _encode_bits(ys, g, j, first_periodic)
    period = _encode_bits(ys, g, j, first_periodic + block_period)[len(pre):]
    return UltWord(pre, period, 2)


# -- predictor families ------------------------------------------------------

class BinPredictorFamily:
    """Binary predictors pi^(g, j) indexed by G-space index and phase.

    Subclasses may declare *locality* so A-set computations need not range
    over the whole G-space:

    ``support(j, m)``
        blocks whose g-values are the only part of g that pi^(g, j) reads
        when answering words of length in [mk, (m+1)k); ``None`` means
        unknown (the whole G-space is searched).
    ``reads_history``
        False when such answers ignore the word before position mk.
    """

    reads_history = True

    def __init__(self, n: int, k: int):
        if n < 2 or k < 1:
            raise ValueError("need n >= 2 and k >= 1")
        self.n, self.k = n, k
        self._level_k: dict = {}

    def predictor(self, g_index: int, j: int) -> Predictor:
        raise NotImplementedError

    def support(self, j: int, m: int):
        return None

    @property
    def g_space(self) -> GSpace:
        return GSpace(self.n, self.k)

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, k={self.k})"


class ResolverFamily(BinPredictorFamily):
    def __init__(self, n, k, resolver: Callable[[int, int], Predictor],
                 support=None, reads_history=True):
        super().__init__(n, k)
        self.resolver = resolver
        self._support = None if support is None else frozenset(support)
        self.reads_history = reads_history

    def predictor(self, g_index, j):
        return self.resolver(g_index, j)

    def support(self, j, m):
        return self._support


class AllEqualFamily(BinPredictorFamily):
    """The same binary predictor at every (g, j)."""

    def __init__(self, pi: Predictor, n: int, k: int):
        if pi.n != 2:
            raise AlphabetMismatch("family members are binary predictors")
        super().__init__(n, k)
        self.pi = pi

    def predictor(self, g_index, j):
        return self.pi

    def support(self, j, m):
        return frozenset()


class LevelTableFamily(BinPredictorFamily):
    """pi^(g, j)(w) = (encoding of y under (g, j)) at position |w|."""

    reads_history = False

    def __init__(self, y: UltWord, k: int):
        super().__init__(y.n, k)
        self.y = y

    def _block(self, j, m):
        k = self.k
        return self.y.segment(m * k + j, (m + 1) * k + j)

    def predictor(self, g_index, j):
        g = GFamily.from_index(self.n, self.k, g_index)
        k = self.k

        def rule(w):
            m, i = divmod(len(w), k)
            return g.value(i, self._block(j, m))
        return RulePredictor(2, rule, f"level-table g#{g_index} j={j}")

    def support(self, j, m):
        return frozenset([self._block(j, m)])


class NoisyLevelFamily(LevelTableFamily):
    """Level-table answer at one pseudo-random offset per block, noise elsewhere.

    The noise reads the in-block bits and g on a few extra blocks, so the
    weak-prediction hypothesis holds at every block while A-sets grow.
    """

    def __init__(self, y: UltWord, k: int, seed: int, extra=()):
        super().__init__(y, k)
        self.seed = seed
        self.extra = frozenset(tuple(b) for b in extra)

    def predictor(self, g_index, j):
        g = GFamily.from_index(self.n, self.k, g_index)
        k, seed = self.k, self.seed

        def rule(w):
            m, i = divmod(len(w), k)
            yb = self._block(j, m)
            if i == mix(seed, j, m) % k:
                return g.value(i, yb)
            seen = tuple(g.pattern(b) for b in sorted(self.extra | {yb}))
            return mix(seed, j, m, i, w[m * k:], seen) & 1
        return RulePredictor(2, rule, f"noisy-level g#{g_index} j={j}")

    def support(self, j, m):
        return self.extra | {self._block(j, m)}


class HashFamily(BinPredictorFamily):
    """Pseudo-random predictors reading the whole word and g on a fixed block set."""

    def __init__(self, n, k, seed: int, blocks=()):
        super().__init__(n, k)
        self.seed = seed
        self.blocks = frozenset(tuple(b) for b in blocks)

    def predictor(self, g_index, j):
        g = GFamily.from_index(self.n, self.k, g_index)
        seen = tuple(g.pattern(b) for b in sorted(self.blocks))
        seed = self.seed
        return RulePredictor(2, lambda w: mix(seed, j, w, seen) & 1, f"hash g#{g_index} j={j}")

    def support(self, j, m):
        return self.blocks


class TargetSetFamily(BinPredictorFamily):
    """In each block, hit every pattern except the least one unused by the targets.

    With at most 2**k - 1 targets every target block survives in each A-set,
    which makes these families extremal for the A-set bound.
    """

    reads_history = False

    def __init__(self, n, k, targets):
        super().__init__(n, k)
        self.targets = frozenset(tuple(b) for b in targets)

    def predictor(self, g_index, j):
        g = GFamily.from_index(self.n, self.k, g_index)
        used = {g.pattern(b) for b in self.targets}
        free = [p for p in itertools.product((0, 1), repeat=self.k) if p not in used]
        avoid = free[0] if free else (0,) * self.k
        k = self.k

        def rule(w):
            i = len(w) % k
            inside = w[len(w) - i:]
            if inside == avoid[:i]:
                return 1 - avoid[i]
            return 0
        return RulePredictor(2, rule, f"target-set g#{g_index} j={j}")

    def support(self, j, m):
        return self.targets


# -- A-sets ------------------------------------------------------------------

@dataclass(frozen=True)
class ASet:
    base: tuple
    level: int
    members: frozenset

    def __len__(self):
        return len(self.members)


def _evade_pattern(pi: Predictor, u: tuple, k: int) -> tuple:
    c: tuple = ()
    for _ in range(k):
        c += (1 - pi(u + c),)
    return c


def _scan_level_k(fam: BinPredictorFamily, sigma: tuple, budget=None):
    """Surviving level-k blocks after sigma, plus a failing g-index per dead block."""
    n, k = fam.n, fam.k
    m, j = divmod(len(sigma), k)
    blocks = list(itertools.product(range(n), repeat=k))
    witnesses: dict = {}
    sup = fam.support(j, m)

    if sup is None:
        size = g_space_size(n, k)
        _budget.resolve(budget).check("G-space scan", size)
        alive = set(blocks)
        for gi in range(size):
            g = GFamily.from_index(n, k, gi)
            c = _evade_pattern(fam.predictor(gi, j), _encode_bits(sigma, g, j, m), k)
            for b in [b for b in alive if g.pattern(b) == c]:
                alive.discard(b)
                witnesses[b] = gi
            if not alive:
                break
        return frozenset(alive), witnesses

    relevant = set(sup)
    if fam.reads_history:
        relevant.update(sigma[t * k + j:(t + 1) * k + j] for t in range(m))
    relevant = sorted(relevant)
    _budget.resolve(budget).check("restricted G-space scan", (1 << k) ** len(relevant))
    alive = set(b for b in blocks if b in relevant)
    patterns = list(itertools.product((0, 1), repeat=k))
    first = True
    for combo in itertools.product(patterns, repeat=len(relevant)):
        assign = dict(zip(relevant, combo))
        g = GFamily.from_patterns(n, k, assign)
        c = _evade_pattern(fam.predictor(g.index, j), _encode_bits(sigma, g, j, m), k)
        if first:
            # g is unconstrained on blocks outside the relevant set.
            for b in blocks:
                if b not in assign:
                    witnesses[b] = GFamily.from_patterns(n, k, {**assign, b: c}).index
            first = False
        for b in [b for b in alive if assign[b] == c]:
            alive.discard(b)
            witnesses[b] = g.index
        if not alive:
            break
    return frozenset(alive), witnesses


def level_k_blocks(fam: BinPredictorFamily, sigma, budget=None) -> frozenset:
    """Blocks b with sigma+b in A_sigma^k (cached per family)."""
    sigma = sigma.symbols if isinstance(sigma, Word) else tuple(sigma)
    hit = fam._level_k.get(sigma)
    if hit is None:
        hit = _scan_level_k(fam, sigma, budget)
        if len(hit[0]) >= 1 << fam.k:
            raise ClaimViolated(sigma, fam, len(hit[0]))
        fam._level_k[sigma] = hit
    return hit[0]


def failing_witness(fam: BinPredictorFamily, sigma, block) -> int | None:
    """G-index of an encoder that misses the whole block after sigma, if any."""
    sigma = tuple(sigma)
    level_k_blocks(fam, sigma)
    return fam._level_k[sigma][1].get(tuple(block))


def a_set(sigma, fam: BinPredictorFamily, level: int) -> ASet:
    sigma = sigma.symbols if isinstance(sigma, Word) else tuple(sigma)
    k = fam.k
    if not 0 <= level <= k:
        raise ValueError(f"level {level} outside [0, {k}]")
    base_len = len(sigma) - k + level
    if base_len < 0:
        raise LevelUndefined(f"A^{level} needs |sigma| >= {k - level}, got {len(sigma)}")
    base = sigma[:base_len]
    tail = sigma[base_len:]
    members = frozenset(base + b for b in level_k_blocks(fam, base)
                        if b[:len(tail)] == tail)
    return ASet(sigma, level, members)


@dataclass(frozen=True)
class PsiDecision:
    symbol: int
    level: int
    level_size: int
    child_sizes: tuple


def psi_decision(fam: BinPredictorFamily, sigma) -> PsiDecision:
    """The halving choice at sigma, with the sizes that justify it."""
    sigma = sigma.symbols if isinstance(sigma, Word) else tuple(sigma)
    n, k = fam.n, fam.k
    L = len(sigma)
    for level in range(max(0, k - L), k + 1):
        base_len = L - k + level
        tail = sigma[base_len:]
        current = [b for b in level_k_blocks(fam, sigma[:base_len]) if b[:len(tail)] == tail]
        if len(current) < 1 << level:
            break
    if level == 0:
        return PsiDecision(0, 0, len(current), ())
    pos = k - level
    sizes = tuple(sum(1 for b in current if b[pos] == s) for s in range(n))
    best = max(range(n), key=lambda s: (sizes[s], -s))
    return PsiDecision(best, level, len(current), sizes)


def psi(fam: BinPredictorFamily) -> RulePredictor:
    """The n-ary predictor built from a binary family by the halving rule."""
    return RulePredictor(fam.n, lambda w: psi_decision(fam, w).symbol, f"psi[{fam!r}]")


def psi_table(fam: BinPredictorFamily, depth: int) -> TablePredictor:
    table = {w: psi_decision(fam, w).symbol for w in all_words(fam.n, depth - 1)}
    return TablePredictor(fam.n, depth, table)


def hypothesis_violation(y, fam: BinPredictorFamily, m0: int, H: int):
    """First (g-index, j, block) where some encoder misses a whole block, else None."""
    k = fam.k
    m = m0
    while (m + 1) * k + k <= H:
        for j in range(k):
            if (m + 1) * k + j + k > H:
                continue
            start = m * k + j
            ys = values(y, start + k)
            block = ys[start:]
            if block not in level_k_blocks(fam, ys[:start]):
                return failing_witness(fam, ys[:start], block), j, m
        m += 1
    return None


def verify_main_theorem(y: UltWord, fam: BinPredictorFamily, m0: int, H: int) -> HitReport:
    """Check the reduction's conclusion on y after confirming its hypothesis.

    Raises HypothesisFails when some pi^(g, j) misses a whole block of the
    encoded y at a block m >= m0 inside the horizon.
    """
    if getattr(y, "n", fam.n) != fam.n:
        raise AlphabetMismatch(f"word over {y.n} symbols, family over {fam.n}")
    k = fam.k
    start = (m0 + 1) * k
    if start + k > H - 1:
        raise HorizonTooSmall(f"H={H} leaves no window after position {start}")
    bad = hypothesis_violation(y, fam, m0, H)
    if bad is not None:
        raise HypothesisFails(*bad)
    # windows starting in [start, H - k)
    return check_constant(psi(fam), y, k, start, H - 1)
