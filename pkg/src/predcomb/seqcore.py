"""Words, eventually periodic words, predictors and the hit-checking semantics.

Everything here is immutable. A *predictor* maps a finite word (a tuple of
symbols) to a guess for the next symbol; it "hits" position ``i`` of ``x``
when ``pi(x[:i]) == x[i]``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

from .errors import AlphabetMismatch, HorizonTooSmall, NotFiniteMemory

DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def _symbols(value, n) -> tuple:
    if isinstance(value, str):
        out = tuple(DIGITS.index(c) for c in value)
    else:
        out = tuple(int(s) for s in value)
    for s in out:
        if not 0 <= s < n:
            raise AlphabetMismatch(f"symbol {s} outside alphabet of size {n}")
    return out


def fmt(symbols) -> str:
    """Digit-string form of a symbol tuple."""
    return "".join(DIGITS[s] for s in symbols)


def infer_n(text: str, n: int | None = None) -> int:
    if n is not None:
        return n
    top = max((DIGITS.index(c) for c in text if c not in "()"), default=0)
    return max(2, top + 1)


@dataclass(frozen=True)
class Word:
    """A finite word over ``range(n)``."""

    symbols: tuple
    n: int = 2

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("alphabet size must be at least 2")
        object.__setattr__(self, "symbols", _symbols(self.symbols, self.n))

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "Word":
        return cls(text, infer_n(text, n))

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Word(self.symbols[i], self.n)
        return self.symbols[i]

    def __add__(self, other):
        other_syms = other.symbols if isinstance(other, Word) else tuple(other)
        return Word(self.symbols + other_syms, self.n)

    def __str__(self):
        return fmt(self.symbols)

    def prefix(self, length: int) -> "Word":
        if length > len(self.symbols):
            raise HorizonTooSmall(f"prefix of length {length} of a word of length {len(self)}")
        return Word(self.symbols[:length], self.n)

    def block(self, start: int, stop: int) -> "Word":
        if stop > len(self.symbols) or start < 0 or start > stop:
            raise HorizonTooSmall(f"block [{start}, {stop}) of a word of length {len(self)}")
        return Word(self.symbols[start:stop], self.n)


@dataclass(frozen=True, eq=False)
class UltWord:
    """Eventually periodic infinite word ``pre + period + period + ...``."""

    pre: tuple
    period: tuple
    n: int = 2

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("alphabet size must be at least 2")
        object.__setattr__(self, "pre", _symbols(self.pre, self.n))
        object.__setattr__(self, "period", _symbols(self.period, self.n))
        if not self.period:
            raise ValueError("period must be non-empty")

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "UltWord":
        text = text.strip()
        if not text.endswith(")") or "(" not in text:
            raise ValueError(f"expected 'pre(period)', got {text!r}")
        pre, period = text[:-1].split("(", 1)
        return cls(pre, period, infer_n(text, n))

    def __str__(self):
        return f"{fmt(self.pre)}({fmt(self.period)})"

    def __repr__(self):
        return f"UltWord({str(self)!r}, n={self.n})"

    def __getitem__(self, i: int) -> int:
        if i < 0:
            raise IndexError(i)
        if i < len(self.pre):
            return self.pre[i]
        return self.period[(i - len(self.pre)) % len(self.period)]

    def prefix(self, length: int) -> tuple:
        return self.segment(0, length)

    def segment(self, start: int, stop: int) -> tuple:
        return tuple(self[i] for i in range(start, stop))

    def agreement_bound(self, other: "UltWord") -> int:
        """Positions that must be compared to decide equality."""
        return (len(self.pre) + len(other.pre)
                + math.lcm(len(self.period), len(other.period)))

    def first_difference(self, other: "UltWord") -> int | None:
        for i in range(self.agreement_bound(other)):
            if self[i] != other[i]:
                return i
        return None

    def __eq__(self, other):
        if not isinstance(other, UltWord):
            return NotImplemented
        return self.n == other.n and self.first_difference(other) is None

    def canonical(self) -> tuple:
        """Shortest (pre, period) describing the same infinite word."""
        per = self.period
        for d in range(1, len(per) + 1):
            if len(per) % d == 0 and per == per[:d] * (len(per) // d):
                per = per[:d]
                break
        pre = self.pre
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1:] + per[:-1]
        return pre, per

    def __hash__(self):
        return hash((self.n,) + self.canonical())


WordLike = Union[Word, UltWord]


class Predictor:
    """A total map from words over ``range(n)`` to a symbol."""

    n: int
    kind: str = "abstract"

    def __call__(self, word) -> int:
        raise NotImplementedError

    def answers(self, length: int) -> bool:
        """Whether words of this length are inside the declared domain."""
        return True


@dataclass(frozen=True, eq=False)
class TablePredictor(Predictor):
    """Explicit table on words of length < depth.

    Missing entries and words at or beyond ``depth`` are answered with 0;
    ``check_constant`` flags the second case in its report.
    """

    n: int
    depth: int
    table: Mapping = field(default_factory=dict)
    kind: str = "table"

    def __call__(self, word) -> int:
        w = word if type(word) is tuple else tuple(word)
        if len(w) >= self.depth:
            return 0
        return self.table.get(w, 0)

    def answers(self, length):
        return length < self.depth

    def to_json(self) -> dict:
        return {"n": self.n, "depth": self.depth,
                "table": {fmt(w): DIGITS[v] for w, v in sorted(self.table.items())}}

    @classmethod
    def from_json(cls, data) -> "TablePredictor":
        if isinstance(data, str):
            data = json.loads(data)
        n = int(data["n"])
        table = {_symbols(k, n): _symbols(v, n)[0] for k, v in data["table"].items()}
        return cls(n, int(data["depth"]), table)

    @classmethod
    def random(cls, n, depth, rng) -> "TablePredictor":
        table = {w: rng.randrange(n) for w in all_words(n, depth - 1)}
        return cls(n, depth, table)


@dataclass(frozen=True, eq=False)
class RulePredictor(Predictor):
    n: int
    fn: Callable[[tuple], int]
    name: str = "rule"
    kind: str = "rule"

    def __call__(self, word) -> int:
        return self.fn(word if type(word) is tuple else tuple(word))

    def __repr__(self):
        return f"RulePredictor({self.name!r}, n={self.n})"


@dataclass(frozen=True, eq=False)
class FiniteMemoryPredictor(Predictor):
    """Guess from the last ``window`` symbols and the length mod ``modulus``.

    Words shorter than ``window`` use their whole content as key; absent
    keys give 0.
    """

    n: int
    window: int
    modulus: int
    table: Mapping = field(default_factory=dict)
    kind: str = "finite-memory"

    def __post_init__(self):
        if self.window < 0 or self.modulus < 1:
            raise ValueError("window must be >= 0 and modulus >= 1")

    def __call__(self, word) -> int:
        w = word if type(word) is tuple else tuple(word)
        tail = w[-self.window:] if self.window else ()
        return self.table.get((tail, len(w) % self.modulus), 0)

    @classmethod
    def random(cls, n, window, modulus, rng) -> "FiniteMemoryPredictor":
        table = {}
        for length in range(window + 1):
            for tail in itertools.product(range(n), repeat=length):
                for phase in range(modulus):
                    table[(tail, phase)] = rng.randrange(n)
        return cls(n, window, modulus, table)


def constant_predictor(c: int, n: int = 2) -> FiniteMemoryPredictor:
    return FiniteMemoryPredictor(n, 0, 1, {((), 0): c})


def copy_last_predictor(n: int = 2) -> FiniteMemoryPredictor:
    """Guess the previous symbol again; 0 on the empty word."""
    table = {((s,), 0): s for s in range(n)}
    table[((), 0)] = 0
    return FiniteMemoryPredictor(n, 1, 1, table)


def all_words(n: int, max_len: int, min_len: int = 0):
    """All words of length in [min_len, max_len], shortest first, lexicographic."""
    for length in range(min_len, max_len + 1):
        yield from itertools.product(range(n), repeat=length)


@dataclass(frozen=True)
class HitReport:
    verdict: bool
    witness: int | None
    checked_horizon: int
    beyond_depth: bool = False

    def __bool__(self):
        return self.verdict

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "witness": self.witness,
                "checked_horizon": self.checked_horizon, "beyond_depth": self.beyond_depth}


def values(x, horizon: int, n: int | None = None) -> tuple:
    """First ``horizon`` symbols of a Word, UltWord or plain sequence."""
    if isinstance(x, UltWord):
        return x.prefix(horizon)
    syms = x.symbols if isinstance(x, Word) else tuple(x)
    if len(syms) < horizon:
        raise HorizonTooSmall(f"word of length {len(syms)} is not evaluable on [0, {horizon})")
    return syms[:horizon]


def _alphabet(pi: Predictor, x) -> None:
    xn = getattr(x, "n", None)
    if xn is not None and xn != pi.n:
        raise AlphabetMismatch(f"predictor over {pi.n} symbols, word over {xn}")


def check_constant(pi: Predictor, x, k: int, m: int, H: int) -> HitReport:
    """Every window [a, a+k) with m <= a, a+k <= H contains a hit.

    On failure the witness is the least violating window start.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if m + k > H:
        raise HorizonTooSmall(f"no window of length {k} fits in [{m}, {H})")
    _alphabet(pi, x)
    xs = values(x, H)
    beyond = False
    misses = 0
    for i in range(m, H):
        if not pi.answers(i):
            beyond = True
        if pi(xs[:i]) == xs[i]:
            misses = 0
        else:
            misses += 1
            if misses == k:
                return HitReport(False, i - k + 1, H, beyond)
    return HitReport(True, None, H, beyond)


def check_weak(pi: Predictor, x, k: int, M: int, H: int) -> HitReport:
    """Every aligned block [mk, (m+1)k) with M <= m, (m+1)k <= H contains a hit.

    The witness is a block index, not a position.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if (M + 1) * k > H:
        raise HorizonTooSmall(f"block {M} of length {k} does not fit below {H}")
    _alphabet(pi, x)
    xs = values(x, H)
    beyond = False
    block = M
    while (block + 1) * k <= H:
        hit = False
        for i in range(block * k, (block + 1) * k):
            if not pi.answers(i):
                beyond = True
            if pi(xs[:i]) == xs[i]:
                hit = True
                break
        if not hit:
            return HitReport(False, block, H, beyond)
        block += 1
    return HitReport(True, None, H, beyond)


def check_constant_exact(pi: Predictor, x: UltWord, k: int):
    """Decide the infinite statement "pi k-constantly predicts x".

    Returns ``(verdict, onset)`` where onset is the least m from which every
    k-window has a hit (None when the verdict is false).
    """
    if not isinstance(pi, FiniteMemoryPredictor):
        raise NotFiniteMemory(f"{pi.kind} predictors have no finite state space")
    if k < 1:
        raise ValueError("k must be >= 1")
    _alphabet(pi, x)
    pre, per = len(x.pre), len(x.period)
    # From this index on, the hit at i depends only on the state below.
    start = pre + pi.window
    seen = {}
    i = start
    while True:
        state = ((i - pre) % per, i % pi.modulus)
        if state in seen:
            cycle_start, cycle_len = seen[state], i - seen[state]
            break
        seen[state] = i
        i += 1
    horizon = cycle_start + cycle_len + k
    xs = x.prefix(horizon)
    hits = [pi(xs[:i]) == xs[i] for i in range(horizon)]

    run = 0
    for i in range(cycle_start, cycle_start + cycle_len + k - 1):
        run = 0 if hits[i] else run + 1
        if run >= k:
            return False, None
    onset = 0
    run = 0
    for i in range(0, cycle_start + k - 1):
        run = 0 if hits[i] else run + 1
        if run >= k:
            onset = i - k + 2
    return True, onset


def diagonal_evader(pi: Predictor, H: int) -> Word:
    """Word of length H missed by pi at every position (least avoiding symbol)."""
    if H < 1:
        raise ValueError("H must be >= 1")
    xs: list = []
    for _ in range(H):
        guess = pi(tuple(xs))
        xs.append(1 if guess == 0 else 0)
    return Word(tuple(xs), pi.n)


def round_robin_evader(predictors: Sequence[Predictor], k: int, H: int) -> Word:
    """Binary word whose block t is an all-miss block for predictors[t % len]."""
    if not predictors:
        raise ValueError("need at least one predictor")
    if any(p.n != 2 for p in predictors):
        raise AlphabetMismatch("round-robin evasion is binary")
    if k < 1 or H % k:
        raise ValueError(f"H={H} must be a positive multiple of k={k}")
    xs: list = []
    for t in range(H // k):
        pi = predictors[t % len(predictors)]
        for _ in range(k):
            xs.append(1 - pi(tuple(xs)))
    return Word(tuple(xs), 2)


def scheduled_blocks(count: int, s: int, k: int, H: int) -> list:
    """Block indices assigned to predictor s by round_robin_evader."""
    return [t for t in range(H // k) if t % count == s]
