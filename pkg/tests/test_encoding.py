import itertools
import random

import pytest
from hypothesis import given, strategies as st

from predcomb import oracles
from predcomb.encoding import (AllEqualFamily, GFamily, HashFamily, LevelTableFamily,
                               NoisyLevelFamily, ResolverFamily, TargetSetFamily, a_set,
                               encode_prefix, encode_ult, encode_word, enum_g_families,
                               failing_witness, g_space_size, hypothesis_violation,
                               level_k_blocks, psi, psi_decision, verify_main_theorem)
from predcomb.errors import (BudgetExceeded, HypothesisFails, LevelUndefined, PhaseMismatch)
from predcomb.seqcore import (TablePredictor, UltWord, Word, all_words, check_constant,
                              constant_predictor)


def ult(pre, per, n=2):
    return UltWord(tuple(int(c) for c in pre), tuple(int(c) for c in per), n)


def g_zero_family():
    """pi^(g0, 0) is the constant g0(<0>)."""
    def resolver(gi, j):
        return constant_predictor(GFamily.from_index(2, 1, gi).value(0, (0,)))
    return ResolverFamily(2, 1, resolver)


# -- G-space ----------------------------------------------------------------------

@pytest.mark.parametrize("n,k,size", [(2, 1, 4), (2, 2, 256), (3, 1, 8)])
def test_enum_g_families_sizes(n, k, size):
    fams = enum_g_families(n, k)
    assert len(fams) == size == g_space_size(n, k)
    if size <= 256:
        assert len({f.index for f in fams}) == size
        assert [f.index for f in fams] == list(range(size))


def test_enum_budget():
    with pytest.raises(BudgetExceeded):
        enum_g_families(3, 2, budget=1000)


def test_g_index_order_is_lexicographic():
    # most significant bit first: index 1 sets only the last table entry
    g = GFamily.from_index(2, 1, 1)
    assert g.pattern((0,)) == (0,) and g.pattern((1,)) == (1,)
    assert GFamily.projections(2, 1).index == 1


@given(st.integers(0, 255))
def test_g_index_round_trip(i):
    g = GFamily.from_index(2, 2, i)
    assert GFamily.from_index(2, 2, g.index) == g
    assert GFamily.from_json(g.to_json()).index == i


# -- encodings ------------------------------------------------------------------

def test_projection_encoding_is_identity():
    proj = GFamily.projections(2, 2)
    y = ult("0110", "1")
    assert encode_word(y, proj, 0, 10).symbols == y.prefix(10)


def test_zero_maps_encode_to_zeros():
    assert encode_word(ult("", "1"), GFamily.from_index(2, 2, 0), 1, 6).symbols == (0,) * 6


def test_shifted_projection_example():
    assert str(encode_word(ult("", "01"), GFamily.projections(2, 2), 1, 4)) == "1010"


def test_encode_prefix_examples():
    proj = GFamily.projections(2, 2)
    assert str(encode_prefix(Word.parse("010"), proj, 1)) == "10"
    assert str(encode_prefix(Word.parse("0"), proj, 1)) == ""
    ones = GFamily.from_index(2, 2, g_space_size(2, 2) - 1)
    assert str(encode_prefix(Word.parse("01101"), ones, 1)) == "1111"
    with pytest.raises(PhaseMismatch):
        encode_prefix(Word.parse("01"), proj, 1)


@given(st.integers(0, 7), st.integers(0, 4), st.integers(1, 4))
def test_encode_ult_matches_encode_word(gi, pre_len, per_len):
    rng = random.Random(gi * 31 + pre_len * 7 + per_len)
    y = UltWord(tuple(rng.randrange(3) for _ in range(pre_len)),
                tuple(rng.randrange(3) for _ in range(per_len)), 3)
    g = GFamily.from_index(3, 1, gi)
    assert encode_ult(y, g, 0).prefix(20) == encode_word(y, g, 0, 20).symbols


# -- A-sets -------------------------------------------------------------------

def test_constant_zero_family_a_sets_empty():
    fam = AllEqualFamily(constant_predictor(0), 2, 1)
    for sigma in all_words(2, 3):
        assert len(a_set(sigma, fam, 1)) == 0


def test_g_zero_family_a_set():
    fam = g_zero_family()
    for sigma in all_words(2, 3):
        assert a_set(sigma, fam, 1).members == {sigma + (0,)}
    assert failing_witness(fam, (), (1,)) is not None


def test_level_undefined():
    fam = AllEqualFamily(constant_predictor(0), 2, 2)
    with pytest.raises(LevelUndefined):
        a_set((0,), fam, 0)
    assert a_set((0,), fam, 1).level == 1


@pytest.mark.parametrize("k", [1, 2])
def test_claim_exhaustive_all_equal(k):
    worst = 0
    for pi in oracles.enum_predictors(2, 3):
        fam = AllEqualFamily(pi, 2, k)
        for sigma in all_words(2, 3):
            worst = max(worst, len(level_k_blocks(fam, sigma)))
    assert worst <= (1 << k) - 1


@pytest.mark.parametrize("n,k", [(2, 2), (3, 2)])
def test_claim_random_families(n, k):
    r = oracles.verify_a_set_bound(n, k, 4, trials=300, seed=5)
    assert r["counts"]["violations"] == 0
    assert r["max_observed"] <= 3


def test_target_set_family_is_extremal():
    fam = TargetSetFamily(2, 2, [(0, 0), (0, 1), (1, 0)])
    assert level_k_blocks(fam, ()) == {(0, 0), (0, 1), (1, 0)}


def test_reduced_scan_matches_bruteforce():
    rng = random.Random(3)
    for _ in range(40):
        fam = oracles.random_family(2, 2, rng)
        sigma = tuple(rng.randrange(2) for _ in range(rng.randint(0, 4)))
        assert level_k_blocks(fam, sigma) == oracles.a_set_bruteforce(sigma, fam)
    for _ in range(20):
        fam = oracles.random_family(3, 1, rng)
        sigma = tuple(rng.randrange(3) for _ in range(rng.randint(0, 4)))
        assert level_k_blocks(fam, sigma) == oracles.a_set_bruteforce(sigma, fam)


def test_hypothesis_check_matches_bruteforce():
    rng = random.Random(8)
    for _ in range(20):
        y = oracles.random_ultword(2, rng, 3, 3)
        fam = oracles.random_family(2, 2, rng) if rng.random() < 0.5 else LevelTableFamily(y, 2)
        ours = hypothesis_violation(y, fam, 0, 14)
        theirs = oracles.weak_hypothesis_bruteforce(y, fam, 0, 14)
        assert (ours is None) == (theirs is None)
        if ours is not None:
            gi, j, m = ours
            enc = encode_word(y, GFamily.from_index(2, 2, gi), j, (m + 1) * 2).symbols
            pi = fam.predictor(gi, j)
            assert all(pi(enc[:i]) != enc[i] for i in range(2 * m, 2 * m + 2))


# -- psi -------------------------------------------------------------------------

def test_psi_on_g_zero_family_is_zero():
    p = psi(g_zero_family())
    assert all(p(w) == 0 for w in all_words(2, 4))


def test_psi_total_on_dead_family():
    p = psi(AllEqualFamily(constant_predictor(0), 2, 2))
    assert all(p(w) in (0, 1) for w in all_words(2, 4))


def test_psi_end_to_end_constant_word():
    fam = g_zero_family()
    y = ult("", "0")
    assert verify_main_theorem(y, fam, 0, 20)
    assert check_constant(psi(fam), y, 1, 0, 20)


def test_halving_step():
    rng = random.Random(17)
    for _ in range(200):
        n, k = rng.choice([(2, 1), (2, 2), (3, 1), (3, 2)])
        fam = oracles.random_family(n, k, rng)
        sigma = tuple(rng.randrange(n) for _ in range(rng.randint(0, 5)))
        d = psi_decision(fam, sigma)
        if d.level == 0:
            assert d.symbol == 0
            continue
        assert d.level_size < 1 << d.level
        assert sum(d.child_sizes) == d.level_size
        for s, size in enumerate(d.child_sizes):
            if s != d.symbol:
                assert 2 * size <= d.level_size


# -- main theorem -------------------------------------------------------------

def test_hypothesis_fails_example():
    fam = AllEqualFamily(constant_predictor(0), 2, 1)
    with pytest.raises(HypothesisFails):
        verify_main_theorem(ult("", "1"), fam, 0, 10)


def test_level_table_trials_small():
    rng = random.Random(0)
    for _ in range(30):
        y = oracles.random_ultword(3, rng)
        assert verify_main_theorem(y, LevelTableFamily(y, 2), 0, 40)


def test_noisy_level_family_hypothesis_holds():
    rng = random.Random(12)
    for _ in range(15):
        y = oracles.random_ultword(2, rng)
        fam = NoisyLevelFamily(y, 2, rng.getrandbits(16), [(0, 1)])
        assert verify_main_theorem(y, fam, 0, 30)


def _follower(words, depth):
    """Table predictor that follows the least word of the set through each prefix."""
    table = {}
    for w in sorted(words, key=lambda u: u.prefix(depth), reverse=True):
        p = w.prefix(depth)
        for i in range(depth - 1):
            table[p[:i]] = p[i]
    return TablePredictor(2, depth, table)


@pytest.mark.parametrize("n,k", [(2, 2), (2, 1), (3, 1)])
def test_one_binary_predictor_transfers_to_family(n, k):
    rng = random.Random(n * 10 + k)
    F = [oracles.random_ultword(n, rng, 3, 3) for _ in range(3)]
    Y = {encode_ult(y, g, j) for y in F for g in enum_g_families(n, k) for j in range(k)}
    Y = list(Y)
    sep = max((a.first_difference(b) for a, b in itertools.combinations(Y, 2)), default=0)
    m0 = sep // k + 1
    H = (m0 + 4) * k + 2
    fam = AllEqualFamily(_follower(Y, H + k + 1), n, k)
    for y in F:
        assert verify_main_theorem(y, fam, m0, H)
