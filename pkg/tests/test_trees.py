import itertools
import random

import pytest

from predcomb import oracles
from predcomb.errors import BudgetExceeded, HorizonTooSmall, NodeAbsent, WindowOverflow
from predcomb.seqcore import (TablePredictor, UltWord, Word, check_constant,
                              constant_predictor, copy_last_predictor, round_robin_evader)
from predcomb.trees import (BlockMap, BlockTree, PrefixTree, block_matches,
                            build_window_predictor, check_star, evade_in_window, first_overflow,
                            fragment_hits, is_coverable, max_coverable_size, phi_from_predictor,
                            split_block_tree, window_fragments, window_traces)

FULL2 = PrefixTree(frozenset(itertools.product((0, 1), repeat=2)))
THREE = PrefixTree(frozenset(["00", "01", "10"]))
CHAIN = PrefixTree(frozenset(["01101"]))


def test_prefix_tree_validation():
    with pytest.raises(ValueError):
        PrefixTree(frozenset())
    with pytest.raises(ValueError):
        PrefixTree(frozenset(["0", "01"]))
    assert PrefixTree.from_json(THREE.to_json()) == THREE


def test_window_traces_examples():
    assert window_traces(FULL2, (), 2) == set(itertools.product((0, 1), repeat=2))
    assert window_traces(THREE, (), 2) == {(0, 0), (0, 1), (1, 0)}
    assert window_traces(CHAIN, (0, 1), 3) == {(1, 0, 1)}
    with pytest.raises(NodeAbsent):
        window_traces(THREE, (1, 1), 0)
    with pytest.raises(HorizonTooSmall):
        window_traces(THREE, (1,), 2)


def test_build_window_predictor_examples():
    pi = build_window_predictor(THREE, 2)
    assert pi(()) == 0 and pi((1,)) == 0
    with pytest.raises(WindowOverflow) as exc:
        build_window_predictor(FULL2, 2)
    assert exc.value.node == ()
    follow = build_window_predictor(CHAIN, 1)
    w = (0, 1, 1, 0, 1)
    assert all(follow(w[:i]) == w[i] for i in range(5))


def test_is_coverable_examples():
    for S in itertools.combinations(["00", "01", "10", "11"], 3):
        assert is_coverable(S, 2)[0]
    ok, node = is_coverable(["00", "01", "10", "11"], 2)
    assert not ok and node == ()
    with pytest.raises(ValueError):
        is_coverable(["012"], 1)


def test_n3_five_traces_coverable_in_brute_mode():
    best = max(window_fragments(3, 2), key=lambda f: len(fragment_hits(f, 3, 2)))
    S = sorted(fragment_hits(best, 3, 2))
    assert len(S) == 5
    ok, witness = is_coverable(S, 2, mode="brute", n=3)
    assert ok
    assert all(check_constant(witness, Word(w, 3), 2, 0, 2) for w in S)


@pytest.mark.parametrize("n,k,size", [(2, 1, 1), (2, 2, 3), (2, 3, 7), (3, 2, 5)])
def test_max_coverable_size(n, k, size):
    assert max_coverable_size(n, k) == size


def test_budget_guard():
    with pytest.raises(BudgetExceeded):
        max_coverable_size(3, 3, budget=1000)


def test_exact_matches_brute_exhaustive():
    for L in range(1, 5):
        for S in oracles.all_trees(L):
            for k in (1, 2, 3):
                assert is_coverable(S, k)[0] == is_coverable(S, k, mode="brute")[0], (L, k, S)


@pytest.mark.parametrize("k", [2, 3])
def test_halving_predictor_all_trees_literal(k):
    L = 4 if k == 2 else 3
    checked = 0
    for S in oracles.all_trees(L):
        T = PrefixTree(S)
        if first_overflow(T, k) is not None:
            continue
        pi = build_window_predictor(T, k)
        for w in S:
            run = 0
            for i in range(L):
                run = 0 if pi(w[:i]) == w[i] else run + 1
                assert run < k
        checked += 1
    assert checked > 0


@pytest.mark.parametrize("k", [2, 3])
def test_halving_all_trees_compositional(k):
    for L in range(1, 6):
        r = oracles.verify_halving_all_trees(L, k)
        assert r["ok"], r


def test_compositional_tree_counts_match_literal():
    for k in (2, 3):
        for L in range(1, 4 if k == 3 else 5):
            literal = sum(1 for S in oracles.all_trees(L) if first_overflow(PrefixTree(S), k) is None)
            assert oracles.verify_halving_all_trees(L, k)["trees"] == literal


def test_decisions_depend_on_truncation_only():
    rng = random.Random(21)
    words = list(itertools.product((0, 1), repeat=5))
    for _ in range(300):
        k = rng.choice([2, 3])
        T = PrefixTree(frozenset(rng.sample(words, rng.randint(1, 12))))
        if first_overflow(T, k) is not None:
            continue
        pi = build_window_predictor(T, k)
        for v in T.nodes:
            if len(v) == 5:
                continue
            d = min(k, 5 - len(v))
            trunc = PrefixTree(frozenset(w[len(v):len(v) + d] for w in T.words if w[:len(v)] == v))
            assert pi(v) == build_window_predictor(trunc, k)(())


def test_random_depth5_trees_direct_scan():
    rng = random.Random(5)
    words = list(itertools.product((0, 1), repeat=5))
    seen = 0
    while seen < 300:
        k = rng.choice([2, 3])
        T = PrefixTree(frozenset(rng.sample(words, rng.randint(1, 20))))
        if first_overflow(T, k) is not None:
            continue
        seen += 1
        pi = build_window_predictor(T, k)
        assert all(check_constant(pi, w, k, 0, 5) for w in T.words)


def test_block_tree():
    bt = split_block_tree([0, 2, 5], [2, 4], random.Random(1))
    assert len(bt.tree.words) == 8
    assert BlockTree.from_json(bt.to_json()).marks == (0, 2, 5)
    with pytest.raises(ValueError):
        BlockTree(bt.tree, (0, 2, 5), (2, 2))


# -- evasion and block maps ------------------------------------------------------

def test_evade_in_window_examples():
    assert evade_in_window(constant_predictor(0), (), 2) == (1, 1)
    assert evade_in_window(constant_predictor(0), (0, 1, 1), 2) == (1, 1)
    assert evade_in_window(copy_last_predictor(), (), 2) == (1, 0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_evade_uniqueness_exhaustive(k):
    assert oracles.evasion_uniqueness(k, 4)["ok"]


def test_phi_examples_and_consistency():
    phi = phi_from_predictor(constant_predictor(0), 2)
    assert phi(()) == (1, 1) and phi((0, 1)) == (1, 1)
    with pytest.raises(ValueError):
        phi((0,))
    rng = random.Random(9)
    for _ in range(50):
        k = rng.randint(1, 3)
        pi = TablePredictor.random(2, 7, rng)
        H = 6 * k
        g = round_robin_evader([pi], k, H).symbols
        phi = phi_from_predictor(pi, k)
        assert block_matches(phi, g, k, H) == list(range(H // k))
        for i in block_matches(phi, g, k, H):
            assert all(pi(g[:p]) != g[p] for p in range(i * k, (i + 1) * k))


def test_check_star_examples():
    rng = random.Random(4)
    pi = TablePredictor.random(2, 5, rng)
    g = UltWord((), round_robin_evader([pi], 2, 12).symbols)
    assert check_star([g], [phi_from_predictor(pi, 2)], 2, 12, 6).ok
    rep = check_star([UltWord((), (1,))], [BlockMap.constant((0, 0))], 2, 8, 1)
    assert not rep.ok and rep.entries[0]["matches"] == 0
    assert check_star([UltWord((), (1,))], [], 2, 8, 1).ok
    with pytest.raises(HorizonTooSmall):
        check_star([g], [], 2, 4, 3)
