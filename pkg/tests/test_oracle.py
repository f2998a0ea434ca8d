import random

import pytest

from latcomb import ContractError, ONE, ParamVector, SymbolTable, Wfst, Arc, weight
from latcomb.oracle import (
    brute_force_combine,
    dp_edit_alignment,
    dp_edit_distance,
    enumerate_paths,
)

from helpers import WORD_POOL, acceptor_from_sentences, classic_levenshtein

UNIT = ParamVector(1.0, 1.0, 1.0, 1.0, 1.0)


def test_enumerate_single_chain():
    syms = SymbolTable()
    fst = acceptor_from_sentences(syms, ["der plan"], score_feature=0, scores=[1.5])
    paths = enumerate_paths(fst, UNIT)
    assert len(paths) == 1
    assert paths[0].tokens == ("der", "plan")
    assert paths[0].score == pytest.approx(1.5)


def test_enumerate_parallel_arcs():
    syms = SymbolTable()
    fst = acceptor_from_sentences(syms, ["ja", "nein"])
    assert len(enumerate_paths(fst, UNIT)) == 2


def test_enumerate_diamond_costs():
    syms = SymbolTable()
    a, b, c, d = (syms.add(w) for w in "abcd")
    fst = Wfst(syms, syms)
    for _ in range(4):
        fst.add_state()
    fst.set_initial(0)
    fst.add_arc(0, Arc(a, a, weight({0: 1.0}), 1))
    fst.add_arc(0, Arc(b, b, weight({0: 2.0}), 2))
    fst.add_arc(1, Arc(c, c, weight({0: 4.0}), 3))
    fst.add_arc(1, Arc(d, d, weight({0: 8.0}), 3))
    fst.add_arc(2, Arc(c, c, weight({0: 16.0}), 3))
    fst.add_arc(2, Arc(d, d, weight({0: 32.0}), 3))
    fst.set_final(3, ONE)
    fst.freeze()
    got = {p.tokens: p.score for p in enumerate_paths(fst, UNIT)}
    assert got == {("a", "c"): 5.0, ("a", "d"): 9.0, ("b", "c"): 18.0, ("b", "d"): 34.0}


def test_enumerate_limit_and_cycle_guard():
    syms = SymbolTable()
    fst = acceptor_from_sentences(syms, ["a", "b", "c"])
    with pytest.raises(ContractError):
        enumerate_paths(fst, UNIT, limit=2)

    a = syms.add("a")
    loop = Wfst(syms, syms)
    s = loop.add_state()
    loop.set_initial(s)
    loop.set_final(s, ONE)
    loop.add_arc(s, Arc(a, a, ONE, s))
    loop.freeze()
    with pytest.raises(ContractError):
        enumerate_paths(loop, UNIT)


def test_dp_equal_sequences():
    assert dp_edit_distance(["a", "b"], ["a", "b"], set(), 1.0, 2.0) == {}


def test_dp_unit_substitution():
    assert dp_edit_distance(["a"], ["b"], set(), 1.0, 2.0) == {2: 1.0}


def test_dp_unk_run_consumes_three():
    got = dp_edit_distance(["UNK"], ["v", "w", "x"], set(), 1.0, 2.0, max_unk_run=3)
    assert got == {4: 2.0}


def test_dp_rejects_unk_in_second_sequence():
    with pytest.raises(ContractError):
        dp_edit_distance(["a"], ["UNK"], set(), 1.0, 2.0)


def test_dp_uniform_costs_reduce_to_levenshtein():
    rng = random.Random(4242)
    alphabet = ["a", "b", "c", "d", "e"]
    for _ in range(400):
        x = [rng.choice(alphabet) for _ in range(rng.randint(0, 12))]
        y = [rng.choice(alphabet) for _ in range(rng.randint(0, 12))]
        got = dp_edit_distance(x, y, set(), sub_cost=0.0, edit_cost=1.0, max_unk_run=1)
        assert got.get(2, 0.0) == classic_levenshtein(x, y)


def test_dp_reverse_consistency_without_unks():
    rng = random.Random(77)
    alphabet = ["a", "b", "c"]
    for _ in range(200):
        x = [rng.choice(alphabet) for _ in range(rng.randint(0, 8))]
        y = [rng.choice(alphabet) for _ in range(rng.randint(0, 8))]
        forward = dp_edit_distance(x, y, set(), 1.0, 2.0, max_unk_run=1)
        backward = dp_edit_distance(y, x, set(), 1.0, 2.0, max_unk_run=1)
        cost = lambda f: 2.0 * f.get(2, 0.0) + 1.0 * f.get(3, 0.0)
        assert cost(forward) == cost(backward)


def test_dp_alignment_combined_string():
    feats, combined = dp_edit_alignment(
        ["die", "UNK", "Politik"], ["die", "regionale", "Politik"],
        vocab={"die", "Politik"}, sub_cost=1.0, edit_cost=2.0)
    assert feats == {}
    assert combined == ("die", "regionale", "Politik")


def test_dp_alignment_run_fill():
    feats, combined = dp_edit_alignment(
        ["in", "UNK", "darf"], ["in", "New", "York", "darf"],
        vocab=set(), sub_cost=1.0, edit_cost=2.0, ins_cost=0.5, max_unk_run=3)
    assert feats == {4: 1.0}
    assert combined == ("in", "New", "York", "darf")


def test_dp_alignment_unk_deletion_drops_token():
    feats, combined = dp_edit_alignment(
        ["ja", "UNK"], ["ja"], vocab=set(), sub_cost=1.0, edit_cost=2.0)
    assert feats == {2: 1.0}
    assert combined == ("ja",)


def test_brute_force_identity_pair():
    syms = SymbolTable()
    nmt = acceptor_from_sentences(syms, ["der plan steht"], score_feature=0, scores=[1.25])
    hiero = acceptor_from_sentences(syms, ["der plan steht"], score_feature=1, scores=[0.5])
    got = brute_force_combine(nmt, hiero, vocab=set(WORD_POOL), nmt_scale=2.0, hiero_scale=1.0,
                              sub_cost=1.0, edit_cost=2.0, ins_cost=1.0)
    assert got.combined_tokens == ("der", "plan", "steht")
    assert got.cost == pytest.approx(2.0 * 1.25 + 0.5)
    assert dict(got.features) == {0: 1.25, 1: 0.5}


def test_brute_force_exact_match_available_with_zero_hiero_scale():
    syms = SymbolTable()
    nmt = acceptor_from_sentences(syms, ["gross haus"], score_feature=0, scores=[1.0])
    hiero = acceptor_from_sentences(syms, ["gross haus", "der plan"], score_feature=1,
                                    scores=[9.0, 0.1])
    got = brute_force_combine(nmt, hiero, vocab=set(), nmt_scale=1.0, hiero_scale=0.0,
                              sub_cost=1.0, edit_cost=2.0, ins_cost=1.0)
    assert got.hiero_tokens == ("gross", "haus")
    assert dict(got.features).get(2, 0.0) == 0.0
