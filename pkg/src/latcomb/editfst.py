"""Builders for the edit-distance flower automata and the UNK run expander.

The standard flower charges one edit count for every substitution,
insertion, and deletion.  The modified flower distinguishes three kinds
of operation so that filling an NMT UNK placeholder from the other
lattice is cheap:

* UNK -> out-of-vocabulary word: free,
* UNK -> in-vocabulary word: one ``sub_count``,
* everything else (other substitutions, insertions, deletions, and
  deleting an UNK): one ``edit_count``.

Arcs carry raw counters, not costs; the lambda multipliers enter only at
search time through the parameter vector, so one machine serves every
parameter setting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import FrozenSet

from .errors import ContractError
from .fst import EPSILON, UNK, Arc, SymbolTable, Wfst
from .semiring import EDIT_COUNT, ONE, SUB_COUNT, UNK_EXT_COUNT, FeatureWeight

_EDIT_ONE = FeatureWeight(pairs=((EDIT_COUNT, 1.0),))
_SUB_ONE = FeatureWeight(pairs=((SUB_COUNT, 1.0),))
_EXT_ONE = FeatureWeight(pairs=((UNK_EXT_COUNT, 1.0),))


@dataclass(frozen=True)
class EditCostModel:
    """Alphabet, NMT vocabulary, and cost multipliers for edit typing.

    ``alphabet`` is the set of word labels occurring in the two lattices
    (epsilon and UNK are stripped automatically); ``nmt_vocab`` decides
    whether an UNK fill is free or pays ``sub_cost``.  Requires
    ``edit_cost > sub_cost >= 0`` and ``ins_cost >= 0``.
    """

    alphabet: FrozenSet[int]
    nmt_vocab: FrozenSet[int] = field(default_factory=frozenset)
    sub_cost: float = 1.0
    edit_cost: float = 2.0
    ins_cost: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphabet", frozenset(self.alphabet) - {EPSILON, UNK})
        object.__setattr__(self, "nmt_vocab", frozenset(self.nmt_vocab))
        if UNK in self.nmt_vocab or EPSILON in self.nmt_vocab:
            raise ContractError("the NMT vocabulary must not contain the UNK or epsilon labels")
        if not (self.sub_cost >= 0.0 and self.edit_cost > self.sub_cost):
            raise ContractError(
                f"cost ordering violated: need edit_cost > sub_cost >= 0, "
                f"got edit_cost={self.edit_cost}, sub_cost={self.sub_cost}")
        if not (self.ins_cost >= 0.0 and math.isfinite(self.ins_cost)):
            raise ContractError(f"ins_cost must be finite and nonnegative, got {self.ins_cost}")
        for v in (self.sub_cost, self.edit_cost):
            if not math.isfinite(v):
                raise ContractError("edit cost multipliers must be finite")

    def in_vocab(self, label: int) -> bool:
        return label in self.nmt_vocab


def build_standard_edit_fst(alphabet: FrozenSet[int] | set[int], symbols: SymbolTable) -> Wfst:
    """Single-state flower computing plain edit distance over ``alphabet``.

    Identity arcs are free; every substitution, deletion, and insertion
    carries one ``edit_count``.  Composing acceptor(x) with this machine
    and acceptor(y) yields the Levenshtein distance between x and y.
    """
    letters = sorted(set(alphabet) - {EPSILON})
    if not letters:
        raise ContractError("edit transducer needs a nonempty alphabet")
    fst = Wfst(symbols, symbols)
    q = fst.add_state()
    fst.set_initial(q)
    fst.set_final(q, ONE)
    for a in letters:
        fst.add_arc(q, Arc(a, a, ONE, q))
        fst.add_arc(q, Arc(a, EPSILON, _EDIT_ONE, q))
        fst.add_arc(q, Arc(EPSILON, a, _EDIT_ONE, q))
        for b in letters:
            if a != b:
                fst.add_arc(q, Arc(a, b, _EDIT_ONE, q))
    return fst.freeze()


def build_modified_edit_fst(model: EditCostModel, symbols: SymbolTable) -> Wfst:
    """Single-state flower with typed costs for UNK-aware matching.

    Input side ranges over the alphabet plus UNK; the output side never
    carries UNK, so UNK placeholders can only be resolved (or deleted),
    never produced.
    """
    letters = sorted(model.alphabet)
    if not letters:
        raise ContractError("edit transducer needs a nonempty alphabet")
    fst = Wfst(symbols, symbols)
    q = fst.add_state()
    fst.set_initial(q)
    fst.set_final(q, ONE)
    for a in letters:
        fst.add_arc(q, Arc(a, a, ONE, q))
        fst.add_arc(q, Arc(a, EPSILON, _EDIT_ONE, q))
        fst.add_arc(q, Arc(EPSILON, a, _EDIT_ONE, q))
        fst.add_arc(q, Arc(UNK, a, _SUB_ONE if model.in_vocab(a) else ONE, q))
        for b in letters:
            if a != b:
                fst.add_arc(q, Arc(a, b, _EDIT_ONE, q))
    fst.add_arc(q, Arc(UNK, EPSILON, _EDIT_ONE, q))
    return fst.freeze()


def build_unk_insertion_fst(max_run: int, symbols: SymbolTable) -> Wfst:
    """Chain accepting 1..``max_run`` UNK tokens.

    The first UNK is free; each further UNK carries one ``unk_ext_count``.
    Splicing this over the UNK arcs of an NMT lattice lets a single
    placeholder stand for a short run of them.
    """
    if max_run < 1:
        raise ContractError(f"max_run must be at least 1, got {max_run}")
    fst = Wfst(symbols, symbols)
    states = [fst.add_state() for _ in range(max_run + 1)]
    fst.set_initial(states[0])
    fst.add_arc(states[0], Arc(UNK, UNK, ONE, states[1]))
    for i in range(1, max_run):
        fst.add_arc(states[i], Arc(UNK, UNK, _EXT_ONE, states[i + 1]))
    for i in range(1, max_run + 1):
        fst.set_final(states[i], ONE)
    return fst.freeze()
