"""Weighted finite-state transducer structure and structural checks.

A :class:`Wfst` is mutable while it is being built and frozen before any
algorithm touches it; frozen machines are safe to share.  States are
dense integers, arcs live in per-state adjacency lists, and every arc
weight is a :class:`~latcomb.semiring.FeatureWeight`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import ContractError
from .semiring import HIERO_SCORE, NMT_SCORE, ONE, FeatureWeight

# Labels 0 and 1 have fixed meanings in every symbol table.
EPSILON = 0
UNK = 1
EPSILON_SYMBOL = "<eps>"
UNK_SYMBOL = "UNK"

NO_STATE = -1

LATTICE_KINDS = ("nmt", "hiero", "generic")


class SymbolTable:
    """Bidirectional word/label mapping with fixed epsilon and UNK entries."""

    def __init__(self) -> None:
        self._word_to_label: dict[str, int] = {EPSILON_SYMBOL: EPSILON, UNK_SYMBOL: UNK}
        self._label_to_word: dict[int, str] = {EPSILON: EPSILON_SYMBOL, UNK: UNK_SYMBOL}
        self._next = 2

    def __len__(self) -> int:
        return len(self._word_to_label)

    def __contains__(self, word: str) -> bool:
        return word in self._word_to_label

    def has_label(self, label: int) -> bool:
        return label in self._label_to_word

    def add(self, word: str) -> int:
        """Register a word, returning its (possibly existing) label."""
        existing = self._word_to_label.get(word)
        if existing is not None:
            return existing
        label = self._next
        self._next += 1
        self._word_to_label[word] = label
        self._label_to_word[label] = word
        return label

    def add_pair(self, word: str, label: int) -> None:
        """Register an explicit word/label pair; conflicts raise ValueError."""
        if label < 0:
            raise ValueError(f"labels must be nonnegative, got {label}")
        old_word = self._label_to_word.get(label)
        old_label = self._word_to_label.get(word)
        if old_word is not None and old_word != word:
            raise ValueError(f"label {label} already maps to {old_word!r}")
        if old_label is not None and old_label != label:
            raise ValueError(f"word {word!r} already maps to label {old_label}")
        self._word_to_label[word] = label
        self._label_to_word[label] = word
        self._next = max(self._next, label + 1)

    def label(self, word: str) -> int:
        try:
            return self._word_to_label[word]
        except KeyError:
            raise KeyError(f"unknown word {word!r}") from None

    def word(self, label: int) -> str:
        try:
            return self._label_to_word[label]
        except KeyError:
            raise KeyError(f"unknown label {label}") from None

    def items(self) -> list[tuple[str, int]]:
        """All (word, label) pairs in ascending label order."""
        return [(w, l) for l, w in sorted(self._label_to_word.items())]

    def same_mapping(self, other: "SymbolTable") -> bool:
        return self is other or self._word_to_label == other._word_to_label


@dataclass(frozen=True, slots=True)
class Arc:
    ilabel: int
    olabel: int
    weight: FeatureWeight
    target: int


class Wfst:
    """Weighted transducer with one initial state and weighted final states."""

    def __init__(self, isyms: SymbolTable | None = None, osyms: SymbolTable | None = None) -> None:
        self.isyms = isyms if isyms is not None else SymbolTable()
        self.osyms = osyms if osyms is not None else self.isyms
        self._arcs: list[list[Arc]] = []
        self._finals: dict[int, FeatureWeight] = {}
        self.initial: int = NO_STATE
        self._frozen = False

    # -- construction -------------------------------------------------

    def _check_mutable(self) -> None:
        if self._frozen:
            raise ContractError("machine is frozen; build a new one instead of mutating")

    def _check_state(self, s: int) -> None:
        if not (0 <= s < len(self._arcs)):
            raise ContractError(f"unknown state id {s}")

    def add_state(self) -> int:
        self._check_mutable()
        self._arcs.append([])
        return len(self._arcs) - 1

    def add_arc(self, src: int, arc: Arc) -> None:
        self._check_mutable()
        self._check_state(src)
        self._check_state(arc.target)
        self._arcs[src].append(arc)

    def set_initial(self, s: int) -> None:
        self._check_mutable()
        self._check_state(s)
        self.initial = s

    def set_final(self, s: int, w: FeatureWeight = ONE) -> None:
        self._check_mutable()
        self._check_state(s)
        if w.infinite:
            self._finals.pop(s, None)
        else:
            self._finals[s] = w

    def freeze(self) -> "Wfst":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    # -- inspection ---------------------------------------------------

    @property
    def num_states(self) -> int:
        return len(self._arcs)

    @property
    def num_arcs(self) -> int:
        return sum(len(a) for a in self._arcs)

    def states(self) -> range:
        return range(len(self._arcs))

    def arcs(self, s: int) -> list[Arc]:
        self._check_state(s)
        return self._arcs[s]

    def is_final(self, s: int) -> bool:
        return s in self._finals

    def final_weight(self, s: int) -> FeatureWeight | None:
        """Final weight of ``s``, or None when ``s`` is not final."""
        return self._finals.get(s)

    def finals(self) -> Iterator[tuple[int, FeatureWeight]]:
        return iter(sorted(self._finals.items()))

    @property
    def num_finals(self) -> int:
        return len(self._finals)

    def all_labels(self) -> set[int]:
        """Every input and output label occurring on an arc."""
        labels: set[int] = set()
        for arcs in self._arcs:
            for arc in arcs:
                labels.add(arc.ilabel)
                labels.add(arc.olabel)
        return labels

    def is_acceptor(self) -> bool:
        return all(arc.ilabel == arc.olabel for arcs in self._arcs for arc in arcs)

    def copy(self) -> "Wfst":
        """Mutable structural copy sharing the symbol tables."""
        out = Wfst(self.isyms, self.osyms)
        out._arcs = [list(arcs) for arcs in self._arcs]
        out._finals = dict(self._finals)
        out.initial = self.initial
        return out

    def __repr__(self) -> str:
        return (f"Wfst(states={self.num_states}, arcs={self.num_arcs}, "
                f"finals={len(self._finals)}, initial={self.initial}, frozen={self._frozen})")


def topological_order(fst: Wfst) -> list[int] | None:
    """States in topological order, or None when the machine has a cycle.

    Covers every state (also ones unreachable from the initial state).
    """
    n = fst.num_states
    indegree = [0] * n
    for s in range(n):
        for arc in fst.arcs(s):
            indegree[arc.target] += 1
    stack = [s for s in range(n - 1, -1, -1) if indegree[s] == 0]
    order: list[int] = []
    while stack:
        s = stack.pop()
        order.append(s)
        for arc in fst.arcs(s):
            indegree[arc.target] -= 1
            if indegree[arc.target] == 0:
                stack.append(arc.target)
    return order if len(order) == n else None


def is_acyclic(fst: Wfst) -> bool:
    return topological_order(fst) is not None


def count_paths(fst: Wfst) -> int | None:
    """Number of complete paths, or None when the machine has a cycle."""
    order = topological_order(fst)
    if order is None:
        return None
    if fst.initial == NO_STATE:
        return 0
    ways = [0] * fst.num_states
    ways[fst.initial] = 1
    for s in order:
        if ways[s]:
            for arc in fst.arcs(s):
                ways[arc.target] += ways[s]
    return sum(ways[s] for s, _ in fst.finals())


def accessible_states(fst: Wfst) -> set[int]:
    if fst.initial == NO_STATE:
        return set()
    seen = {fst.initial}
    stack = [fst.initial]
    while stack:
        s = stack.pop()
        for arc in fst.arcs(s):
            if arc.target not in seen:
                seen.add(arc.target)
                stack.append(arc.target)
    return seen


def coaccessible_states(fst: Wfst) -> set[int]:
    reverse: list[list[int]] = [[] for _ in fst.states()]
    for s in fst.states():
        for arc in fst.arcs(s):
            reverse[arc.target].append(s)
    seen = {s for s, _ in fst.finals()}
    stack = list(seen)
    while stack:
        s = stack.pop()
        for src in reverse[s]:
            if src not in seen:
                seen.add(src)
                stack.append(src)
    return seen


@dataclass
class ValidationReport:
    """Structural diagnostics; errors are contract violations, warnings are not."""

    errors: list[str]
    warnings: list[str]

    @property
    def ok(self) -> bool:
        return not self.errors

    def lines(self) -> list[str]:
        return [f"error: {e}" for e in self.errors] + [f"warning: {w}" for w in self.warnings]


def validate(fst: Wfst, kind: str = "generic", nmt_vocab: Iterable[int] | None = None) -> ValidationReport:
    """Diagnose structural problems and, for lattices, contract violations.

    ``kind`` is one of ``nmt``, ``hiero``, ``generic``.  Lattice kinds must
    be acyclic acceptors carrying only their own score feature; ``hiero``
    additionally must not mention the UNK label.
    """
    if kind not in LATTICE_KINDS:
        raise ContractError(f"kind must be one of {LATTICE_KINDS}, got {kind!r}")
    errors: list[str] = []
    warnings: list[str] = []

    if fst.initial == NO_STATE:
        errors.append("no initial state")
    if fst.num_finals == 0:
        errors.append("no final state")

    acyclic = is_acyclic(fst)
    if not acyclic:
        msg = "machine contains a cycle"
        (errors if kind in ("nmt", "hiero") else warnings).append(msg)

    if fst.initial != NO_STATE:
        acc = accessible_states(fst)
        coacc = coaccessible_states(fst)
        unreachable = sorted(set(fst.states()) - acc)
        dead = sorted(acc - coacc)
        if unreachable:
            warnings.append(f"{len(unreachable)} state(s) unreachable from the initial state: {unreachable[:5]}")
        if dead:
            warnings.append(f"{len(dead)} reachable state(s) cannot reach a final state: {dead[:5]}")

    if kind in ("nmt", "hiero"):
        score_id = NMT_SCORE if kind == "nmt" else HIERO_SCORE
        for s in fst.states():
            for arc in fst.arcs(s):
                if arc.ilabel != arc.olabel:
                    errors.append(f"arc {s}->{arc.target} is not acceptor-form "
                                  f"(ilabel {arc.ilabel} != olabel {arc.olabel})")
                if kind == "hiero" and UNK in (arc.ilabel, arc.olabel):
                    errors.append(f"arc {s}->{arc.target} carries the UNK label, "
                                  "which is not allowed in a hiero lattice")
                bad = [fid for fid, _ in arc.weight.pairs if fid != score_id]
                if bad:
                    errors.append(f"arc {s}->{arc.target} carries feature id(s) {bad}; "
                                  f"a {kind} lattice may only use feature {score_id}")
        for s, w in fst.finals():
            bad = [fid for fid, _ in w.pairs if fid != score_id]
            if bad:
                errors.append(f"final state {s} carries feature id(s) {bad}; "
                              f"a {kind} lattice may only use feature {score_id}")
        if kind == "nmt" and nmt_vocab is not None:
            allowed = set(nmt_vocab) | {EPSILON, UNK}
            for s in fst.states():
                for arc in fst.arcs(s):
                    if arc.ilabel not in allowed:
                        errors.append(f"arc {s}->{arc.target} label {arc.ilabel} is outside "
                                      "the NMT vocabulary and is not UNK")
    return ValidationReport(errors=errors, warnings=warnings)


def linear_chain(labels: Iterable[int], syms: SymbolTable,
                 weights: Iterable[FeatureWeight] | None = None,
                 final_weight: FeatureWeight = ONE) -> Wfst:
    """Single-path acceptor for a label sequence; handy for tests and oracles."""
    labels = list(labels)
    weight_list = list(weights) if weights is not None else [ONE] * len(labels)
    if len(weight_list) != len(labels):
        raise ContractError("need exactly one weight per label")
    fst = Wfst(syms, syms)
    prev = fst.add_state()
    fst.set_initial(prev)
    for label, w in zip(labels, weight_list):
        nxt = fst.add_state()
        fst.add_arc(prev, Arc(label, label, w, nxt))
        prev = nxt
    fst.set_final(prev, final_weight)
    return fst.freeze()
