"""End-to-end combination of an NMT lattice with a hiero lattice.

The steps: prune the hiero lattice to a node budget, splice the UNK run
expander over the NMT lattice's UNK arcs, compose both sides with the
typed edit-distance flower, take the single shortest path, and read the
combined translation off that path (input labels, with each UNK replaced
by its aligned output labels).  The selected pair of hypotheses
minimizes typed edit distance plus the scaled model scores over all
pairs the two lattices offer.

Per-sentence combinations are independent; the flower and run expander
are built per sentence over the labels actually present, which keeps
them small without changing the optimum.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace as dc_replace
from typing import FrozenSet, Iterable, Sequence

from .algorithms import PathWitness, compose, nbest, prune_to_node_budget, replace, shortest_path
from .editfst import EditCostModel, build_modified_edit_fst, build_unk_insertion_fst
from .errors import ContractError
from .fst import EPSILON, UNK, Wfst, count_paths, is_acyclic
from .semiring import (
    EDIT_COUNT,
    SUB_COUNT,
    UNK_EXT_COUNT,
    FeatureWeight,
    ParamVector,
    format_weight,
)

# The combination is designed around small NMT hypothesis sets; larger
# ones still work but deserve a nudge.
NMT_PATHS_SOFT_LIMIT = 20

HIERO_ONLY = ParamVector(nmt=0.0, hiero=1.0, edit=0.0, sub=0.0, ins=0.0)


@dataclass(frozen=True)
class CombinationParams:
    """Scaling and similarity parameters plus the NMT vocabulary (as labels)."""

    lambda_nmt: float = 1.0
    lambda_hiero: float = 1.0
    lambda_sub: float = 1.0
    lambda_edit: float = 2.0
    lambda_ins: float = 1.0
    max_unk_run: int = 3
    hiero_node_budget: int = 100_000
    nmt_vocab: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if not (self.lambda_sub >= 0.0 and self.lambda_edit > self.lambda_sub):
            raise ContractError(
                f"need lambda_edit > lambda_sub >= 0, got "
                f"lambda_edit={self.lambda_edit}, lambda_sub={self.lambda_sub}")
        if self.lambda_ins < 0.0:
            raise ContractError(f"lambda_ins must be nonnegative, got {self.lambda_ins}")
        if self.lambda_nmt < 0.0 or self.lambda_hiero < 0.0:
            raise ContractError("lambda_nmt and lambda_hiero must be nonnegative")
        if self.max_unk_run < 1:
            raise ContractError(f"max_unk_run must be at least 1, got {self.max_unk_run}")
        if self.hiero_node_budget < 1:
            raise ContractError(f"hiero_node_budget must be at least 1, got {self.hiero_node_budget}")
        object.__setattr__(self, "nmt_vocab", frozenset(self.nmt_vocab))

    def as_param_vector(self) -> ParamVector:
        return ParamVector(nmt=self.lambda_nmt, hiero=self.lambda_hiero,
                           edit=self.lambda_edit, sub=self.lambda_sub, ins=self.lambda_ins)

    def with_vocab(self, vocab: Iterable[int]) -> "CombinationParams":
        return dc_replace(self, nmt_vocab=frozenset(vocab))

    def edit_model(self, alphabet: Iterable[int]) -> EditCostModel:
        return EditCostModel(alphabet=frozenset(alphabet), nmt_vocab=self.nmt_vocab,
                             sub_cost=self.lambda_sub, edit_cost=self.lambda_edit,
                             ins_cost=self.lambda_ins)


@dataclass(frozen=True)
class EditStats:
    """Per-sentence breakdown of the alignment the shortest path used."""

    unk_extensions: int = 0
    type2_subs: int = 0
    type3_edits: int = 0

    @property
    def exact_match(self) -> bool:
        return self.unk_extensions == 0 and self.type2_subs == 0 and self.type3_edits == 0


@dataclass(frozen=True)
class CombinationResult:
    """Combined translation plus the hypothesis pair and diagnostics.

    ``path`` is the winning path of the combined machine (None when the
    result was assembled elsewhere, e.g. in reports).
    """

    t_comb: tuple[str, ...]
    t_nmt: tuple[str, ...]
    t_hiero: tuple[str, ...]
    total_cost: float
    feature_vector: FeatureWeight
    stats: EditStats
    source_id: str = ""
    path: PathWitness | None = field(default=None, repr=False, compare=False)

    def to_key_value_lines(self) -> list[str]:
        return [
            f"source_id={self.source_id}",
            f"t_comb={' '.join(self.t_comb)}",
            f"t_nmt={' '.join(self.t_nmt)}",
            f"t_hiero={' '.join(self.t_hiero)}",
            f"total_cost={_fmt(self.total_cost)}",
            f"feature_vector={format_weight(self.feature_vector)}",
            f"unk_extensions={self.stats.unk_extensions}",
            f"type2_subs={self.stats.type2_subs}",
            f"type3_edits={self.stats.type3_edits}",
            f"exact_match={'true' if self.stats.exact_match else 'false'}",
        ]


def _fmt(v: float) -> str:
    return f"{v:.10g}"


def _check_lattice(lattice: Wfst, name: str, forbid_unk: bool) -> None:
    if not lattice.frozen:
        raise ContractError(f"{name} lattice must be frozen")
    if lattice.num_states == 0 or lattice.initial < 0 or lattice.num_finals == 0:
        raise ContractError(f"{name} lattice is empty")
    if not is_acyclic(lattice):
        raise ContractError(f"{name} lattice must be acyclic")
    if forbid_unk:
        for s in lattice.states():
            for arc in lattice.arcs(s):
                if UNK in (arc.ilabel, arc.olabel):
                    raise ContractError(f"{name} lattice must not contain the UNK label")


def combine(nmt_lattice: Wfst, hiero_lattice: Wfst, params: CombinationParams,
            source_id: str = "") -> CombinationResult:
    """Run the full combination for one sentence pair.

    Reading lattice scores as negative log-likelihoods gives the
    probabilistic view: exp(-total_cost) is the edit-similarity factor
    times the lambda-weighted likelihoods of the selected pair.  That is
    an identity on the returned cost, not a separate runtime semiring.
    """
    _check_lattice(nmt_lattice, "NMT", forbid_unk=False)
    _check_lattice(hiero_lattice, "hiero", forbid_unk=True)
    if not nmt_lattice.isyms.same_mapping(hiero_lattice.isyms):
        raise ContractError("the two lattices must share a symbol table")

    n_paths = count_paths(nmt_lattice)
    if n_paths is not None and n_paths > NMT_PATHS_SOFT_LIMIT:
        warnings.warn(f"NMT lattice holds {n_paths} hypotheses; the combination is tuned "
                      f"for small sets (<= {NMT_PATHS_SOFT_LIMIT})", stacklevel=2)

    pruned_hiero = prune_to_node_budget(hiero_lattice, params.hiero_node_budget, HIERO_ONLY)
    run_fst = build_unk_insertion_fst(params.max_unk_run, nmt_lattice.isyms)
    extended_nmt = replace(nmt_lattice, UNK, run_fst)

    alphabet = (nmt_lattice.all_labels() | pruned_hiero.all_labels()) - {EPSILON, UNK}
    model = params.edit_model(alphabet)
    edit_fst = build_modified_edit_fst(model, nmt_lattice.isyms)

    combined = compose(compose(extended_nmt, edit_fst), pruned_hiero)
    path = shortest_path(combined, params.as_param_vector())
    stats = decompose_alignment(path, model)

    syms = nmt_lattice.isyms
    return CombinationResult(
        t_comb=tuple(syms.word(l) for l in path.unk_filled_labels()),
        t_nmt=tuple(syms.word(l) for l in path.input_labels()),
        t_hiero=tuple(syms.word(l) for l in path.output_labels()),
        total_cost=path.cost,
        feature_vector=path.weight,
        stats=stats,
        source_id=source_id,
        path=path,
    )


def _count_feature(w: FeatureWeight, fid: int, where: str) -> int:
    v = w.get(fid)
    n = round(v)
    if abs(v - n) > 1e-9 or n < 0:
        raise ContractError(f"{where}: feature {fid} holds {v!r}, expected a small count")
    return n


def decompose_alignment(path: PathWitness, model: EditCostModel) -> EditStats:
    """Classify each arc of a combined-machine path and tally the edits.

    Every arc must be a match, a free UNK fill, an in-vocabulary UNK fill,
    some other edit, or splice plumbing, and its count features must agree
    with that classification; anything else means the path was not
    produced with this model and raises.
    """
    ext = type2 = type3 = 0
    for arc in path.arcs:
        il, ol = arc.ilabel, arc.olabel
        f_edit = _count_feature(arc.weight, EDIT_COUNT, f"arc {il}:{ol}")
        f_sub = _count_feature(arc.weight, SUB_COUNT, f"arc {il}:{ol}")
        f_ext = _count_feature(arc.weight, UNK_EXT_COUNT, f"arc {il}:{ol}")
        if ol == UNK:
            raise ContractError("arc emits UNK on the output tape; not produced by this model")
        if il == UNK:
            if f_ext > 1:
                raise ContractError("arc carries more than one run-extension count")
            expected = (1, 0) if ol == EPSILON else ((0, 1) if model.in_vocab(ol) else (0, 0))
        else:
            if f_ext != 0:
                raise ContractError("run-extension count on a non-UNK arc")
            if il == ol:  # epsilon:epsilon splice plumbing or a plain match
                expected = (0, 0)
            else:
                expected = (1, 0)
        if (f_edit, f_sub) != expected:
            raise ContractError(
                f"arc {il}:{ol} carries counts edit={f_edit}, sub={f_sub}; "
                f"expected edit={expected[0]}, sub={expected[1]} under this model")
        ext += f_ext
        type2 += f_sub
        type3 += f_edit
    for fid in (EDIT_COUNT, SUB_COUNT, UNK_EXT_COUNT):
        if _count_feature(path.final_weight, fid, "final weight") != 0:
            raise ContractError("final weight carries edit counts; not produced by this model")
    return EditStats(unk_extensions=ext, type2_subs=type2, type3_edits=type3)


@dataclass(frozen=True)
class CorpusReport:
    """Corpus-level aggregation of per-sentence combination outcomes."""

    num_sentences: int
    avg_unk_extensions: float
    avg_type2_subs: float
    avg_type3_edits: float
    pct_unk_extensions: float
    pct_type2_subs: float
    pct_type3_edits: float
    pct_exact_match: float
    pct_hiero_unchanged: float
    nbest_membership: tuple[tuple[int, float], ...]

    def to_key_value_lines(self) -> list[str]:
        lines = [
            f"num_sentences={self.num_sentences}",
            f"avg_unk_extensions={_fmt(self.avg_unk_extensions)}",
            f"pct_unk_extensions={_fmt(self.pct_unk_extensions)}",
            f"avg_type2_subs={_fmt(self.avg_type2_subs)}",
            f"pct_type2_subs={_fmt(self.pct_type2_subs)}",
            f"avg_type3_edits={_fmt(self.avg_type3_edits)}",
            f"pct_type3_edits={_fmt(self.pct_type3_edits)}",
            f"pct_exact_match={_fmt(self.pct_exact_match)}",
            f"pct_hiero_unchanged={_fmt(self.pct_hiero_unchanged)}",
        ]
        lines.extend(f"pct_hiero_in_{n}best={_fmt(pct)}" for n, pct in self.nbest_membership)
        return lines

    def to_tsv_lines(self) -> list[str]:
        lines = ["measure\tavg_per_sentence\tpct_affected"]
        lines.append(f"unk_extensions\t{_fmt(self.avg_unk_extensions)}\t{_fmt(self.pct_unk_extensions)}")
        lines.append(f"type2_subs\t{_fmt(self.avg_type2_subs)}\t{_fmt(self.pct_type2_subs)}")
        lines.append(f"type3_edits\t{_fmt(self.avg_type3_edits)}\t{_fmt(self.pct_type3_edits)}")
        lines.append(f"exact_match\t-\t{_fmt(self.pct_exact_match)}")
        lines.append(f"hiero_unchanged\t-\t{_fmt(self.pct_hiero_unchanged)}")
        for n, pct in self.nbest_membership:
            lines.append(f"hiero_in_{n}best\t-\t{_fmt(pct)}")
        return lines


def corpus_report(results: Sequence[CombinationResult], hiero_lattices: Sequence[Wfst],
                  n_values: Sequence[int] = (1, 10, 100)) -> CorpusReport:
    """Aggregate edit statistics and hiero-side selection behavior.

    Reports, per edit class, the average count per sentence and the
    percentage of sentences with a nonzero count; the percentage of
    sentences whose selected hiero hypothesis is the hiero 1-best; and,
    for each n, the percentage of sentences whose selected hiero
    hypothesis appears among the n cheapest unique hiero strings.
    """
    if not results:
        raise ContractError("corpus report needs at least one result")
    if len(results) != len(hiero_lattices):
        raise ContractError("need exactly one hiero lattice per result")
    total = len(results)

    def avg(getter) -> float:
        return sum(getter(r) for r in results) / total

    def pct(predicate) -> float:
        return 100.0 * sum(1 for r in results if predicate(r)) / total

    unchanged = 0
    hits = {n: 0 for n in n_values}
    for result, lattice in zip(results, hiero_lattices):
        one_best = shortest_path(lattice, HIERO_ONLY)
        words = tuple(lattice.osyms.word(l) for l in one_best.output_labels())
        if words == result.t_hiero:
            unchanged += 1
        for n in n_values:
            candidates = nbest(lattice, n, HIERO_ONLY, unique=True)
            strings = {tuple(lattice.osyms.word(l) for l in p.output_labels()) for p in candidates}
            if result.t_hiero in strings:
                hits[n] += 1

    return CorpusReport(
        num_sentences=total,
        avg_unk_extensions=avg(lambda r: r.stats.unk_extensions),
        avg_type2_subs=avg(lambda r: r.stats.type2_subs),
        avg_type3_edits=avg(lambda r: r.stats.type3_edits),
        pct_unk_extensions=pct(lambda r: r.stats.unk_extensions > 0),
        pct_type2_subs=pct(lambda r: r.stats.type2_subs > 0),
        pct_type3_edits=pct(lambda r: r.stats.type3_edits > 0),
        pct_exact_match=pct(lambda r: r.stats.exact_match),
        pct_hiero_unchanged=100.0 * unchanged / total,
        nbest_membership=tuple((n, 100.0 * hits[n] / total) for n in n_values),
    )
