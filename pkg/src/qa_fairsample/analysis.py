"""Fairness metrics, gap-ratio analysis, and parameter sweeps.

Folded probabilities merge each configuration with its global spin inversion;
the fairness ratio compares the mean folded probability of a suppressed set S
against a connected set C, so perfectly fair sampling gives exactly 1.
Sweeps emit one record per (model, parameter value, method) and can be
serialized to CSV with a fixed column order.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .embed import BROKEN_CHAIN, Embedding, apply_embedding, lift_state, project_state
from .errors import UndefinedRatioError
from .evolve import DRIFT_BUDGET, AnnealSchedule, EvolutionResult, evolve_many
from .model import (
    GroundManifold,
    IsingModel,
    SpinConfiguration,
    energy_table,
    enumerate_ground_states,
    hamming_distance,
)
from .pt import PerturbationSetup, fold_by_inversion, perturbative_probabilities


def inversion_classes(
    manifold: GroundManifold,
) -> tuple[tuple[SpinConfiguration, ...], ...]:
    """Ground configs grouped into inversion classes, ordered by representative.

    The representative of a class is its smallest bits value.
    """
    groups: dict[SpinConfiguration, list[SpinConfiguration]] = {}
    for c in manifold.configs:
        rep = min(c, c.inverted())
        groups.setdefault(rep, []).append(c)
    return tuple(tuple(sorted(groups[rep])) for rep in sorted(groups))


@dataclass(frozen=True)
class FairnessPartition:
    """Disjoint ground-state sets S and C; members are configs or class reps."""

    s_set: tuple[SpinConfiguration, ...]
    c_set: tuple[SpinConfiguration, ...]

    def __post_init__(self):
        object.__setattr__(self, "s_set", tuple(sorted(self.s_set)))
        object.__setattr__(self, "c_set", tuple(sorted(self.c_set)))
        if not self.s_set or not self.c_set:
            raise ValueError("both partition sets must be non-empty")
        if set(self.s_set) & set(self.c_set):
            raise ValueError("partition sets must be disjoint")

    @classmethod
    def from_class_indices(
        cls,
        manifold: GroundManifold,
        s_indices: Sequence[int],
        c_indices: Sequence[int] | None = None,
    ) -> "FairnessPartition":
        classes = inversion_classes(manifold)
        reps = [group[0] for group in classes]
        s = tuple(reps[i] for i in s_indices)
        if c_indices is None:
            c = tuple(r for i, r in enumerate(reps) if i not in set(s_indices))
        else:
            c = tuple(reps[i] for i in c_indices)
        return cls(s_set=s, c_set=c)


def default_partition(manifold: GroundManifold) -> FairnessPartition:
    """S = the first inversion class, C = all others."""
    return FairnessPartition.from_class_indices(manifold, (0,))


def fairness_ratio(
    folded: Mapping[SpinConfiguration, float], partition: FairnessPartition
) -> float:
    """mean_S P / mean_C P over folded class probabilities.

    Returns 0 when the S mean vanishes and +inf when only the C mean does;
    both vanishing is undefined and raises.
    """
    allowed = set(partition.s_set) | set(partition.c_set)
    stray = [c for c in folded if c not in allowed]
    if stray:
        raise ValueError(f"folded map holds classes outside the partition: {stray}")
    s_mean = sum(folded.get(c, 0.0) for c in partition.s_set) / len(partition.s_set)
    c_mean = sum(folded.get(c, 0.0) for c in partition.c_set) / len(partition.c_set)
    if c_mean == 0.0:
        if s_mean == 0.0:
            raise UndefinedRatioError("both partition sets carry zero probability")
        return math.inf
    return s_mean / c_mean


def _partition_side(config: SpinConfiguration, partition: FairnessPartition) -> str:
    """Resolve membership by exact config first, then by inversion-class rep."""
    if config in partition.s_set:
        return "S"
    if config in partition.c_set:
        return "C"
    rep = min(config, config.inverted())
    if rep in partition.s_set:
        return "S"
    if rep in partition.c_set:
        return "C"
    raise ValueError(f"{config!r} is not covered by the partition")


@dataclass(frozen=True)
class GapReport:
    """Mean energy gaps of the intermediates mediating second-order connections.

    For each ground state g the mediating intermediates are the excited
    configurations one flip from g and one flip from some other ground state;
    their gaps E_k - E_0 are exactly the denominators of the second-order
    effective matrix. States with no mediating intermediate are excluded from
    the set means and listed.
    """

    per_state: dict[SpinConfiguration, float]
    per_pair: dict[tuple[SpinConfiguration, SpinConfiguration], tuple[float, ...]]
    delta_e_s: float
    delta_e_c: float
    ratio: float
    excluded: tuple[SpinConfiguration, ...]


def gap_ratio(
    model: IsingModel, manifold: GroundManifold, partition: FairnessPartition
) -> GapReport:
    if manifold.degeneracy < 2:
        raise ValueError("gap analysis needs a degenerate manifold")
    table = energy_table(model)
    e0 = manifold.energy
    man_bits = manifold.bits_set()

    per_pair: dict[tuple[SpinConfiguration, SpinConfiguration], tuple[float, ...]] = {}
    configs = manifold.configs
    for a in range(len(configs)):
        for b in range(a + 1, len(configs)):
            if hamming_distance(configs[a], configs[b]) != 2:
                continue
            gaps = []
            for i in range(model.num_spins):
                k = configs[a].bits ^ (1 << i)
                if k in man_bits:
                    continue
                if (k ^ configs[b].bits).bit_count() == 1:
                    gaps.append(float(table[k] - e0))
            if gaps:
                per_pair[(configs[a], configs[b])] = tuple(gaps)
    if not per_pair:
        raise ValueError("no second-order connections inside the manifold")

    per_state: dict[SpinConfiguration, float] = {}
    excluded = []
    for g in configs:
        gaps = []
        for i in range(model.num_spins):
            k = g.bits ^ (1 << i)
            if k in man_bits:
                continue
            mediates = any(
                (k ^ other.bits).bit_count() == 1
                for other in configs
                if other.bits != g.bits
            )
            if mediates:
                gaps.append(float(table[k] - e0))
        if gaps:
            per_state[g] = sum(gaps) / len(gaps)
        else:
            excluded.append(g)

    side_gaps = {"S": [], "C": []}
    for g, mean_gap in per_state.items():
        side_gaps[_partition_side(g, partition)].append(mean_gap)
    if not side_gaps["S"] or not side_gaps["C"]:
        raise ValueError("a partition set has no state with mediating intermediates")
    delta_s = sum(side_gaps["S"]) / len(side_gaps["S"])
    delta_c = sum(side_gaps["C"]) / len(side_gaps["C"])
    return GapReport(
        per_state=per_state,
        per_pair=per_pair,
        delta_e_s=delta_s,
        delta_e_c=delta_c,
        ratio=delta_s / delta_c,
        excluded=tuple(excluded),
    )


def fold_ground_probabilities(
    probabilities: Mapping[SpinConfiguration, float], manifold: GroundManifold
) -> tuple[dict[SpinConfiguration, float], float]:
    """Fold a measurement distribution onto ground classes; rest is excited weight."""
    ground = {c: p for c, p in probabilities.items() if c in manifold.configs}
    folded = fold_by_inversion(ground)
    excited = 1.0 - sum(ground.values())
    return folded, excited


def project_and_fold(
    probabilities: Mapping[SpinConfiguration, float],
    embedding: Embedding,
    source_manifold: GroundManifold,
) -> tuple[dict[SpinConfiguration, float], float]:
    """Project physical probabilities onto logical ground classes.

    Broken-chain weight counts as excited and is never redistributed, as do
    intact projections landing outside the source manifold.
    """
    logical: dict[SpinConfiguration, float] = {}
    ground_weight = 0.0
    for config, p in probabilities.items():
        projected = project_state(config, embedding)
        if projected is BROKEN_CHAIN or projected not in source_manifold.configs:
            continue
        logical[projected] = logical.get(projected, 0.0) + p
        ground_weight += p
    return fold_by_inversion(logical), 1.0 - ground_weight


@dataclass(frozen=True)
class SweepRecord:
    """One row of a parameter sweep."""

    model: str
    parameter: str
    value: float
    method: str
    folded: dict[SpinConfiguration, float] | None
    ratio: float | None
    gap_ratio: float | None
    excited_weight: float | None
    norm_drift: float | None
    error: str | None = None


def _se_record(
    label: str,
    parameter: str,
    value: float,
    result: EvolutionResult,
    folded: dict[SpinConfiguration, float],
    excited: float,
    partition: FairnessPartition,
    gap: float | None = None,
) -> SweepRecord:
    if result.norm_drift > DRIFT_BUDGET:
        return SweepRecord(
            model=label,
            parameter=parameter,
            value=value,
            method="SE",
            folded=None,
            ratio=None,
            gap_ratio=gap,
            excited_weight=None,
            norm_drift=result.norm_drift,
            error=f"norm drift {result.norm_drift:.3e} exceeds the "
            f"{DRIFT_BUDGET:.0e} budget",
        )
    return SweepRecord(
        model=label,
        parameter=parameter,
        value=value,
        method="SE",
        folded=folded,
        ratio=fairness_ratio(folded, partition),
        gap_ratio=gap,
        excited_weight=excited,
        norm_drift=result.norm_drift,
    )


def sweep_tau(
    source: IsingModel,
    embeddings: Sequence[tuple[str, Embedding]],
    taus: Sequence[float],
    *,
    partition: FairnessPartition | None = None,
    steps: int | None = None,
) -> list[SweepRecord]:
    """Annealing-time sweep over the source model and its embedded variants.

    Row order is deterministic: for each tau (ascending), the source row
    first, then one row per embedding in the given order.
    """
    if not taus:
        raise ValueError("tau grid must be non-empty")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("tau grid must be strictly ascending")
    source_manifold = enumerate_ground_states(source)
    if partition is None:
        partition = default_partition(source_manifold)
    embedded = [(label, apply_embedding(source, e)) for label, e in embeddings]

    records = []
    for tau in taus:
        schedule = AnnealSchedule.for_tau(tau, steps)
        src_result = evolve_many((source,), schedule, enforce_drift=False)[0]
        folded, excited = fold_ground_probabilities(
            src_result.final_probabilities, source_manifold
        )
        records.append(
            _se_record("original", "tau", tau, src_result, folded, excited, partition)
        )

        models = [em.model for _, em in embedded]
        by_size: dict[int, list[int]] = {}
        for idx, m in enumerate(models):
            by_size.setdefault(m.num_spins, []).append(idx)
        results: dict[int, EvolutionResult] = {}
        for indices in by_size.values():
            batch = evolve_many(
                [models[i] for i in indices], schedule, enforce_drift=False
            )
            results.update(zip(indices, batch))
        for idx, (label, em) in enumerate(embedded):
            result = results[idx]
            folded, excited = project_and_fold(
                result.final_probabilities, em.embedding, source_manifold
            )
            records.append(
                _se_record(label, "tau", tau, result, folded, excited, partition)
            )
    return records


def sweep_chain_strength(
    source: IsingModel,
    embedding_template: Embedding,
    chain_strengths: Sequence[float],
    *,
    tau: float = 1000.0,
    steps: int | None = None,
    methods: Sequence[str] = ("PT", "SE"),
    partition: FairnessPartition | None = None,
) -> list[SweepRecord]:
    """Chain-strength sweep: PT and direct-evolution rows per J_F, plus gap ratios.

    Rows come out grouped by J_F in the given order, PT before SE, with the
    gap ratio repeated on both rows of each J_F.
    """
    if any(jf <= 0 for jf in chain_strengths):
        raise ValueError("every chain strength must be positive")
    unknown = set(methods) - {"PT", "SE"}
    if unknown:
        raise ValueError(f"unknown methods: {sorted(unknown)}")
    source_manifold = enumerate_ground_states(source)
    if partition is None:
        partition = default_partition(source_manifold)

    variants = []
    for jf in chain_strengths:
        embedding = embedding_template.with_chain_strength(jf)
        variants.append((jf, apply_embedding(source, embedding)))

    se_results: dict[float, EvolutionResult] = {}
    if "SE" in methods:
        schedule = AnnealSchedule.for_tau(tau, steps)
        batch = evolve_many(
            [em.model for _, em in variants], schedule, enforce_drift=False
        )
        se_results = {jf: r for (jf, _), r in zip(variants, batch)}

    records = []
    for jf, em in variants:
        label = f"embedded[jf={jf:g}]"
        physical_manifold = enumerate_ground_states(em.model)
        physical_partition = _lift_partition(partition, em.embedding)
        gap = gap_ratio(em.model, physical_manifold, physical_partition).ratio

        if "PT" in methods:
            pt_result = perturbative_probabilities(
                PerturbationSetup(em.model, physical_manifold)
            )
            folded, excited = project_and_fold(
                pt_result.probabilities, em.embedding, source_manifold
            )
            records.append(
                SweepRecord(
                    model=label,
                    parameter="jf",
                    value=jf,
                    method="PT",
                    folded=folded,
                    ratio=fairness_ratio(folded, partition),
                    gap_ratio=gap,
                    excited_weight=excited,
                    norm_drift=None,
                )
            )
        if "SE" in methods:
            result = se_results[jf]
            folded, excited = project_and_fold(
                result.final_probabilities, em.embedding, source_manifold
            )
            records.append(
                _se_record(label, "jf", jf, result, folded, excited, partition, gap)
            )
    return records


def _lift_partition(
    partition: FairnessPartition, embedding: Embedding
) -> FairnessPartition:
    """Map logical class representatives to physical ones through the chains."""

    def lift_rep(config: SpinConfiguration) -> SpinConfiguration:
        lifted = lift_state(config, embedding)
        return min(lifted, lifted.inverted())

    return FairnessPartition(
        s_set=tuple(lift_rep(c) for c in partition.s_set),
        c_set=tuple(lift_rep(c) for c in partition.c_set),
    )


def _format_cell(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.12g}"


def write_sweep_csv(records: Sequence[SweepRecord], path: str | Path) -> None:
    """Write sweep records with a fixed column order, atomically.

    Columns: model, parameter, method, P_1..P_k (folded classes ascending by
    representative), ratio_PS_PC, gap_ratio, excited_weight, norm_drift.
    The parameter column holds the swept value.
    """
    reps = sorted({rep for r in records if r.folded for rep in r.folded})
    path = Path(path)
    header = (
        ["model", "parameter", "method"]
        + [f"P_{i + 1}" for i in range(len(reps))]
        + ["ratio_PS_PC", "gap_ratio", "excited_weight", "norm_drift"]
    )
    fd, tmp_name = tempfile.mkstemp(dir=path.parent or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for r in records:
                cells = [r.model, _format_cell(r.value), r.method]
                for rep in reps:
                    folded_p = r.folded.get(rep) if r.folded else None
                    cells.append(_format_cell(folded_p))
                cells.append(_format_cell(r.ratio))
                cells.append(_format_cell(r.gap_ratio))
                cells.append(_format_cell(r.excited_weight))
                cells.append(_format_cell(r.norm_drift))
                writer.writerow(cells)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
