"""Degenerate perturbation theory around the end of the anneal.

Near t = tau the driver acts as a small perturbation V = -sum_i X_i on the
diagonal target. Within the d-fold degenerate ground manifold the first-order
effective matrix has entries <m|V|n> = -1 exactly when m and n differ by one
spin flip. If its minimal eigenvalue stays degenerate (beyond a single
inversion doublet), the second-order effective matrix

    W_mn = sum_k <m|V|k><k|V|n> / (E_0 - E_k)

decides the outcome, where k runs over excited configurations one flip away
from both m and n. Asymptotic sampling probabilities are the squared
components of the eigenvector for the minimal eigenvalue of the effective
matrix in the resolved subspace.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .embed import BROKEN_CHAIN, apply_embedding, load_embedding, project_state
from .model import (
    GroundManifold,
    IsingModel,
    SpinConfiguration,
    energy_table,
    enumerate_ground_states,
    hamming_distance,
    load_model,
)

# Eigenvalues closer than this are treated as degenerate; toy-model spectra
# are rational with O(1) separations.
DEGENERACY_TOL = 1e-9

# Permutation matching is brute force; beyond this the factorial blows up.
_MAX_PERMUTATION_DIM = 8


@dataclass(frozen=True)
class PerturbationSetup:
    """A model together with its ground manifold, ready for PT analysis."""

    model: IsingModel
    manifold: GroundManifold

    @classmethod
    def from_model(cls, model: IsingModel) -> "PerturbationSetup":
        return cls(model=model, manifold=enumerate_ground_states(model))

    def driver_element(self, a: SpinConfiguration, b: SpinConfiguration) -> float:
        """<a|V|b> for the transverse-field driver: -1 at Hamming distance 1."""
        return -1.0 if hamming_distance(a, b) == 1 else 0.0


@dataclass(frozen=True, eq=False)
class EffectiveMatrix:
    """Real symmetric effective matrix over an ordered configuration basis."""

    order: int
    basis: tuple[SpinConfiguration, ...]
    entries: np.ndarray


@dataclass(frozen=True, eq=False)
class PTResult:
    resolved_order: int
    minimal_eigenvalue: float
    multiplicity: int
    probabilities: dict[SpinConfiguration, float]
    folded_probabilities: dict[SpinConfiguration, float]


def first_order_matrix(setup: PerturbationSetup) -> EffectiveMatrix:
    """P1 V P1: entry (m, n) is -1 iff the configs differ by one flip, else 0."""
    configs = setup.manifold.configs
    d = len(configs)
    entries = np.zeros((d, d))
    for a in range(d):
        for b in range(a + 1, d):
            if hamming_distance(configs[a], configs[b]) == 1:
                entries[a, b] = entries[b, a] = -1.0
    entries.setflags(write=False)
    return EffectiveMatrix(order=1, basis=configs, entries=entries)


def second_order_matrix(
    setup: PerturbationSetup,
    subspace: Sequence[SpinConfiguration] | None = None,
) -> EffectiveMatrix:
    """P2 W P2 over the given configs (defaults to the whole manifold).

    Intermediates k are excluded from the manifold by the Q projector, so
    every denominator E_0 - E_k is strictly negative; only configs one flip
    from both endpoints contribute, which keeps the sum at O(d*N) terms.
    """
    basis = tuple(subspace) if subspace is not None else setup.manifold.configs
    man_bits = setup.manifold.bits_set()
    for c in basis:
        if c.bits not in man_bits:
            raise ValueError(f"{c!r} is not a ground-manifold configuration")
    table = energy_table(setup.model)
    e0 = setup.manifold.energy
    n = setup.model.num_spins
    d = len(basis)
    entries = np.zeros((d, d))
    for a, ca in enumerate(basis):
        for b, cb in enumerate(basis):
            acc = 0.0
            for i in range(n):
                k = ca.bits ^ (1 << i)
                if k in man_bits:
                    continue
                if (k ^ cb.bits).bit_count() == 1:
                    # <ca|V|k><k|V|cb> = (-1)(-1) = 1
                    acc += 1.0 / (e0 - table[k])
            entries[a, b] = acc
    entries.setflags(write=False)
    return EffectiveMatrix(order=2, basis=basis, entries=entries)


def fold_by_inversion(
    probabilities: dict[SpinConfiguration, float],
) -> dict[SpinConfiguration, float]:
    """Merge each configuration's probability with its global spin inversion.

    Keys of the result are class representatives: the smaller bits value of
    each (config, inverted config) pair.
    """
    folded: dict[SpinConfiguration, float] = {}
    for config, p in probabilities.items():
        rep = min(config, config.inverted())
        folded[rep] = folded.get(rep, 0.0) + p
    return folded


def _is_inversion_doublet(setup: PerturbationSetup, u: np.ndarray) -> bool:
    """True when a 2-dim eigenspace maps onto itself under global spin flip."""
    if u.shape[1] != 2 or setup.model.has_fields:
        return False
    configs = setup.manifold.configs
    position = {c.bits: k for k, c in enumerate(configs)}
    mask = (1 << setup.model.num_spins) - 1
    perm = [position.get(c.bits ^ mask) for c in configs]
    if any(p is None for p in perm):
        return False
    proj = u @ u.T
    return bool(np.abs(proj[np.ix_(perm, perm)] - proj).max() < DEGENERACY_TOL)


def perturbative_probabilities(setup: PerturbationSetup) -> PTResult:
    """Asymptotic sampling probabilities over the ground manifold.

    Resolution order: diagonalize the first-order matrix; stop there if its
    minimal eigenvalue is non-degenerate (a single inversion doublet counts
    as resolved). Otherwise project W onto the minimal first-order eigenspace
    and diagonalize again. If the final minimal eigenvalue keeps multiplicity
    g > 1, probabilities are the diagonal of the eigenspace projector divided
    by g, which reduces to squared eigenvector components at g = 1.
    """
    configs = setup.manifold.configs
    m1 = first_order_matrix(setup)
    vals, vecs = np.linalg.eigh(m1.entries)
    u = vecs[:, vals <= vals[0] + DEGENERACY_TOL]
    resolved_order = 1
    minimal = float(vals[0])
    span = u
    if u.shape[1] > 1 and not _is_inversion_doublet(setup, u):
        w = second_order_matrix(setup)
        projected = u.T @ w.entries @ u
        projected = 0.5 * (projected + projected.T)
        vals2, vecs2 = np.linalg.eigh(projected)
        v = vecs2[:, vals2 <= vals2[0] + DEGENERACY_TOL]
        span = u @ v
        resolved_order = 2
        minimal = float(vals2[0])
    multiplicity = span.shape[1]
    weights = (span ** 2).sum(axis=1) / multiplicity
    probabilities = {c: float(p) for c, p in zip(configs, weights)}
    return PTResult(
        resolved_order=resolved_order,
        minimal_eigenvalue=minimal,
        multiplicity=multiplicity,
        probabilities=probabilities,
        folded_probabilities=fold_by_inversion(probabilities),
    )


def embedded_toy_reference_matrix(chain_strength: float) -> np.ndarray:
    """Closed-form -P2 W P2 for the shipped embedded toy model.

    Its six ground states form a ring of second-order couplings. Off-diagonal
    elements around the ring alternate {1, 1/J_F, 1, 1, 1/J_F, 1}: the 1/J_F
    links are mediated by broken-chain intermediates at gap 2*J_F. The
    diagonal is (2J_F+5)/(J_F+2) on the two fully aligned states and
    (4J_F+3)/(3J_F) on the other four.
    """
    jf = float(chain_strength)
    a = (2.0 * jf + 5.0) / (jf + 2.0)
    b = (4.0 * jf + 3.0) / (3.0 * jf)
    ring = [1.0, 1.0 / jf, 1.0, 1.0, 1.0 / jf, 1.0]
    m = np.zeros((6, 6))
    for i, diag in enumerate([a, b, b, a, b, b]):
        m[i, i] = diag
        j = (i + 1) % 6
        m[i, j] = m[j, i] = ring[i]
    return m


def find_basis_permutation(
    a: np.ndarray, b: np.ndarray, tol: float = 1e-9
) -> tuple[int, ...] | None:
    """Permutation p with a[p][:, p] == b entrywise within tol, or None.

    Brute force over d! orderings; fine for the d <= 6 manifolds this
    package compares.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        return None
    d = a.shape[0]
    if d > _MAX_PERMUTATION_DIM:
        raise ValueError(f"permutation search limited to dimension {_MAX_PERMUTATION_DIM}")
    for perm in itertools.permutations(range(d)):
        p = np.asarray(perm)
        if np.abs(a[np.ix_(p, p)] - b).max() <= tol:
            return perm
    return None


@dataclass(frozen=True)
class ClauseResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ToyValidationReport:
    clauses: tuple[ClauseResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def failures(self) -> tuple[ClauseResult, ...]:
        return tuple(c for c in self.clauses if not c.passed)


def _matrix_str(m: np.ndarray) -> str:
    return np.array2string(np.asarray(m), precision=10, suppress_small=True)


def validate_toy_model(
    source_path: str | Path,
    embedded_path: str | Path,
    chain_strengths: Sequence[float] = (0.5, 1.0, 1.5),
) -> ToyValidationReport:
    """Cross-check the shipped toy-model data files against the closed form.

    A failed clause points at mis-read couplings or a wrong assignment of the
    chained spin's couplings: the closed-form diagonal entries encode which
    physical spin carries which couplings, so this is the arbiter for the
    data files.
    """
    clauses: list[ClauseResult] = []
    source = load_model(source_path)
    src_manifold = enumerate_ground_states(source)
    clauses.append(
        ClauseResult(
            "source_degeneracy",
            src_manifold.degeneracy == 6,
            f"expected d = 6, found d = {src_manifold.degeneracy} "
            f"at E_0 = {src_manifold.energy:g}",
        )
    )
    src_first = first_order_matrix(PerturbationSetup(source, src_manifold))
    source_nonzero = float(np.abs(src_first.entries).max()) > 0.0

    for jf in chain_strengths:
        tag = f"jf={jf:g}"
        embedding = load_embedding(embedded_path, chain_strength=jf)
        embedded = apply_embedding(source, embedding)
        man = enumerate_ground_states(embedded.model)
        unbroken = all(
            project_state(c, embedding) is not BROKEN_CHAIN for c in man.configs
        )
        clauses.append(
            ClauseResult(
                f"embedded_degeneracy_unbroken[{tag}]",
                man.degeneracy == 6 and unbroken,
                f"d = {man.degeneracy}, chains unbroken = {unbroken}",
            )
        )
        setup = PerturbationSetup(embedded.model, man)
        m1 = first_order_matrix(setup)
        max_first = float(np.abs(m1.entries).max())
        clauses.append(
            ClauseResult(
                f"embedded_first_order_zero[{tag}]",
                max_first == 0.0,
                f"max |entry| = {max_first:g}",
            )
        )
        reference = embedded_toy_reference_matrix(jf)
        built = -second_order_matrix(setup).entries
        if built.shape != reference.shape:
            perm = None
            detail = (
                f"dimension mismatch: built {built.shape}, reference {reference.shape}"
            )
        else:
            perm = find_basis_permutation(built, reference, tol=1e-9)
            if perm is None:
                detail = (
                    "no basis permutation matches within 1e-9;\nbuilt =\n"
                    f"{_matrix_str(built)}\nreference =\n{_matrix_str(reference)}"
                )
            else:
                detail = f"matched under basis permutation {perm}"
        clauses.append(
            ClauseResult(f"second_order_closed_form[{tag}]", perm is not None, detail)
        )

    clauses.append(
        ClauseResult(
            "source_first_order_nonzero",
            source_nonzero,
            "single-flip pairs inside the source manifold couple at first "
            "order, which suppresses the isolated state"
            if source_nonzero
            else "source first-order matrix is zero",
        )
    )
    return ToyValidationReport(clauses=tuple(clauses))
