"""Shared fixtures and independent oracles for the test suite.

The expensive tau=1000 integrations run once per session and are reused by
the acceptance tests. Oracle helpers here deliberately avoid the package's
own vectorized code paths: energies come from a plain Python loop and dense
Hamiltonians from Kronecker products.
"""

from __future__ import annotations

import numpy as np
import pytest

import qa_fairsample as qf
from qa_fairsample.data import toy_embedding_path, toy_source_path

STANDARD_JFS = (0.5, 1.0, 1.5)

# Small models for brute-force cross-checks (N <= 4).
FIXTURE_MODELS = {
    "ferro2": qf.IsingModel(2, ((0, 1, 1.0),)),
    "triangle3": qf.IsingModel(3, ((0, 1, 1.0), (0, 2, 1.0), (1, 2, -1.0))),
    "frustrated_square4": qf.IsingModel(
        4, ((0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, -1.0))
    ),
    "afm_chain4": qf.IsingModel(4, ((0, 1, -1.0), (1, 2, -1.0), (2, 3, -1.0))),
    "single_spin_field": qf.IsingModel(1, (), fields=(0.5,)),
    "pinned_pair": qf.IsingModel(2, ((0, 1, 1.0),), fields=(0.5, 0.0)),
}


def brute_energy(model: qf.IsingModel, bits: int) -> float:
    """Independent energy oracle: direct loop over couplings and fields."""
    spins = [1 if (bits >> i) & 1 else -1 for i in range(model.num_spins)]
    e = -sum(J * spins[i] * spins[j] for i, j, J in model.couplings)
    e -= sum(h * s for h, s in zip(model.fields, spins))
    return e


def brute_ground_bits(model: qf.IsingModel) -> tuple[float, list[int]]:
    """Independent exhaustive minimizer."""
    energies = [brute_energy(model, b) for b in range(1 << model.num_spins)]
    e0 = min(energies)
    return e0, [b for b, e in enumerate(energies) if e <= e0 + 1e-12 * max(1.0, abs(e0))]


_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
_ID = np.eye(2)


def _site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    # Convention: bit i of the basis index selects the state of spin i, so
    # spin i's operator sits at Kronecker slot n-1-i.
    mats = [_ID] * n
    mats[n - 1 - site] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def dense_target(model: qf.IsingModel) -> np.ndarray:
    """H_0 as a dense matrix built from Kronecker products (sign: bit set = up)."""
    n = model.num_spins
    # bit set means spin up (+1): diag of sigma_z must be (-1, +1) over (bit 0, bit 1)
    sz = -_SZ
    dim = 1 << n
    h = np.zeros((dim, dim))
    for i, j, J in model.couplings:
        zi = _site_operator(sz, i, n)
        zj = _site_operator(sz, j, n)
        h -= J * (zi @ zj)
    for i, hi in enumerate(model.fields):
        if hi:
            h -= hi * _site_operator(sz, i, n)
    return h


def dense_driver(n: int) -> np.ndarray:
    """-sum_i X_i as a dense matrix."""
    dim = 1 << n
    h = np.zeros((dim, dim))
    for i in range(n):
        h -= _site_operator(_SX, i, n)
    return h


def dense_annealing_hamiltonian(model: qf.IsingModel, s: float) -> np.ndarray:
    return (1.0 - s) * dense_driver(model.num_spins) + s * dense_target(model)


@pytest.fixture(scope="session")
def toy_source() -> qf.IsingModel:
    return qf.load_model(toy_source_path())


@pytest.fixture(scope="session")
def toy_template() -> qf.Embedding:
    return qf.load_embedding(toy_embedding_path(), chain_strength=1.0)


@pytest.fixture(scope="session")
def toy_manifold(toy_source) -> qf.GroundManifold:
    return qf.enumerate_ground_states(toy_source)


@pytest.fixture(scope="session")
def embedded_models(toy_source, toy_template) -> dict[float, qf.EmbeddedModel]:
    return {
        jf: qf.apply_embedding(toy_source, toy_template.with_chain_strength(jf))
        for jf in STANDARD_JFS
    }


@pytest.fixture(scope="session")
def embedded_runs_tau1000(embedded_models) -> dict[float, qf.EvolutionResult]:
    """One batched integration of all three chain strengths at tau = 1000."""
    models = [embedded_models[jf].model for jf in STANDARD_JFS]
    schedule = qf.AnnealSchedule.for_tau(1000.0)
    results = qf.evolve_many(models, schedule)
    return dict(zip(STANDARD_JFS, results))


@pytest.fixture(scope="session")
def source_run_tau1000(toy_source) -> qf.EvolutionResult:
    return qf.evolve(toy_source, qf.AnnealSchedule.for_tau(1000.0))
