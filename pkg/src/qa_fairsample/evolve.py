"""Direct integration of the annealing Schrödinger equation.

The Hamiltonian interpolates linearly between the transverse-field driver and
the diagonal target,

    H(t) = -(1 - t/tau) * sum_i X_i + (t/tau) * H_0,      hbar = 1,

and the state starts in the driver ground state (uniform superposition).
Integration uses classical fixed-step RK4 on the full 2^N state vector, with
the Hamiltonian applied matrix-free: the diagonal term scales each amplitude
by its configuration energy, and the driver term sums the amplitudes of all
single-spin-flip neighbors through precomputed per-spin index columns.

Batches of same-size models evolve together as rows of one array; every
operation is row-independent, so results are bitwise identical whether models
run alone, batched, or chunked (the QA_FAIRSAMPLE_THREADS environment
variable caps the chunk width used by sweeps).
"""

from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import IntegrationAccuracyError, ModelTooLargeError
from .model import MAX_SPINS, IsingModel, SpinConfiguration, energy_table

# Maximum tolerated |1 - norm^2| of the final state at default steps.
DRIFT_BUDGET = 1e-6

CHUNK_ENV_VAR = "QA_FAIRSAMPLE_THREADS"


def default_steps(tau: float) -> int:
    """Step count giving dt = min(0.005, tau/1000).

    dt = 0.005 keeps the RK4 norm drift of the shipped toy models below the
    1e-6 budget even at tau = 1000 (dt = 0.01 overshoots it by ~15x).
    """
    return max(1000, math.ceil(200.0 * tau))


@dataclass(frozen=True)
class AnnealSchedule:
    """Total annealing time and uniform step count; weights are fixed linear.

    tau = 0 is allowed as a degenerate edge: no time passes and the final
    state equals the initial uniform superposition exactly.
    """

    tau: float
    steps: int

    def __post_init__(self):
        if self.tau < 0.0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")

    @classmethod
    def for_tau(cls, tau: float, steps: int | None = None) -> "AnnealSchedule":
        return cls(tau=tau, steps=default_steps(tau) if steps is None else steps)

    @property
    def dt(self) -> float:
        return self.tau / self.steps


@dataclass(frozen=True)
class EvolutionResult:
    """Final-time measurement distribution of one annealing run.

    ``final_probabilities`` is renormalized; ``norm_squared`` is the raw
    squared norm before renormalization and ``norm_drift`` = |1 - norm_squared|.
    """

    final_probabilities: Mapping[SpinConfiguration, float]
    norm_drift: float
    tau: float
    steps: int
    norm_squared: float


@dataclass(frozen=True)
class ConvergenceReport:
    """Step-doubling study: probability change between steps and 2*steps."""

    tau: float
    steps: int
    max_probability_difference: float
    flagged: bool


def initial_state(num_spins: int) -> np.ndarray:
    """Uniform superposition 2^(-N/2) on every configuration: the driver ground state."""
    if num_spins > MAX_SPINS:
        raise ModelTooLargeError(
            f"{num_spins} spins exceeds the size guard of {MAX_SPINS}"
        )
    dim = 1 << num_spins
    return np.full(dim, dim ** -0.5, dtype=np.complex128)


@functools.lru_cache(maxsize=32)
def _flip_columns(num_spins: int) -> tuple[np.ndarray, ...]:
    """Per-spin index arrays: column i maps configuration c to c with spin i flipped."""
    indices = np.arange(1 << num_spins, dtype=np.intp)
    columns = []
    for i in range(num_spins):
        col = indices ^ (1 << i)
        col.setflags(write=False)
        columns.append(col)
    return tuple(columns)


def _flip_sum(y: np.ndarray, columns: tuple[np.ndarray, ...]) -> np.ndarray:
    """sum_i y[..., flip spin i], accumulated in fixed spin order.

    Plain elementwise adds keep the floating-point order identical for every
    batch width, which a reduction over a gathered axis does not guarantee.
    """
    acc = y[..., columns[0]]
    for col in columns[1:]:
        acc += y[..., col]
    return acc


def apply_hamiltonian(model: IsingModel, s: float, psi: np.ndarray) -> np.ndarray:
    """Apply H(s) = -(1-s) sum_i X_i + s H_0 to a state vector, matrix-free."""
    e = energy_table(model)
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != e.shape:
        raise ValueError(
            f"state has dimension {psi.shape}, model needs {e.shape}"
        )
    columns = _flip_columns(model.num_spins)
    return (s * e) * psi - (1.0 - s) * _flip_sum(psi, columns)


def _chunk_width(count: int) -> int:
    raw = os.environ.get(CHUNK_ENV_VAR)
    if raw is None:
        return count
    width = int(raw)
    if width < 1:
        raise ValueError(f"{CHUNK_ENV_VAR} must be a positive integer, got {raw!r}")
    return min(width, count)


def _rk4_probabilities(
    tables: np.ndarray, num_spins: int, tau: float, steps: int
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate a batch of diagonal tables; returns (|psi|^2 rows, norm^2 rows)."""
    columns = _flip_columns(num_spins)
    dim = 1 << num_spins
    batch = tables.shape[0]
    psi = np.full((batch, dim), dim ** -0.5, dtype=np.complex128)
    dt = tau / steps

    def rhs(s, y):
        # -i H(s) y; each output row depends only on its own input row.
        return -1j * ((s * tables) * y - (1.0 - s) * _flip_sum(y, columns))

    if dt > 0.0:
        for k in range(steps):
            t = k * dt
            s0 = t / tau
            s_half = (t + 0.5 * dt) / tau
            s1 = (t + dt) / tau
            k1 = rhs(s0, psi)
            k2 = rhs(s_half, psi + (0.5 * dt) * k1)
            k3 = rhs(s_half, psi + (0.5 * dt) * k2)
            k4 = rhs(s1, psi + dt * k3)
            psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    weights = np.abs(psi) ** 2
    norm_sq = weights.sum(axis=1)
    return weights, norm_sq


def evolve_many(
    models: Sequence[IsingModel],
    schedule: AnnealSchedule,
    *,
    enforce_drift: bool = True,
) -> list[EvolutionResult]:
    """Evolve several same-size models under one schedule as a single batch.

    With ``enforce_drift`` the call raises IntegrationAccuracyError if any
    row's norm drift exceeds the budget; sweeps disable it and handle drift
    row by row. All results are attached to the raised error.
    """
    if not models:
        return []
    num_spins = models[0].num_spins
    if any(m.num_spins != num_spins for m in models):
        raise ValueError("all models in a batch must have the same spin count")
    if num_spins > MAX_SPINS:
        raise ModelTooLargeError(
            f"{num_spins} spins exceeds the size guard of {MAX_SPINS}"
        )

    tables = np.stack([energy_table(m) for m in models])
    width = _chunk_width(len(models))
    weight_rows = []
    norm_rows = []
    for start in range(0, len(models), width):
        w, n = _rk4_probabilities(
            tables[start : start + width], num_spins, schedule.tau, schedule.steps
        )
        weight_rows.append(w)
        norm_rows.append(n)
    weights = np.concatenate(weight_rows)
    norm_sq = np.concatenate(norm_rows)

    results = []
    for w, n2 in zip(weights, norm_sq):
        probs = w / n2
        mapping = {
            SpinConfiguration(c, num_spins): float(p) for c, p in enumerate(probs)
        }
        results.append(
            EvolutionResult(
                final_probabilities=mapping,
                norm_drift=float(abs(1.0 - n2)),
                tau=schedule.tau,
                steps=schedule.steps,
                norm_squared=float(n2),
            )
        )

    if enforce_drift:
        bad = [r for r in results if r.norm_drift > DRIFT_BUDGET]
        if bad:
            worst = max(r.norm_drift for r in bad)
            err = IntegrationAccuracyError(
                f"norm drift {worst:.3e} exceeds the {DRIFT_BUDGET:.0e} budget; "
                f"rerun with more steps (e.g. {2 * schedule.steps})",
                result=results if len(results) > 1 else results[0],
            )
            raise err
    return results


def evolve(model: IsingModel, schedule: AnnealSchedule) -> EvolutionResult:
    """Integrate one model from t=0 to t=tau and report final probabilities."""
    return evolve_many((model,), schedule)[0]


def convergence_check(model: IsingModel, schedule: AnnealSchedule) -> ConvergenceReport:
    """Compare probabilities at the given step count against twice as many steps."""
    base = evolve_many((model,), schedule, enforce_drift=False)[0]
    doubled_schedule = AnnealSchedule(tau=schedule.tau, steps=2 * schedule.steps)
    doubled = evolve_many((model,), doubled_schedule, enforce_drift=False)[0]
    diff = max(
        abs(base.final_probabilities[c] - doubled.final_probabilities[c])
        for c in base.final_probabilities
    )
    flagged = not math.isfinite(diff) or diff > 1e-6
    return ConvergenceReport(
        tau=schedule.tau,
        steps=schedule.steps,
        max_probability_difference=diff,
        flagged=flagged,
    )
