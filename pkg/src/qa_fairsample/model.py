"""Classical Ising targets: energies, exhaustive ground-state search, bit utilities.

Spin configurations are N-bit words; bit i set means spin i points up (+1).
Models are small by design (N <= 24) so every operation that needs the full
spectrum simply scans all 2^N configurations.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ModelTooLargeError

MAX_SPINS = 24

# Relative tie tolerance for ground-state search on non-integer couplings.
TIE_EPS = 1e-12


@dataclass(frozen=True, order=True)
class SpinConfiguration:
    """One z-basis state; bit i of ``bits`` set means spin i is up (+1)."""

    bits: int
    num_spins: int

    def __post_init__(self):
        if self.num_spins < 1:
            raise ValueError(f"num_spins must be >= 1, got {self.num_spins}")
        if not 0 <= self.bits < (1 << self.num_spins):
            raise ValueError(
                f"bits {self.bits} out of range for {self.num_spins} spins"
            )

    def spin(self, i: int) -> int:
        """Spin value at site i, +1 (up) or -1 (down)."""
        return 1 if (self.bits >> i) & 1 else -1

    def spins(self) -> tuple[int, ...]:
        return tuple(self.spin(i) for i in range(self.num_spins))

    def flip(self, i: int) -> "SpinConfiguration":
        return SpinConfiguration(self.bits ^ (1 << i), self.num_spins)

    def inverted(self) -> "SpinConfiguration":
        """Global spin flip."""
        mask = (1 << self.num_spins) - 1
        return SpinConfiguration(self.bits ^ mask, self.num_spins)

    def to_bitstring(self) -> str:
        """Bit characters with spin 0 leftmost, e.g. bits=19, N=5 -> '11001'."""
        return "".join(str((self.bits >> i) & 1) for i in range(self.num_spins))

    def to_arrows(self) -> str:
        return "".join(
            "↑" if (self.bits >> i) & 1 else "↓"
            for i in range(self.num_spins)
        )

    def __repr__(self):
        return f"SpinConfiguration({self.to_bitstring()})"


def hamming_distance(a: SpinConfiguration, b: SpinConfiguration) -> int:
    """Number of spins on which two configurations of the same system differ."""
    if a.num_spins != b.num_spins:
        raise ValueError("configurations belong to different system sizes")
    return (a.bits ^ b.bits).bit_count()


@dataclass(frozen=True)
class IsingModel:
    """Diagonal target Hamiltonian -sum_ij J_ij s_i s_j - sum_i h_i s_i.

    ``couplings`` holds (i, j, J) triples with 0 <= i < j < num_spins and no
    duplicate pairs. ``fields`` defaults to all zeros.
    """

    num_spins: int
    couplings: tuple[tuple[int, int, float], ...]
    fields: tuple[float, ...] = ()

    def __post_init__(self):
        if self.num_spins < 1:
            raise ValueError(f"num_spins must be >= 1, got {self.num_spins}")
        if self.num_spins > MAX_SPINS:
            raise ModelTooLargeError(
                f"{self.num_spins} spins exceeds the enumeration guard of {MAX_SPINS}"
            )
        couplings = tuple(
            (int(i), int(j), float(J)) for i, j, J in self.couplings
        )
        object.__setattr__(self, "couplings", couplings)
        seen = set()
        for i, j, _ in couplings:
            if not 0 <= i < j < self.num_spins:
                raise ValueError(f"coupling ({i}, {j}) must satisfy 0 <= i < j < N")
            if (i, j) in seen:
                raise ValueError(f"duplicate coupling ({i}, {j})")
            seen.add((i, j))
        fields = tuple(float(h) for h in self.fields)
        if not fields:
            fields = (0.0,) * self.num_spins
        if len(fields) != self.num_spins:
            raise ValueError(
                f"got {len(fields)} fields for {self.num_spins} spins"
            )
        object.__setattr__(self, "fields", fields)

    @property
    def has_fields(self) -> bool:
        return any(h != 0.0 for h in self.fields)

    @property
    def is_integer_valued(self) -> bool:
        return all(J.is_integer() for _, _, J in self.couplings) and all(
            h.is_integer() for h in self.fields
        )

    def config(self, bits: int) -> SpinConfiguration:
        return SpinConfiguration(bits, self.num_spins)

    def to_dict(self) -> dict:
        out = {
            "num_spins": self.num_spins,
            "couplings": [[i, j, J] for i, j, J in self.couplings],
        }
        if self.has_fields:
            out["fields"] = list(self.fields)
        return out


@dataclass(frozen=True)
class GroundManifold:
    """All minimum-energy configurations of a model, ordered by bits value."""

    energy: float
    configs: tuple[SpinConfiguration, ...]
    degeneracy: int

    def bits_set(self) -> frozenset[int]:
        return frozenset(c.bits for c in self.configs)

    def __contains__(self, config: SpinConfiguration) -> bool:
        return config in self.configs


def energy(model: IsingModel, config: SpinConfiguration) -> float:
    """Energy -sum_ij J_ij s_i s_j - sum_i h_i s_i of one configuration."""
    if config.num_spins != model.num_spins:
        raise ValueError("configuration does not match the model size")
    e = 0.0
    for i, j, J in model.couplings:
        e -= J * config.spin(i) * config.spin(j)
    for i, h in enumerate(model.fields):
        if h:
            e -= h * config.spin(i)
    return e


@functools.lru_cache(maxsize=128)
def energy_table(model: IsingModel) -> np.ndarray:
    """Energies of all 2^N configurations, indexed by bits value (read-only)."""
    idx = np.arange(1 << model.num_spins, dtype=np.int64)
    table = np.zeros(idx.shape, dtype=np.float64)
    for i, j, J in model.couplings:
        si = 2.0 * ((idx >> i) & 1) - 1.0
        sj = 2.0 * ((idx >> j) & 1) - 1.0
        table -= J * si * sj
    for i, h in enumerate(model.fields):
        if h:
            table -= h * (2.0 * ((idx >> i) & 1) - 1.0)
    table.setflags(write=False)
    return table


def enumerate_ground_states(model: IsingModel) -> GroundManifold:
    """Exhaustive scan over all 2^N configurations for the exact minimum.

    Ties are resolved exactly for integer-valued models (their energies are
    integers, exact in float64) and within a 1e-12 relative tolerance
    otherwise, so rounding cannot split a true degeneracy.
    """
    table = energy_table(model)
    e0 = float(table.min())
    if model.is_integer_valued:
        mask = table == e0
    else:
        mask = table <= e0 + TIE_EPS * max(1.0, abs(e0))
    configs = tuple(
        SpinConfiguration(int(b), model.num_spins) for b in np.flatnonzero(mask)
    )
    return GroundManifold(energy=e0, configs=configs, degeneracy=len(configs))


def ground_connectivity(
    manifold: GroundManifold, distance: int
) -> dict[SpinConfiguration, tuple[SpinConfiguration, ...]]:
    """Adjacency over manifold configs at exactly the given Hamming distance."""
    if distance not in (1, 2):
        raise ValueError(f"distance must be 1 or 2, got {distance}")
    adjacency = {}
    for a in manifold.configs:
        neighbors = tuple(
            b for b in manifold.configs if hamming_distance(a, b) == distance
        )
        if neighbors:
            adjacency[a] = neighbors
    return adjacency


def _require(condition: bool, message: str):
    if not condition:
        raise ValueError(message)


def model_from_dict(data: dict) -> IsingModel:
    _require(isinstance(data, dict), "model file must hold a JSON object")
    _require("num_spins" in data, "model file is missing 'num_spins'")
    _require("couplings" in data, "model file is missing 'couplings'")
    num_spins = data["num_spins"]
    _require(isinstance(num_spins, int), "'num_spins' must be an integer")
    couplings = data["couplings"]
    _require(isinstance(couplings, list), "'couplings' must be a list")
    triples = []
    for entry in couplings:
        _require(
            isinstance(entry, list) and len(entry) == 3,
            f"coupling entry {entry!r} is not an [i, j, J] triple",
        )
        triples.append((entry[0], entry[1], entry[2]))
    fields = data.get("fields", ())
    _require(
        isinstance(fields, (list, tuple)),
        "'fields' must be a list of per-spin values",
    )
    return IsingModel(
        num_spins=num_spins, couplings=tuple(triples), fields=tuple(fields)
    )


def load_model(path: str | Path) -> IsingModel:
    """Read an Ising model from its JSON file format."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return model_from_dict(data)
