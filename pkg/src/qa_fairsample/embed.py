"""Chain-based minor embeddings: apply them to models, project states back.

Each logical spin maps to an ordered chain of physical spins bound by
ferromagnetic couplings of strength +J_F along consecutive pairs. Projection
back to the logical system is consensus-only: a physical configuration whose
chain members disagree is reported as BrokenChain and never repaired.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from .errors import EmbeddingError
from .model import IsingModel, SpinConfiguration, enumerate_ground_states


class BrokenChain:
    """Marker for a physical configuration whose chains disagree internally."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BrokenChain"


BROKEN_CHAIN = BrokenChain()


@dataclass(frozen=True)
class Embedding:
    """Logical-to-physical chain map with an explicit coupling reassignment.

    ``chains[i]`` lists the physical spins representing logical spin i; the
    chains must partition the physical index range. ``coupling_assignment``
    maps every logical coupling (i, j) to the single physical pair (p, q)
    that carries it, with p in chain(i) and q in chain(j).
    """

    num_logical: int
    chains: tuple[tuple[int, ...], ...]
    chain_strength: float
    coupling_assignment: tuple[tuple[tuple[int, int], tuple[int, int]], ...]

    def __post_init__(self):
        chains = tuple(tuple(int(p) for p in chain) for chain in self.chains)
        object.__setattr__(self, "chains", chains)
        assignment = tuple(
            ((int(i), int(j)), (int(p), int(q)))
            for (i, j), (p, q) in self.coupling_assignment
        )
        object.__setattr__(self, "coupling_assignment", assignment)
        object.__setattr__(self, "chain_strength", float(self.chain_strength))

        if self.num_logical < 1 or len(chains) != self.num_logical:
            raise EmbeddingError(
                f"expected {self.num_logical} chains, got {len(chains)}"
            )
        if self.chain_strength <= 0.0:
            raise EmbeddingError(
                f"chain strength must be positive, got {self.chain_strength}"
            )
        flattened = [p for chain in chains for p in chain]
        if any(len(chain) == 0 for chain in chains):
            raise EmbeddingError("every chain must be non-empty")
        if sorted(flattened) != list(range(len(flattened))):
            raise EmbeddingError(
                "chains must partition the physical index range 0..M-1"
            )
        seen = set()
        for (i, j), (p, q) in assignment:
            if not 0 <= i < j < self.num_logical:
                raise EmbeddingError(
                    f"logical coupling ({i}, {j}) must satisfy 0 <= i < j < N"
                )
            if (i, j) in seen:
                raise EmbeddingError(f"duplicate assignment for coupling ({i}, {j})")
            seen.add((i, j))
            if p not in chains[i] or q not in chains[j]:
                raise EmbeddingError(
                    f"assignment ({i},{j})->({p},{q}): physical spin not in "
                    "the claimed chain"
                )

    @property
    def num_physical(self) -> int:
        return sum(len(chain) for chain in self.chains)

    def assignment_map(self) -> dict[tuple[int, int], tuple[int, int]]:
        return {lk: pk for lk, pk in self.coupling_assignment}

    def with_chain_strength(self, chain_strength: float) -> "Embedding":
        return replace(self, chain_strength=chain_strength)


@dataclass(frozen=True)
class EmbeddedModel:
    """A physical model produced by applying an embedding to a source model."""

    model: IsingModel
    embedding: Embedding
    source: IsingModel


def identity_embedding(model: IsingModel, chain_strength: float = 1.0) -> Embedding:
    """Trivial embedding: every chain has length one, couplings map to themselves."""
    return Embedding(
        num_logical=model.num_spins,
        chains=tuple((i,) for i in range(model.num_spins)),
        chain_strength=chain_strength,
        coupling_assignment=tuple(
            ((i, j), (i, j)) for i, j, _ in model.couplings
        ),
    )


def apply_embedding(source: IsingModel, embedding: Embedding) -> EmbeddedModel:
    """Build the physical model: reassigned logical couplings plus chain bonds.

    Chain bonds are +J_F between consecutive chain members; any local fields
    attach to the first member of their chain.
    """
    if embedding.num_logical != source.num_spins:
        raise EmbeddingError(
            f"embedding maps {embedding.num_logical} logical spins but the "
            f"model has {source.num_spins}"
        )
    assignment = embedding.assignment_map()
    source_pairs = {(i, j) for i, j, _ in source.couplings}
    missing = source_pairs - set(assignment)
    if missing:
        raise EmbeddingError(f"couplings without an assignment: {sorted(missing)}")

    couplings = []
    for i, j, J in source.couplings:
        p, q = assignment[(i, j)]
        couplings.append((min(p, q), max(p, q), J))
    for chain in embedding.chains:
        for p, q in zip(chain, chain[1:]):
            couplings.append((min(p, q), max(p, q), embedding.chain_strength))

    fields = [0.0] * embedding.num_physical
    for i, h in enumerate(source.fields):
        if h:
            fields[embedding.chains[i][0]] = h

    physical = IsingModel(
        num_spins=embedding.num_physical,
        couplings=tuple(couplings),
        fields=tuple(fields),
    )
    return EmbeddedModel(model=physical, embedding=embedding, source=source)


def lift_state(config: SpinConfiguration, embedding: Embedding) -> SpinConfiguration:
    """Copy each logical spin value to all members of its chain."""
    if config.num_spins != embedding.num_logical:
        raise ValueError("configuration does not match the embedding")
    bits = 0
    for i, chain in enumerate(embedding.chains):
        if (config.bits >> i) & 1:
            for p in chain:
                bits |= 1 << p
    return SpinConfiguration(bits, embedding.num_physical)


def project_state(
    config: SpinConfiguration, embedding: Embedding
) -> SpinConfiguration | BrokenChain:
    """Consensus projection of a physical configuration onto the logical system.

    Returns BROKEN_CHAIN when any chain's members disagree; broken states are
    never repaired or re-attributed.
    """
    if config.num_spins != embedding.num_physical:
        raise ValueError("configuration does not match the embedding")
    bits = 0
    for i, chain in enumerate(embedding.chains):
        first = (config.bits >> chain[0]) & 1
        for p in chain[1:]:
            if (config.bits >> p) & 1 != first:
                return BROKEN_CHAIN
        bits |= first << i
    return SpinConfiguration(bits, embedding.num_logical)


@dataclass(frozen=True)
class EmbeddingReport:
    """Ground-manifold diagnostics for one embedded model."""

    chains_unbroken: bool
    bijective: bool
    source_energy: float
    embedded_energy: float
    source_degeneracy: int
    embedded_degeneracy: int

    def to_dict(self) -> dict:
        return {
            "chains_unbroken": self.chains_unbroken,
            "bijective": self.bijective,
            "source_energy": self.source_energy,
            "embedded_energy": self.embedded_energy,
            "source_degeneracy": self.source_degeneracy,
            "embedded_degeneracy": self.embedded_degeneracy,
        }


def verify_embedding(embedded: EmbeddedModel) -> EmbeddingReport:
    """Check that the embedded ground manifold projects bijectively onto the source's.

    A too-weak chain strength would admit broken-chain ground states; the
    report flags that instead of raising.
    """
    source_manifold = enumerate_ground_states(embedded.source)
    embedded_manifold = enumerate_ground_states(embedded.model)

    projected = [
        project_state(c, embedded.embedding) for c in embedded_manifold.configs
    ]
    unbroken = all(p is not BROKEN_CHAIN for p in projected)
    intact = [p for p in projected if p is not BROKEN_CHAIN]
    bijective = (
        unbroken
        and len(set(intact)) == len(intact)
        and set(intact) == set(source_manifold.configs)
    )
    return EmbeddingReport(
        chains_unbroken=unbroken,
        bijective=bijective,
        source_energy=source_manifold.energy,
        embedded_energy=embedded_manifold.energy,
        source_degeneracy=source_manifold.degeneracy,
        embedded_degeneracy=embedded_manifold.degeneracy,
    )


def embedding_from_dict(data: dict, chain_strength: float | None = None) -> Embedding:
    if not isinstance(data, dict):
        raise ValueError("embedding file must hold a JSON object")
    for key in ("num_logical", "chains", "coupling_assignment"):
        if key not in data:
            raise ValueError(f"embedding file is missing '{key}'")
    file_strength = data.get("chain_strength")
    if file_strength is not None:
        # reject a malformed stored value even when an override is supplied
        if isinstance(file_strength, bool) or not isinstance(
            file_strength, (int, float)
        ):
            raise ValueError("chain_strength in file must be a number or null")
        if file_strength <= 0:
            raise EmbeddingError(
                f"chain_strength in file must be positive, got {file_strength}"
            )
    if chain_strength is None:
        if file_strength is None:
            raise ValueError(
                "embedding file leaves chain_strength as a placeholder; "
                "pass a value to substitute"
            )
        chain_strength = file_strength
    assignment = tuple(
        ((pair[0][0], pair[0][1]), (pair[1][0], pair[1][1]))
        for pair in data["coupling_assignment"]
    )
    return Embedding(
        num_logical=data["num_logical"],
        chains=tuple(tuple(chain) for chain in data["chains"]),
        chain_strength=chain_strength,
        coupling_assignment=assignment,
    )


def load_embedding(path: str | Path, chain_strength: float | None = None) -> Embedding:
    """Read an embedding from its JSON file format.

    Files may store ``"chain_strength": null`` as a placeholder, in which
    case the caller must supply the value; an explicit argument always wins.
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return embedding_from_dict(data, chain_strength=chain_strength)
