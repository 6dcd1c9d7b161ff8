"""Paths to the bundled toy-model data files."""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path

_BUILTIN_MODELS = {"matsuda5": "matsuda5.json"}
_BUILTIN_EMBEDDINGS = {"matsuda5_embedded": "matsuda5_embedded.json"}


def _package_file(name: str) -> Path:
    return Path(str(files("qa_fairsample").joinpath("models", name)))


def toy_source_path() -> Path:
    """The bundled five-spin frustrated model with six degenerate ground states."""
    return _package_file(_BUILTIN_MODELS["matsuda5"])


def toy_embedding_path() -> Path:
    """The bundled two-spin-chain embedding of the toy model (J_F left open)."""
    return _package_file(_BUILTIN_EMBEDDINGS["matsuda5_embedded"])


def resolve_model_path(token: str) -> Path:
    """A bundled model name or a filesystem path."""
    if token in _BUILTIN_MODELS:
        return _package_file(_BUILTIN_MODELS[token])
    return Path(token)


def resolve_embedding_path(token: str) -> Path:
    if token in _BUILTIN_EMBEDDINGS:
        return _package_file(_BUILTIN_EMBEDDINGS[token])
    return Path(token)
