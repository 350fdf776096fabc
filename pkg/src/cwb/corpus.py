"""Access to the bundled algebra corpus (group signature: mul, inv, e)."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

from .algebra import FiniteAlgebra, loads

CORPUS_NAMES = ("Z2", "Z4", "Z2x2", "Z6", "S3", "D4", "trivial")

NILPOTENT_CORPUS = ("Z2", "Z4", "Z2x2", "Z6", "D4")


def corpus_path(name: str) -> Path:
    if name not in CORPUS_NAMES:
        raise KeyError(f"unknown corpus algebra {name!r}; have {CORPUS_NAMES}")
    return Path(str(resources.files("cwb") / "data" / f"{name}.json"))


@lru_cache(maxsize=None)
def load_corpus(name: str) -> FiniteAlgebra:
    path = corpus_path(name)
    return loads(path.read_text(encoding="utf-8"), source=str(path))
