"""Codebooks (finite sets of quantizers) and their JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .curve import DomainError

COINCIDENCE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Codebook:
    """Ordered list of ``n >= 1`` distinct points in the plane."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True).reshape(-1, 2)
        if len(pts) == 0:
            raise DomainError("a codebook needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise DomainError("codebook points must be finite")
        if len(pts) > 1:
            gaps = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
            gaps[np.diag_indices(len(pts))] = np.inf
            if gaps.min() <= COINCIDENCE_TOL:
                raise DomainError("codebook points must be pairwise distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        return isinstance(other, Codebook) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())

    def tolist(self) -> list[list[float]]:
        return [[float(x), float(y)] for x, y in self.points]


def _fmt(x: float) -> float:
    # 17 significant digits round-trip any double
    return float(f"{x:.17g}")


def codebook_to_json(
    cb: Codebook,
    *,
    distortion: float | None = None,
    shape: str = "custom",
    kind: str = "solver",
    paper_ref: str | None = None,
) -> dict[str, Any]:
    return {
        "n": cb.n,
        "points": [[_fmt(x), _fmt(y)] for x, y in cb.points],
        "distortion": None if distortion is None else _fmt(distortion),
        "shape": shape,
        "provenance": {"kind": kind, "paper_ref": paper_ref},
    }


def codebook_from_json(obj: dict[str, Any]) -> Codebook:
    try:
        points = obj["points"]
    except (KeyError, TypeError) as exc:
        raise DomainError("codebook JSON needs a 'points' list") from exc
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError("'points' must be a list of [x, y] pairs")
    if "n" in obj and obj["n"] != len(arr):
        raise DomainError(f"'n' is {obj['n']} but {len(arr)} points were given")
    return Codebook(arr)


def save_codebook(path: str | Path, cb: Codebook, **meta) -> None:
    Path(path).write_text(json.dumps(codebook_to_json(cb, **meta), indent=2) + "\n")


def load_codebook(path: str | Path) -> Codebook:
    return codebook_from_json(json.loads(Path(path).read_text()))
