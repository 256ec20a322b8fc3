"""Point sets on the torus [0, 2*pi)^d with recorded provenance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jsonio

TWO_PI = 2.0 * np.pi


@dataclass
class PointSet:
    """An ordered list of m points in [0, 2*pi)^d.

    Coordinates are reduced mod 2*pi on construction.  ``provenance``
    records how the set was produced (explicit, seeded draw, equispaced)
    so runs can be reproduced from the serialized form.
    """

    points: np.ndarray
    provenance: dict = field(default_factory=lambda: {"kind": "explicit"})

    def __post_init__(self):
        arr = np.asarray(self.points, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("a point set needs at least one point")
        self.points = np.mod(arr, TWO_PI)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @classmethod
    def explicit(cls, points):
        return cls(points)

    @classmethod
    def random_uniform(cls, m: int, d: int, seed: int, draw_index: int = 0):
        """m i.i.d. uniform points, reproducible from (seed, draw_index)."""
        rng = np.random.default_rng([int(seed), int(draw_index)])
        pts = rng.uniform(0.0, TWO_PI, size=(m, d))
        return cls(pts, {"kind": "seeded", "seed": int(seed),
                         "draw_index": int(draw_index)})

    @classmethod
    def equispaced(cls, n: int, d: int = 1):
        """Tensor grid with n points per dimension, lexicographic order."""
        if n < 1:
            raise ValueError("need at least one point per dimension")
        axis = np.arange(n) * (TWO_PI / n)
        if d == 1:
            pts = axis[:, None]
        else:
            grids = np.meshgrid(*([axis] * d), indexing="ij")
            pts = np.stack([g.reshape(-1) for g in grids], axis=1)
        return cls(pts, {"kind": "equispaced", "n_per_dim": int(n)})

    def append(self, other: "PointSet") -> "PointSet":
        if other.dimension != self.dimension:
            raise ValueError("dimension mismatch when appending point sets")
        pts = np.concatenate([self.points, other.points], axis=0)
        return PointSet(pts, {"kind": "union",
                              "parts": [self.provenance, other.provenance]})

    def to_json(self):
        return {
            "provenance": self.provenance,
            "points": [list(map(float, row)) for row in self.points],
        }

    @classmethod
    def from_json(cls, obj):
        return cls(np.asarray(obj["points"], dtype=float),
                   dict(obj.get("provenance", {"kind": "explicit"})))

    def save(self, path):
        jsonio.dump_path(self.to_json(), path)

    @classmethod
    def load(cls, path):
        return cls.from_json(jsonio.load_path(path))
