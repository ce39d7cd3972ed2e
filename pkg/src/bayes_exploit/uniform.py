"""Exploitation under a uniform prior over a polyhedron of strategies.

The polyhedron is represented by its vertices, each a mixed strategy, with a
weight per vertex. Observing an action multiplies each weight by the
probability that vertex assigns to it; the opponent model is the weighted
average of the vertices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .game import check_distribution


class ImpossibleObservation(ValueError):
    pass


@dataclass(frozen=True)
class VertexPrior:
    """Vertices ``(V, ...)`` (each a mixed strategy over the last axis) and weights ``(V,)``."""

    vertices: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim < 2 or v.shape[0] == 0:
            raise ValueError("vertices must be a non-empty stack of mixed strategies")
        if np.any(v < 0) or np.any(np.abs(v.sum(axis=-1) - 1.0) > 1e-12):
            raise ValueError("every vertex must be a valid mixed strategy")
        w = (
            np.full(v.shape[0], 1.0 / v.shape[0])
            if self.weights is None
            else check_distribution(np.array(self.weights, dtype=float))
        )
        if w.shape != (v.shape[0],):
            raise ValueError("need one weight per vertex")
        v.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "weights", w)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @classmethod
    def from_json(cls, source) -> "VertexPrior":
        """Load from a JSON list of vertices, or ``{"vertices": [...], "weights": [...]}``."""
        if isinstance(source, Path) or (
            isinstance(source, str) and not source.lstrip().startswith(("[", "{"))
        ):
            source = Path(source).read_text()
        data = json.loads(source)
        if isinstance(data, list):
            return cls(np.asarray(data, dtype=float))
        return cls(np.asarray(data["vertices"], dtype=float), data.get("weights"))

    def to_json(self) -> str:
        return json.dumps({"vertices": self.vertices.tolist(), "weights": self.weights.tolist()})


def _reweight(vp: VertexPrior, likelihood: np.ndarray) -> VertexPrior:
    w = vp.weights * likelihood
    total = w.sum()
    if not total > 0.0:
        raise ImpossibleObservation("observation has zero probability at every vertex")
    return VertexPrior(vp.vertices, w / total)


def vertex_posterior_update(vp: VertexPrior, observed_action: int) -> VertexPrior:
    """Multiply each weight by the vertex's probability of ``observed_action``; renormalise."""
    if vp.vertices.ndim != 2:
        raise ValueError("directly observed actions need 1-D strategy vertices")
    return _reweight(vp, vp.vertices[:, observed_action])


def vertex_posterior_update_latent(vp: VertexPrior, pi, observed_action: int) -> VertexPrior:
    """Extension for vertices that are state-conditional strategies ``(V, n, m)``.

    The private state is hidden, so each vertex's likelihood is
    ``sum_i pi_i v[i, a]``.
    """
    if vp.vertices.ndim != 3:
        raise ValueError("latent-state update needs (V, n, m) vertices")
    pi = check_distribution(pi)
    return _reweight(vp, pi @ vp.vertices[:, :, observed_action].T)


def vertex_mean(vp: VertexPrior) -> np.ndarray:
    return np.tensordot(vp.weights, vp.vertices, axes=1)
