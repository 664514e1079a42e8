"""Metric MDS by SMACOF stress majorization."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matrix import DistanceMatrix


@dataclass
class Embedding2D:
    coordinates: np.ndarray
    stress: float
    stress_trace: list = field(default_factory=list)
    n_iter: int = 0


def raw_stress(delta: np.ndarray, x: np.ndarray) -> float:
    """Sum over i < j of (delta_ij - ||x_i - x_j||)^2."""
    d = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(-1))
    return float(np.triu((delta - d) ** 2, 1).sum())


def _guttman(delta: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = len(x)
    d = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(-1))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d > 0, delta / d, 0.0)
    b = -ratio
    np.fill_diagonal(b, 0.0)
    np.fill_diagonal(b, -b.sum(axis=1))
    return b @ x / n


def mmds(dm: DistanceMatrix, dims: int = 2, seed: int = 0, max_iter: int = 500,
         tol: float = 1e-8, init: np.ndarray | None = None, n_init: int = 4) -> Embedding2D:
    """SMACOF with unit weights from seeded random starts.

    Each run stops once the relative stress decrease drops below ``tol`` or
    after ``max_iter`` Guttman updates. With no ``init``, ``n_init`` random
    starts are run and the lowest-stress one is returned, since a single
    start can settle in a local minimum. ``stress_trace`` holds the stress of
    the start and of every iterate of the returned run.
    """
    delta = dm.values
    if dm.n < 3:
        raise ValueError("need at least three items")
    if init is not None:
        return _smacof(delta, np.array(init, dtype=float), max_iter, tol)
    rng = np.random.default_rng(seed)
    scale = delta.max() or 1.0
    best = None
    for _ in range(max(1, n_init)):
        x = rng.uniform(-0.5, 0.5, size=(dm.n, dims)) * scale
        run = _smacof(delta, x, max_iter, tol)
        if best is None or run.stress < best.stress:
            best = run
    return best


def _smacof(delta: np.ndarray, x: np.ndarray, max_iter: int, tol: float) -> Embedding2D:
    x = x - x.mean(axis=0)
    stress = raw_stress(delta, x)
    trace = [stress]
    it = 0
    for it in range(1, max_iter + 1):
        x = _guttman(delta, x)
        new = raw_stress(delta, x)
        trace.append(new)
        done = stress - new <= tol * max(stress, np.finfo(float).tiny)
        stress = new
        if done:
            break
    return Embedding2D(x, stress, trace, it)
