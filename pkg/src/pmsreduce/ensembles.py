"""Seeded point-cloud samplers.

All randomness comes from ``numpy.random.default_rng(seed)`` (PCG64 seeded
through ``SeedSequence``), which is reproducible across platforms.
Curves are sampled on the uniform parameter grid ``t_k = 2*pi*k/n`` and
then jittered with isotropic Gaussian noise of standard deviation
``jitter``.
"""

from __future__ import annotations

import numpy as np

from .complex import PointCloud

ENSEMBLES = ("gaussian3d", "figure8", "trefoil", "sphere_product")
DEFAULT_JITTER = 0.05


def _grid(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


def _unit_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample(ensemble: str, n: int, seed: int, jitter: float = DEFAULT_JITTER) -> PointCloud:
    if n < 1:
        raise ValueError("n must be >= 1")
    if jitter < 0:
        raise ValueError("jitter must be non-negative")
    rng = np.random.default_rng(seed)
    if ensemble == "gaussian3d":
        pts = rng.standard_normal((n, 3))
    elif ensemble == "figure8":
        t = _grid(n)
        pts = np.column_stack([np.sin(t), np.sin(t) * np.cos(t)])
        pts = pts + jitter * rng.standard_normal(pts.shape)
    elif ensemble == "trefoil":
        t = _grid(n)
        pts = np.column_stack(
            [np.sin(t) + 2 * np.sin(2 * t), np.cos(t) - 2 * np.cos(2 * t), -np.sin(3 * t)]
        )
        pts = pts + jitter * rng.standard_normal(pts.shape)
    elif ensemble == "sphere_product":
        pts = np.hstack([_unit_sphere(rng, n), _unit_sphere(rng, n)])
    else:
        raise ValueError(f"unknown ensemble {ensemble!r}; choose from {', '.join(ENSEMBLES)}")
    return PointCloud(pts)
