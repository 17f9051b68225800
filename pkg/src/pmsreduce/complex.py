"""Vietoris-Rips filtrations over a uniform scale grid, and barcodes."""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .boundary import BoundaryMatrix


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("a point cloud is a 2-d array of shape (n, d)")
        if pts.shape[0] == 0:
            raise ValueError("point cloud is empty")
        if pts.shape[1] < 1:
            raise ValueError("points must have at least one coordinate")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class Simplex:
    vertices: tuple[int, ...]
    scale: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


@dataclass(frozen=True)
class Filtration:
    simplices: tuple[Simplex, ...]
    scale_grid: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.simplices)

    def boundary_matrix(self) -> BoundaryMatrix:
        return BoundaryMatrix.from_complex([s.vertices for s in self.simplices])


def build_vietoris_rips(cloud: PointCloud, r_max: float, divisions: int, max_dim: int) -> Filtration:
    """All simplices up to ``max_dim`` with diameter at most ``2 * r_max``.

    A simplex enters at the first grid scale ``r_i = i * r_max / divisions``
    with ``diam <= 2 * r_i``; vertices enter at scale 0. The order is by
    scale, then dimension, then vertex tuple, which makes it compatible.
    """
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    if divisions < 1:
        raise ValueError("divisions must be >= 1")
    if max_dim < 1:
        raise ValueError("max_dim must be >= 1")
    grid = tuple(i * r_max / divisions for i in range(1, divisions + 1))
    thresholds = [2.0 * r for r in grid]
    pts = cloud.points
    n = len(cloud)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))

    # level[u][v] = grid position admitting edge uv, or None when too long
    level: list[dict[int, int]] = [dict() for _ in range(n)]
    for u in range(n):
        for v in range(u + 1, n):
            k = bisect.bisect_left(thresholds, float(dist[u, v]))
            if k < len(thresholds):
                level[u][v] = k
                level[v][u] = k

    entries: list[tuple[int, int, tuple[int, ...]]] = [(-1, 0, (v,)) for v in range(n)]
    frontier: list[tuple[tuple[int, ...], int]] = [((v,), -1) for v in range(n)]
    for d in range(1, max_dim + 1):
        nxt = []
        for verts, lev in frontier:
            last = verts[-1]
            for w in sorted(x for x in level[last] if x > last):
                new_lev = lev
                ok = True
                for u in verts:
                    k = level[u].get(w)
                    if k is None:
                        ok = False
                        break
                    new_lev = max(new_lev, k)
                if ok:
                    cofacet = verts + (w,)
                    nxt.append((cofacet, new_lev))
                    entries.append((new_lev, d, cofacet))
        frontier = nxt
        if not frontier:
            break

    entries.sort()
    simplices = tuple(
        Simplex(verts, 0.0 if lev < 0 else grid[lev]) for lev, _, verts in entries
    )
    return Filtration(simplices, grid)


@dataclass(frozen=True, order=True)
class Interval:
    birth: float
    death: float
    dim: int

    @property
    def essential(self) -> bool:
        return math.isinf(self.death)


def extract_pairs(filtration: Filtration, lowstar: Sequence[int]) -> list[Interval]:
    """Barcode intervals from a reduced low vector, sorted.

    Zero-length intervals are kept; essential classes die at infinity.
    """
    m = len(filtration)
    if len(lowstar) != m:
        raise ValueError(f"low vector has {len(lowstar)} entries, filtration has {m}")
    simplices = filtration.simplices
    out = []
    targets = set()
    for j, i in enumerate(lowstar, start=1):
        if i:
            if i in targets:
                raise ValueError(f"low vector is not injective: row {i} is hit twice")
            if not 1 <= i < j:
                raise ValueError(f"column {j} has invalid low {i}")
            targets.add(i)
            out.append(Interval(simplices[i - 1].scale, simplices[j - 1].scale, simplices[i - 1].dim))
    for e, v in enumerate(lowstar, start=1):
        if v == 0 and e not in targets:
            out.append(Interval(simplices[e - 1].scale, math.inf, simplices[e - 1].dim))
    return sorted(out)


def index_filtration(dims: Sequence[int]) -> Filtration:
    """A stand-in filtration whose scales are the simplex indices.

    Used to emit a barcode when only a boundary matrix is at hand.
    """
    simplices = tuple(Simplex(tuple(range(d + 1)), float(j)) for j, d in enumerate(dims, start=1))
    return Filtration(simplices, ())


def read_cloud(path: str | Path) -> PointCloud:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    if rows and len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: rows have differing numbers of coordinates")
    return PointCloud(np.array(rows, dtype=float).reshape(len(rows), -1))


def write_cloud(cloud: PointCloud, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for p in cloud.points:
            writer.writerow([repr(float(x)) for x in p])


def write_filtration(filtration: Filtration, path: str | Path) -> None:
    lines = [
        " ".join([str(j), str(s.dim), repr(s.scale), *map(str, s.vertices)])
        for j, s in enumerate(filtration.simplices, start=1)
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def read_filtration(path: str | Path) -> Filtration:
    simplices = []
    for line in Path(path).read_text().splitlines():
        fields = line.split()
        if not fields:
            continue
        j, d = int(fields[0]), int(fields[1])
        if j != len(simplices) + 1:
            raise ValueError(f"filtration indices must run 1..m, got {j}")
        verts = tuple(int(v) for v in fields[3:])
        if len(verts) != d + 1:
            raise ValueError(f"simplex {j}: dimension {d} does not match {len(verts)} vertices")
        simplices.append(Simplex(verts, float(fields[2])))
    grid = tuple(sorted({s.scale for s in simplices if s.scale > 0}))
    return Filtration(tuple(simplices), grid)


def write_barcode(intervals: Sequence[Interval], path: str | Path) -> None:
    lines = [f"{iv.birth!r} {'inf' if iv.essential else repr(iv.death)} {iv.dim}" for iv in intervals]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_barcode(path: str | Path) -> list[Interval]:
    out = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            b, dth, d = line.split()
            out.append(Interval(float(b), float(dth), int(d)))
    return out
