"""Empirical orbit coverage for affine semigroups.

Points of the orbit ``{f(v) : f in G}`` are produced by expanding generator
words best-first: states inside the sampling box are expanded before states
outside it, shorter words before longer ones, with seeded random tie-breaks.
Coverage is the fraction of cells of a ``grid^(2n)`` partition of
``[-R, R]^(2n)`` hit by the points, with coordinates ordered
``(Re x1, Im x1, Re x2, ...)``.

This is evidence only.  A finite sample says nothing rigorous about density.
"""

from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .affine import AffineMap
from .linalg import to_complex

DEDUPE_TOL = 1e-12
ESCAPE_NORM = 1e12
AUDIT_FRACTION = 0.01


@dataclass
class SimConfig:
    budget: int = 10_000  # distinct orbit points to sample
    box_radius: float = 2.0
    grid: int = 8
    seed: int = 0
    start: np.ndarray | None = None  # defaults to w0 when run through the CLI
    max_word_length: int | None = None
    checkpoints: Sequence[int] | None = None
    # add generator inverses: samples the generated group, not the semigroup
    group: bool = False

    def __post_init__(self):
        if self.budget < 1 or self.grid < 1:
            raise ValueError("budget and grid must be at least 1")
        if not self.box_radius > 0:
            raise ValueError("box radius must be positive")

    def checkpoint_list(self) -> list[int]:
        if self.checkpoints:
            pts = sorted({int(c) for c in self.checkpoints if 0 < c <= self.budget})
        else:
            pts = [10**k for k in range(1, 12) if 10**k < self.budget]
        if not pts or pts[-1] != self.budget:
            pts.append(self.budget)
        return pts


class OrbitPoint(NamedTuple):
    x: np.ndarray
    parent: np.ndarray | None
    generator: int  # -1 for the start point
    depth: int


@dataclass
class Checkpoint:
    budget: int
    points: int
    cells_hit: int
    coverage: float
    escape_fraction: float


@dataclass
class CoverageResult:
    cells_total: int
    points_sampled: int = 0
    cells_hit: int = 0
    outside: int = 0
    escaped: int = 0
    checkpoints: list[Checkpoint] = field(default_factory=list)
    audit_checked: int = 0
    audit_failures: int = 0

    @property
    def coverage(self) -> float:
        return self.cells_hit / self.cells_total if self.cells_total else 0.0

    @property
    def escape_fraction(self) -> float:
        return self.outside / self.points_sampled if self.points_sampled else 0.0


def _maps(fs: Sequence[AffineMap], group: bool) -> list[tuple[np.ndarray, np.ndarray]]:
    out = [(to_complex(f.A), to_complex(f.a)) for f in fs]
    if group:
        for A, a in list(out):
            Ai = np.linalg.inv(A)
            out.append((Ai, -Ai @ a))
    return out


def _in_box(x: np.ndarray, R: float) -> bool:
    return bool(np.all(np.abs(x.real) <= R) and np.all(np.abs(x.imag) <= R))


def _key(x: np.ndarray) -> bytes:
    # + 0.0 folds -0.0 into 0.0 so both round to the same bytes
    return (np.round(np.concatenate([x.real, x.imag]) / DEDUPE_TOL) + 0.0).tobytes()


def sample_orbit(fs: Sequence[AffineMap], cfg: SimConfig, stats: dict | None = None) -> Iterator[OrbitPoint]:
    """Yield up to ``cfg.budget`` distinct orbit points, start point first."""
    if not fs:
        raise ValueError("need at least one generator")
    n = fs[0].n
    if any(f.n != n for f in fs):
        raise ValueError("generators have different dimensions")
    maps = _maps(fs, cfg.group)
    start = np.zeros(n, dtype=complex) if cfg.start is None else to_complex(np.asarray(cfg.start))
    rng = np.random.default_rng(cfg.seed)
    stats = stats if stats is not None else {}
    stats.setdefault("escaped", 0)
    seen = {_key(start)}
    counter = 0
    heap = [(0, 0, rng.random(), counter, OrbitPoint(start, None, -1, 0))]
    emitted = 0
    while heap and emitted < cfg.budget:
        *_, pt = heapq.heappop(heap)
        yield pt
        emitted += 1
        if cfg.max_word_length is not None and pt.depth >= cfg.max_word_length:
            continue
        for g, (A, a) in enumerate(maps):
            y = A @ pt.x + a
            if not np.all(np.isfinite(y)) or np.linalg.norm(y) > ESCAPE_NORM:
                stats["escaped"] += 1
                continue
            k = _key(y)
            if k in seen:
                continue
            seen.add(k)
            counter += 1
            outside = 0 if _in_box(y, cfg.box_radius) else 1
            heapq.heappush(heap, (outside, pt.depth + 1, rng.random(), counter, OrbitPoint(y, pt.x, g, pt.depth + 1)))


def _cell(x: np.ndarray, R: float, grid: int) -> tuple | None:
    coords = np.empty(2 * len(x))
    coords[0::2] = x.real
    coords[1::2] = x.imag
    if np.any(np.abs(coords) > R):
        return None
    idx = np.floor((coords + R) / (2 * R) * grid).astype(int)
    return tuple(np.clip(idx, 0, grid - 1).tolist())


def coverage(points: Sequence[np.ndarray], cfg: SimConfig, n: int | None = None) -> CoverageResult:
    """Histogram ``points`` into the grid cells of the box."""
    points = [to_complex(np.atleast_1d(p)) for p in points]
    if n is None:
        n = len(points[0]) if points else 1
    res = CoverageResult(cells_total=cfg.grid ** (2 * n))
    cells = set()
    for x in points:
        res.points_sampled += 1
        c = _cell(x, cfg.box_radius, cfg.grid)
        if c is None:
            res.outside += 1
        else:
            cells.add(c)
    res.cells_hit = len(cells)
    return res


def run(fs: Sequence[AffineMap], cfg: SimConfig) -> CoverageResult:
    """Sample the orbit and record coverage at each checkpoint budget."""
    n = fs[0].n
    res = CoverageResult(cells_total=cfg.grid ** (2 * n))
    maps = _maps(fs, cfg.group)
    audit_rng = np.random.default_rng(cfg.seed + 1)
    marks = cfg.checkpoint_list()
    cells: set = set()
    stats: dict = {}
    for pt in sample_orbit(fs, cfg, stats):
        res.points_sampled += 1
        c = _cell(pt.x, cfg.box_radius, cfg.grid)
        if c is None:
            res.outside += 1
        else:
            cells.add(c)
        if pt.parent is not None and audit_rng.random() < AUDIT_FRACTION:
            A, a = maps[pt.generator]
            res.audit_checked += 1
            if not np.array_equal(A @ pt.parent + a, pt.x):
                res.audit_failures += 1
        while marks and res.points_sampled >= marks[0]:
            res.checkpoints.append(_checkpoint(marks.pop(0), res, len(cells)))
    res.cells_hit = len(cells)
    res.escaped = stats.get("escaped", 0)
    # orbit exhausted before the budget: remaining checkpoints see the same set
    for b in marks:
        res.checkpoints.append(_checkpoint(b, res, len(cells)))
    return res


def _checkpoint(budget: int, res: CoverageResult, hit: int) -> Checkpoint:
    return Checkpoint(
        budget=budget,
        points=res.points_sampled,
        cells_hit=hit,
        coverage=hit / res.cells_total,
        escape_fraction=res.outside / res.points_sampled if res.points_sampled else 0.0,
    )


CSV_FIELDS = ("budget", "points", "coverage", "escape_fraction")


def write_csv(res: CoverageResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for c in res.checkpoints:
            w.writerow([c.budget, c.points, f"{c.coverage:.10g}", f"{c.escape_fraction:.10g}"])
