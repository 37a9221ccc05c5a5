"""Independent brute-force oracles for the density decision (n = 1 instances)."""

from __future__ import annotations

import itertools

import numpy as np
from scipy.spatial import cKDTree

from hyperaffine.density import assemble_property_d


def rank_condition_sweep(inst, bound: int = 50, tol: float = 1e-9):
    """Search integer ``s`` with ``|s_j| <= bound`` and ``rank [M; s] < 2n + 1``.

    When ``rank M = 2n`` that rank drop means ``s = y M`` for some real ``y``;
    ``s`` is then fixed by its entries on ``2n`` pivot columns, so sweeping
    those entries over the box covers every candidate in the full box.
    Returns the first violating ``s`` or ``None``.
    """
    M = assemble_property_d(inst).to_float()
    m, q = M.shape
    if q < m + 1:
        return tuple([1] + [0] * (q - 1)) if q else ()
    if np.linalg.matrix_rank(M, tol=1e-9 * max(1.0, np.abs(M).max())) < m:
        return tuple([1] + [0] * (q - 1))
    best = max(itertools.combinations(range(q), m), key=lambda c: abs(np.linalg.det(M[:, c])))
    B = M[:, best]
    rest = [j for j in range(q) if j not in best]
    coeff = np.linalg.solve(B, M[:, rest])
    grid = np.array(list(itertools.product(range(-bound, bound + 1), repeat=m)), dtype=float)
    grid = grid[np.any(grid != 0, axis=1)]
    tail = grid @ coeff  # s_rest for each choice of s_B
    ok = np.all((np.abs(tail - np.round(tail)) < tol) & (np.abs(np.round(tail)) <= bound), axis=1)
    hits = np.nonzero(ok)[0]
    if not len(hits):
        return None
    s = np.zeros(q, dtype=int)
    s[list(best)] = grid[hits[0]].astype(int)
    s[rest] = np.round(tail[hits[0]]).astype(int)
    return tuple(int(x) for x in s)


def covers_square(inst, zbound: int = 200, eps: float = 0.05, max_points: int = 300_000) -> bool:
    """Do integer combinations ``sum z_k u_k`` (``|z_k| <= zbound``) come within
    ``eps`` of every cell center of an ``eps``-grid on ``[-1, 1]^2``?

    For each pair of independent columns ``B`` the other coefficients are
    enumerated (range shrunk to stay under ``max_points``) and folded onto the
    torus ``R^2 / B Z^2``.  A cell center is covered when some folded point is
    within ``eps / ||B||`` in torus coordinates, which bounds the planar
    distance by ``eps``; the lattice shift used is kept inside ``zbound``.
    Cells count as covered if any basis covers them.
    """
    M = assemble_property_d(inst).to_float()
    m, q = M.shape
    if m != 2 or q < 3:
        return False
    centers = np.arange(-1 + eps / 2, 1, eps)
    grid = np.array(list(itertools.product(centers, centers)))
    corners = np.array(list(itertools.product([-1.0, 1.0], repeat=2)))
    covered = np.zeros(len(grid), dtype=bool)
    pairs = sorted(itertools.combinations(range(q), 2), key=lambda c: -abs(np.linalg.det(M[:, c])))
    for pair in pairs:
        B = M[:, pair]
        if abs(np.linalg.det(B)) < 1e-9:
            continue
        Binv = np.linalg.inv(B)
        rest = [j for j in range(q) if j not in pair]
        r = zbound
        while (2 * r + 1) ** len(rest) > max_points:
            r -= 1
        axes = np.meshgrid(*[np.arange(-r, r + 1, dtype=float)] * len(rest), indexing="ij")
        Z = np.stack([a.ravel() for a in axes], axis=1)
        c = (Z @ M[:, rest].T) @ Binv.T
        base = -np.floor(c)
        reach = int(np.ceil(np.abs(corners @ Binv.T).max())) + 1
        keep = np.all(np.abs(base) <= zbound - reach, axis=1)
        frac = np.mod(c[keep] + base[keep], 1.0)
        if not len(frac):
            continue
        tree = cKDTree(np.clip(frac, 0.0, np.nextafter(1.0, 0.0)), boxsize=1.0)
        cg = np.clip(np.mod(grid[~covered] @ Binv.T, 1.0), 0.0, np.nextafter(1.0, 0.0))
        dist, _ = tree.query(cg)
        idx = np.nonzero(~covered)[0]
        covered[idx[dist * np.linalg.norm(B, 2) <= eps]] = True
        if covered.all():
            return True
    return bool(covered.all())
