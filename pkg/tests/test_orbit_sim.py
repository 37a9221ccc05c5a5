import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperaffine.affine import AffineMap
from hyperaffine.orbit_sim import SimConfig, coverage, run, sample_orbit, write_csv


def _translations():
    return [AffineMap(np.eye(1, dtype=complex), np.array([t])) for t in (1.0, -1.0, 0.37j, -0.37j)]


def test_identity_orbit_is_a_point():
    pts = list(sample_orbit([AffineMap.identity(2, exact=False)], SimConfig(budget=50, start=np.ones(2))))
    assert len(pts) == 1


def test_contraction_stays_on_a_segment():
    half = AffineMap(np.array([[0.5 + 0j]]), np.zeros(1, complex))
    res = run([half], SimConfig(budget=2000, start=np.array([1.0])))
    # points 2^-m lie in the cells along the positive real axis
    assert res.cells_hit <= 8 and res.coverage < 0.05


def test_coverage_examples():
    cfg = SimConfig(box_radius=1.0, grid=2)
    assert coverage([], cfg, n=1).coverage == 0.0
    centers = [np.array([complex(a, b), complex(c, d)]) for a, b, c, d in itertools.product([-0.5, 0.5], repeat=4)]
    assert coverage(centers, cfg).coverage == 1.0
    rng = np.random.default_rng(0)
    pts = rng.uniform(-2, 2, (10_000, 2))
    res = coverage([np.array([complex(x, y)]) for x, y in pts], SimConfig(grid=8))
    assert res.coverage == 1.0


def test_outside_points_counted():
    res = coverage([np.array([5.0]), np.array([0.0])], SimConfig(grid=4))
    assert res.outside == 1 and res.escape_fraction == 0.5


@settings(max_examples=10)
@given(st.integers(0, 1000))
def test_monotone_and_reproducible(seed):
    cfg = SimConfig(budget=3000, seed=seed, start=np.zeros(1), checkpoints=[10, 100, 1000, 3000])
    a, b = run(_translations(), cfg), run(_translations(), cfg)
    cov = [c.coverage for c in a.checkpoints]
    assert cov == sorted(cov)
    assert [c.__dict__ for c in a.checkpoints] == [c.__dict__ for c in b.checkpoints]


def test_audit_and_escape_guard():
    grow = AffineMap(np.array([[1e7 + 0j]]), np.array([1.0 + 0j]))
    res = run([grow], SimConfig(budget=10, start=np.array([1.0])))
    assert res.escaped >= 1
    res = run(_translations(), SimConfig(budget=5000, start=np.zeros(1)))
    assert res.audit_checked > 0 and res.audit_failures == 0


def test_group_mode_adds_inverses():
    shift = [AffineMap(np.eye(1, dtype=complex), np.array([0.5]))]
    semi = run(shift, SimConfig(budget=200, start=np.zeros(1)))
    grp = run(shift, SimConfig(budget=200, start=np.zeros(1), group=True))
    assert grp.cells_hit > semi.cells_hit


def test_csv(tmp_path):
    res = run(_translations(), SimConfig(budget=100, start=np.zeros(1)))
    path = tmp_path / "c.csv"
    write_csv(res, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "budget,points,coverage,escape_fraction"
    assert len(lines) == 1 + len(res.checkpoints)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(budget=0)
    with pytest.raises(ValueError):
        SimConfig(box_radius=0)
    with pytest.raises(ValueError):
        list(sample_orbit([], SimConfig()))
