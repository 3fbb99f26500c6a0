"""Parity between the compiled kernels and the pure-numpy fallback."""

import numpy as np
import pytest

from planspace import _pykernels, kernels

_c = pytest.importorskip("planspace._ckernels", reason="compiled kernels not built")


def random_instance(seed, n=30, d=3, m=80):
    rng = np.random.default_rng(seed)
    coords = rng.normal(size=(n, d))
    pairs = set()
    while len(pairs) < m:
        a, b = rng.integers(0, n, 2)
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    ii = np.array([a for a, _ in sorted(pairs)], dtype=np.int32)
    jj = np.array([b for _, b in sorted(pairs)], dtype=np.int32)
    targets = rng.uniform(0.05, 2.0, m)
    return coords, ii, jj, targets


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_pair_residuals_parity(seed):
    coords, ii, jj, targets = random_instance(seed)
    r1, u1, n1 = _pykernels.pair_residuals(coords, ii, jj, targets, 1e-12)
    r2, u2, n2 = _c.pair_residuals(coords, ii, jj, targets, 1e-12)
    assert np.allclose(r1, r2, rtol=1e-12, atol=1e-14)
    assert np.allclose(u1, u2, rtol=1e-12, atol=1e-14)
    assert np.allclose(n1, n2, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("seed", [3, 4])
def test_normal_equations_parity(seed):
    coords, ii, jj, targets = random_instance(seed)
    A1, g1, r1 = _pykernels.normal_equations(coords, ii, jj, targets, 1e-12)
    A2, g2, r2 = _c.normal_equations(coords, ii, jj, targets, 1e-12)
    assert np.allclose(A1, A2, rtol=1e-12, atol=1e-14)
    assert np.allclose(g1, g2, rtol=1e-12, atol=1e-14)
    assert np.allclose(r1, r2, rtol=1e-12, atol=1e-14)
    assert np.allclose(A2, A2.T)  # symmetric assembly


def test_coincident_guard_parity():
    coords = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
    ii = np.array([0, 0], dtype=np.int32)
    jj = np.array([1, 2], dtype=np.int32)
    targets = np.array([0.5, 1.0])
    _, u1, _ = _pykernels.pair_residuals(coords, ii, jj, targets, 1e-12)
    _, u2, _ = _c.pair_residuals(coords, ii, jj, targets, 1e-12)
    assert np.array_equal(u1[0], [1.0, 0.0])
    assert np.array_equal(u2[0], [1.0, 0.0])


@pytest.mark.parametrize("occupancy", [False, True])
def test_raster_kernels_parity(occupancy):
    rng = np.random.default_rng(7)
    a = np.ascontiguousarray(rng.integers(0, 5, (64, 64)).astype(np.uint8))
    b = np.ascontiguousarray(rng.integers(0, 5, (64, 64)).astype(np.uint8))
    assert _pykernels.iou_counts(a, b, occupancy) == tuple(_c.iou_counts(a, b, occupancy))
    assert _pykernels.pixel_diff(a, b) == _c.pixel_diff(a, b)
    stack = np.ascontiguousarray(rng.integers(0, 5, (10, 64, 64)).astype(np.uint8))
    d1 = _pykernels.iou_distance_stack(a, stack, occupancy)
    d2 = _c.iou_distance_stack(a, stack, occupancy)
    assert np.array_equal(d1, d2)


def test_backend_reports_selection():
    assert kernels.BACKEND in ("c", "python")


def test_solver_equivalent_across_backends():
    """Same instance solved through both kernel sets lands on the same
    stress within reduction-order noise."""
    from planspace.distances import DistanceTable
    from planspace import solver

    rng = np.random.default_rng(11)
    pts = rng.uniform(0, 1, (25, 3))
    ids = [f"p{i:02d}" for i in range(25)]
    entries = {}
    for a in range(25):
        for b in range(a + 1, 25):
            entries[(ids[a], ids[b])] = float(np.linalg.norm(pts[a] - pts[b]))
    table = DistanceTable(entries, ids)
    cfg = solver.SolverConfig(seed=4, restarts=2)

    originals = (kernels.pair_residuals, kernels.normal_equations)
    results = {}
    try:
        for name, impl in (("python", _pykernels), ("c", _c)):
            kernels.pair_residuals = impl.pair_residuals
            kernels.normal_equations = impl.normal_equations
            _, report = solver.solve_embedding(table, 3, cfg)
            results[name] = report.final_stress
    finally:
        kernels.pair_residuals, kernels.normal_equations = originals
    assert results["python"] == pytest.approx(results["c"], abs=1e-9)
