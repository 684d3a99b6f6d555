"""Tests for center sets, refinement and cells."""
import math

import numpy as np
import pytest

from errors import DuplicatePoints, UnsupportedDimension, ValidationError
from sphere_geometry import (SpherePoint, analyze_centers, build_cells, cap_volume_constant,
                             equispaced_circle, fibonacci_sphere, generate_points,
                             geodesic_distance, octahedron, random_rotation, refine_nested,
                             rotate, sphere_grid, sphere_volume)


def test_sphere_volume():
    assert sphere_volume(1) == pytest.approx(2 * math.pi)
    assert sphere_volume(2) == pytest.approx(4 * math.pi)
    assert sphere_volume(3) == pytest.approx(2 * math.pi ** 2)


def test_sphere_point_must_be_unit():
    with pytest.raises(ValidationError):
        SpherePoint([1.0, 1.0, 0.0])
    p = SpherePoint([0.0, 0.0, 1.0])
    assert p.dim_n == 2
    assert geodesic_distance(p, [0.0, 0.0, -1.0]) == pytest.approx(math.pi)


def test_equispaced_circle_geometry_is_exact():
    cs = analyze_centers(1, equispaced_circle(64))
    assert cs.size == 64
    assert cs.sep_radius_q == pytest.approx(math.pi / 64, rel=1e-12)
    assert cs.mesh_norm_h == pytest.approx(math.pi / 64, rel=1e-12)
    assert cs.mesh_ratio_rho == pytest.approx(1.0, rel=1e-12)


def test_octahedron_geometry():
    cs = analyze_centers(2, octahedron())
    assert cs.sep_radius_q == pytest.approx(math.pi / 4, rel=1e-12)
    # covering radius of the octahedron: angle to a face center
    assert cs.mesh_norm_h == pytest.approx(math.acos(1 / math.sqrt(3)), abs=5e-2)
    assert cs.mesh_norm_h >= cs.sep_radius_q


def test_duplicate_points_rejected():
    pts = np.vstack([octahedron(), octahedron()[:1]])
    with pytest.raises(DuplicatePoints):
        analyze_centers(2, pts)


def test_bad_shapes_rejected():
    with pytest.raises(ValidationError):
        analyze_centers(2, equispaced_circle(8))
    with pytest.raises(ValidationError):
        analyze_centers(2, octahedron()[:1])


def test_generators():
    with pytest.raises(ValidationError):
        generate_points("nope", 2, 10)
    with pytest.raises(UnsupportedDimension):
        generate_points("fibonacci", 1, 10)
    pts = generate_points("uniform", 3, 20, np.random.default_rng(1))
    assert pts.shape == (20, 4)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)


def test_circle_refinement_is_dyadic_and_nested():
    base = analyze_centers(1, equispaced_circle(16))
    sets = refine_nested(base, 3)
    assert [cs.size for cs in sets] == [16, 32, 64, 128]
    for prev, cur in zip(sets, sets[1:]):
        assert np.array_equal(cur.points[:prev.size], prev.points)
        assert cur.mesh_norm_h == pytest.approx(prev.mesh_norm_h / 2, rel=1e-9)
        assert cur.mesh_ratio_rho <= 2.5


def test_sphere_refinement_halves_h():
    base = analyze_centers(2, fibonacci_sphere(40))
    sets = refine_nested(base, 2)
    assert len(sets) == 3
    for prev, cur in zip(sets, sets[1:]):
        assert np.array_equal(cur.points[:prev.size], prev.points)
        assert cur.mesh_norm_h <= prev.mesh_norm_h / 2 * (1 + 1e-9)
        assert cur.mesh_ratio_rho <= 2.5


def test_refinement_rejects_small_rho_cap():
    base = analyze_centers(1, equispaced_circle(8))
    with pytest.raises(ValidationError):
        refine_nested(base, 1, rho_cap=1.5)
    assert refine_nested(base, 0) == [base]


def test_circle_cells_are_exact():
    cs = analyze_centers(1, equispaced_circle(32))
    cells = build_cells(cs)
    assert np.allclose(cells.cell_measure, 2 * math.pi / 32)
    assert cells.total_measure == pytest.approx(2 * math.pi)


def test_voronoi_and_grid_cells_cover_the_sphere():
    cs = analyze_centers(2, fibonacci_sphere(100))
    voronoi = build_cells(cs, method="voronoi")
    grid = build_cells(cs, grid_resolution=96, method="grid")
    assert voronoi.total_measure == pytest.approx(4 * math.pi, rel=1e-10)
    assert grid.total_measure == pytest.approx(4 * math.pi, rel=1e-10)
    assert np.all(voronoi.cell_measure > 0)
    assert np.max(np.abs(voronoi.cell_measure - grid.cell_measure)) < 0.25 * np.mean(voronoi.cell_measure)


def test_rotation_keeps_separation():
    cs = analyze_centers(2, fibonacci_sphere(60))
    rotated = rotate(cs, random_rotation(2, np.random.default_rng(3)))
    assert rotated.sep_radius_q == pytest.approx(cs.sep_radius_q, rel=1e-9)
    assert rotated.mesh_norm_h == cs.mesh_norm_h


def test_sphere_grid_integrates_polynomials():
    pts, w = sphere_grid(2, 8)
    assert w.sum() == pytest.approx(4 * math.pi)
    assert np.dot(w, pts[:, 0] ** 2) == pytest.approx(4 * math.pi / 3)
    pts, w = sphere_grid(1, 16)
    assert np.dot(w, pts[:, 1] ** 4) == pytest.approx(2 * math.pi * 3 / 8)


def test_cap_volume_floor():
    assert cap_volume_constant(2) == pytest.approx(2.0)
    for q in np.linspace(0.05, math.pi / 2, 12):
        assert 2 * math.pi * (1 - math.cos(q)) >= cap_volume_constant(2) * q ** 2
    assert cap_volume_constant(1) == pytest.approx(2.0)
