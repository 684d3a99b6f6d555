"""Point sets on the sphere for sbfctl.

Center sets live on S^n embedded in R^{n+1}; distances are geodesic (radians).
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.spatial import SphericalVoronoi, cKDTree
from scipy.special import gammaln, roots_legendre
from scipy.stats import special_ortho_group

from errors import (DuplicatePoints, EmptyCell, RefinementStall,
                    UnsupportedDimension, ValidationError)

logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-12
DUPLICATE_TOLERANCE = 1e-12
MIN_MESH_GRID = 4096
MAX_MESH_GRID = 2_000_000


def sphere_volume(n: int) -> float:
    """Surface measure omega_n of S^n (omega_0 = 2)."""
    return float(2.0 * math.exp(0.5 * (n + 1) * math.log(math.pi) - gammaln(0.5 * (n + 1))))


def cap_volume_constant(n: int) -> float:
    """Constant c_n with vol(cap of radius q) >= c_n q^n for q <= pi/2.

    Every Voronoi cell of a set with separation radius q contains the cap of
    radius q about its center, so this is also a floor for the cell measures.
    Uses sin(theta) >= 2 theta / pi.
    """
    return sphere_volume(n - 1) * (2.0 / math.pi) ** (n - 1) / n


@dataclass(frozen=True)
class SpherePoint:
    """A unit vector in R^{n+1}."""
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float).reshape(-1)
        if coords.size < 2:
            raise ValidationError("a sphere point needs at least two coordinates")
        if abs(np.linalg.norm(coords) - 1.0) > UNIT_TOLERANCE:
            raise ValidationError("sphere point is not a unit vector",
                                  norm=float(np.linalg.norm(coords)))
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def dim_n(self) -> int:
        return self.coords.size - 1


PointLike = Union[SpherePoint, Sequence[float], np.ndarray]


def point_coords(p: PointLike) -> np.ndarray:
    if isinstance(p, SpherePoint):
        return p.coords
    return np.asarray(p, dtype=float)


def geodesic_distance(p: PointLike, q: PointLike) -> float:
    """Arc length between two unit vectors, in [0, pi]."""
    dot = float(np.dot(point_coords(p), point_coords(q)))
    return math.acos(min(1.0, max(-1.0, dot)))


def chordal_to_geodesic(chord):
    """Convert Euclidean chord length(s) to arc length(s)."""
    return 2.0 * np.arcsin(np.clip(np.asarray(chord, dtype=float) / 2.0, 0.0, 1.0))


def pairwise_geodesic(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geodesic distance matrix between rows of a and rows of b."""
    return np.arccos(np.clip(np.asarray(a) @ np.asarray(b).T, -1.0, 1.0))


@dataclass(frozen=True)
class CenterSet:
    """Finite set of distinct points on S^n with cached geometry.

    ``grid_points`` records how many evaluation points the mesh-norm supremum
    used (0 when h is exact, as on the circle).
    """
    dim_n: int
    points: np.ndarray
    sep_radius_q: float
    mesh_norm_h: float
    mesh_ratio_rho: float
    grid_points: int = 0

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def point(self, index: int) -> SpherePoint:
        return SpherePoint(self.points[index])

    def summary(self) -> Dict[str, float]:
        return {
            "n": self.dim_n,
            "N": self.size,
            "q": self.sep_radius_q,
            "h": self.mesh_norm_h,
            "rho": self.mesh_ratio_rho,
        }


def _validate_points(dim_n: int, points) -> np.ndarray:
    if dim_n < 1:
        raise ValidationError(f"sphere dimension must be >= 1, got {dim_n}")
    pts = np.array(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != dim_n + 1:
        raise ValidationError(f"points must have shape (N, {dim_n + 1})",
                              shape=tuple(pts.shape))
    if pts.shape[0] < 2:
        raise ValidationError("a center set needs at least two points", N=pts.shape[0])
    norms = np.linalg.norm(pts, axis=1)
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > 1e-10:
        raise ValidationError("center coordinates are not unit vectors", max_deviation=worst)
    pts.setflags(write=False)
    return pts


def separation_radius(points: np.ndarray) -> float:
    """Half the minimal pairwise geodesic distance.

    Raises:
        DuplicatePoints: If two points are closer than 1e-12 rad
    """
    chord, idx = cKDTree(points).query(points, k=2)
    nearest = chordal_to_geodesic(chord[:, 1])
    i = int(np.argmin(nearest))
    if nearest[i] < DUPLICATE_TOLERANCE:
        raise DuplicatePoints("center set contains coincident points",
                              first=i, second=int(idx[i, 1]))
    return float(nearest[i]) / 2.0


def circle_angles(points: np.ndarray) -> np.ndarray:
    return np.mod(np.arctan2(points[:, 1], points[:, 0]), 2.0 * np.pi)


def _circle_gaps(points: np.ndarray):
    order = np.argsort(circle_angles(points), kind="stable")
    ang = circle_angles(points)[order]
    gaps = np.diff(np.append(ang, ang[0] + 2.0 * np.pi))
    return order, ang, gaps


def fibonacci_grid(m: int) -> np.ndarray:
    """Golden-section spiral of m points on S^2."""
    inc = np.pi * (3.0 - np.sqrt(5.0))
    off = 2.0 / m
    k = np.arange(m)
    y = k * off - 1.0 + off / 2.0
    r = np.sqrt(np.clip(1.0 - y * y, 0.0, None))
    phi = k * inc
    return np.column_stack([np.cos(phi) * r, y, np.sin(phi) * r])


def random_grid(dim_n: int, m: int, seed: int = 0) -> np.ndarray:
    """Seeded i.i.d. uniform sample of m points on S^n."""
    g = np.random.default_rng(seed).standard_normal((m, dim_n + 1))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def mesh_grid_size(dim_n: int, spacing: float,
                   max_grid_points: int = MAX_MESH_GRID) -> int:
    """Number of grid points whose typical spacing is ``spacing``."""
    area = sphere_volume(dim_n) / max(spacing, 1e-9) ** dim_n
    return int(min(max(math.ceil(area), MIN_MESH_GRID), max_grid_points))


def evaluation_grid(dim_n: int, m: int, seed: int = 0) -> np.ndarray:
    if dim_n == 2:
        return fibonacci_grid(m)
    return random_grid(dim_n, m, seed)


def covering_radius(points: np.ndarray, grid: np.ndarray) -> float:
    """Largest geodesic distance from a grid point to its nearest center."""
    chord, _ = cKDTree(points).query(grid, k=1)
    return float(chordal_to_geodesic(np.max(chord)))


def mesh_norm(dim_n: int, points: np.ndarray, q: float, grid_factor: float = 4.0,
              max_grid_points: int = MAX_MESH_GRID, seed: int = 0):
    """Mesh norm h and the number of grid points used for it.

    On S^1 the value is exact (half the largest angular gap). Otherwise it is
    the supremum over a grid of per-axis spacing about q / grid_factor, which
    is at least grid_factor times finer than h because h >= q.
    """
    if dim_n == 1:
        _, _, gaps = _circle_gaps(points)
        return float(np.max(gaps)) / 2.0, 0
    m = mesh_grid_size(dim_n, q / grid_factor, max_grid_points)
    grid = evaluation_grid(dim_n, m, seed)
    h = covering_radius(points, grid)
    logger.debug(f"Mesh norm over {m} grid points on S^{dim_n}: h={h:.6g}")
    return max(h, q), m


def analyze_centers(dim_n: int, points, grid_factor: float = 4.0,
                    max_grid_points: int = MAX_MESH_GRID, seed: int = 0) -> CenterSet:
    """Build a CenterSet with separation radius, mesh norm and mesh ratio.

    Args:
        dim_n: Sphere dimension n
        points: Array of shape (N, n+1) of unit vectors
        grid_factor: Mesh-norm grid refinement relative to q
        max_grid_points: Cap on the mesh-norm grid size
        seed: Seed of the random grid used for n >= 3

    Returns:
        CenterSet

    Raises:
        DuplicatePoints: If two centers coincide
    """
    pts = _validate_points(dim_n, points)
    q = separation_radius(pts)
    h, m = mesh_norm(dim_n, pts, q, grid_factor, max_grid_points, seed)
    return CenterSet(dim_n, pts, q, h, h / q, m)


def _with_mesh_norm(dim_n: int, points: np.ndarray, h: float, m: int) -> CenterSet:
    pts = np.array(points, dtype=float)
    pts.setflags(write=False)
    q = separation_radius(pts)
    h = max(h, q)
    return CenterSet(dim_n, pts, q, h, h / q, m)


# Point generators

def equispaced_circle(count: int, offset: float = 0.0) -> np.ndarray:
    theta = offset + 2.0 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(theta), np.sin(theta)])


def fibonacci_sphere(count: int) -> np.ndarray:
    return fibonacci_grid(count)


def _radical_inverse_base2(k: np.ndarray) -> np.ndarray:
    out = np.zeros(k.shape, dtype=float)
    k = k.copy()
    scale = 0.5
    while np.any(k):
        out += scale * (k & 1)
        k >>= 1
        scale *= 0.5
    return out


def hammersley_sphere(count: int) -> np.ndarray:
    k = np.arange(count, dtype=np.int64)
    z = 1.0 - 2.0 * (k + 0.5) / count
    phi = 2.0 * np.pi * _radical_inverse_base2(k)
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def octahedron() -> np.ndarray:
    eye = np.eye(3)
    return np.vstack([eye, -eye])


def uniform_random(dim_n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((count, dim_n + 1))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


# generator name -> (required sphere dimension or None, factory)
GENERATORS: Dict[str, tuple] = {
    "equispaced": (1, lambda count, n, rng: equispaced_circle(count)),
    "fibonacci": (2, lambda count, n, rng: fibonacci_sphere(count)),
    "hammersley": (2, lambda count, n, rng: hammersley_sphere(count)),
    "octahedron": (2, lambda count, n, rng: octahedron()),
    "uniform": (None, lambda count, n, rng: uniform_random(n, count, rng)),
}


def generate_points(name: str, dim_n: int, count: int,
                    rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Generate points with one of the shipped families."""
    if name not in GENERATORS:
        raise ValidationError(f"unknown point generator '{name}'",
                              choices=",".join(sorted(GENERATORS)))
    required, factory = GENERATORS[name]
    if required is not None and dim_n != required:
        raise UnsupportedDimension(f"generator '{name}' is defined on S^{required} only",
                                   n=dim_n)
    if rng is None:
        rng = np.random.default_rng(0)
    return factory(count, dim_n, rng)


def random_rotation(dim_n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random rotation of R^{n+1}."""
    return special_ortho_group.rvs(dim_n + 1, random_state=rng)


def rotate(cs: CenterSet, rotation: np.ndarray) -> CenterSet:
    """Apply a rotation to every center; q, h and rho carry over."""
    pts = cs.points @ np.asarray(rotation).T
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return _with_mesh_norm(cs.dim_n, pts, cs.mesh_norm_h, cs.grid_points)


def sphere_grid(dim_n: int, n_polar: int, n_azimuth: Optional[int] = None):
    """Product quadrature grid on S^1 or S^2.

    On S^2 this is Gauss-Legendre in cos(theta) times the trapezoid rule in
    azimuth. It integrates polynomials of degree <= min(2 n_polar - 1,
    n_azimuth - 1) exactly.

    Returns:
        (points, weights) with weights summing to omega_n
    """
    if dim_n == 1:
        count = n_polar if n_azimuth is None else n_azimuth
        theta = 2.0 * np.pi * np.arange(count) / count
        pts = np.column_stack([np.cos(theta), np.sin(theta)])
        return pts, np.full(count, 2.0 * np.pi / count)
    if dim_n != 2:
        raise UnsupportedDimension("product grids exist for n <= 2 only", n=dim_n)
    if n_azimuth is None:
        n_azimuth = 2 * n_polar
    z, wz = roots_legendre(n_polar)
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    pts = np.empty((n_polar, n_azimuth, 3))
    pts[..., 0] = s[:, None] * np.cos(phi)[None, :]
    pts[..., 1] = s[:, None] * np.sin(phi)[None, :]
    pts[..., 2] = z[:, None]
    weights = np.repeat(wz * (2.0 * np.pi / n_azimuth), n_azimuth)
    return pts.reshape(-1, 3), weights


def refine_nested(base: CenterSet, levels: int, rho_cap: float = 2.5,
                  max_insertions: int = 200_000, seed: int = 0) -> List[CenterSet]:
    """Nested refinements X_0 in X_1 in ... with halving mesh norms.

    Points are inserted greedily (farthest candidate first) until the mesh
    norm halves. On S^1 the candidate is the midpoint of the largest gap
    (lowest index on ties), so equispaced sets refine dyadically. All levels
    measure h on one shared candidate grid, and every set is the previous
    one with rows appended.

    Args:
        base: Starting set X_0
        levels: Number of refinements
        rho_cap: Upper bound on the mesh ratio of every level (>= 2)
        max_insertions: Insertion budget over all levels
        seed: Seed of the candidate grid for n >= 3

    Returns:
        List of levels + 1 center sets

    Raises:
        RefinementStall: If halving or the rho cap cannot be met
    """
    if rho_cap < 2:
        raise ValidationError(f"rho_cap must be >= 2, got {rho_cap}")
    if levels < 0:
        raise ValidationError(f"levels must be >= 0, got {levels}")
    if levels == 0:
        return [base]
    if base.dim_n == 1:
        return _refine_circle(base, levels, rho_cap, max_insertions)
    return _refine_grid(base, levels, rho_cap, max_insertions, seed)


def _check_level(sets: List[CenterSet], rho_cap: float):
    prev, cur = sets[-2], sets[-1]
    if not cur.mesh_norm_h > prev.mesh_norm_h / 4.0:
        raise RefinementStall("mesh norm dropped below a quarter of the previous level",
                              level=len(sets) - 1, h=cur.mesh_norm_h)
    if cur.mesh_ratio_rho > rho_cap:
        raise RefinementStall("mesh ratio exceeds the cap",
                              level=len(sets) - 1, rho=cur.mesh_ratio_rho, cap=rho_cap)
    logger.info(f"Refinement level {len(sets) - 1}: N={cur.size} "
                f"h={cur.mesh_norm_h:.6g} q={cur.sep_radius_q:.6g} rho={cur.mesh_ratio_rho:.4g}")


def _refine_circle(base: CenterSet, levels: int, rho_cap: float,
                   budget: int) -> List[CenterSet]:
    sets = [base]
    pts = np.array(base.points)
    inserted = 0
    for _ in range(levels):
        target = sets[-1].mesh_norm_h / 2.0 * (1.0 + 1e-9)
        while True:
            _, ang, gaps = _circle_gaps(pts)
            if np.max(gaps) / 2.0 <= target:
                break
            if inserted >= budget:
                raise RefinementStall("insertion budget exhausted", inserted=inserted)
            k = int(np.argmax(gaps))
            mid = ang[k] + gaps[k] / 2.0
            pts = np.vstack([pts, [[math.cos(mid), math.sin(mid)]]])
            inserted += 1
        _, _, gaps = _circle_gaps(pts)
        sets.append(_with_mesh_norm(1, pts, float(np.max(gaps)) / 2.0, 0))
        _check_level(sets, rho_cap)
    return sets


def _refine_grid(base: CenterSet, levels: int, rho_cap: float,
                 budget: int, seed: int) -> List[CenterSet]:
    n = base.dim_n
    final_h = base.mesh_norm_h / 2.0 ** levels
    m = mesh_grid_size(n, final_h / 4.0)
    grid = evaluation_grid(n, m, seed)
    logger.info(f"Refining on a shared grid of {m} candidates")

    # nearest-center cosine per candidate; farthest candidate = smallest cosine
    best_cos = np.max(grid @ base.points.T, axis=1)
    h0 = float(np.arccos(np.clip(best_cos.min(), -1.0, 1.0)))
    sets = [_with_mesh_norm(n, base.points, h0, m)]
    pts = [row for row in base.points]
    inserted = 0
    for _ in range(levels):
        target = sets[-1].mesh_norm_h / 2.0 * (1.0 + 1e-9)
        while True:
            far = int(np.argmin(best_cos))
            h = float(np.arccos(np.clip(best_cos[far], -1.0, 1.0)))
            if h <= target:
                break
            if inserted >= budget:
                raise RefinementStall("insertion budget exhausted", inserted=inserted)
            p = grid[far].copy()
            pts.append(p)
            np.maximum(best_cos, grid @ p, out=best_cos)
            inserted += 1
        sets.append(_with_mesh_norm(n, np.array(pts), h, m))
        _check_level(sets, rho_cap)
    return sets


@dataclass(frozen=True)
class CellDecomposition:
    """Measured Voronoi cells of a center set."""
    owner: CenterSet
    cell_measure: np.ndarray
    partition_norm: float
    method: str
    grid_points: int = 0

    @property
    def total_measure(self) -> float:
        return float(np.sum(self.cell_measure))


def default_cell_resolution(cs: CenterSet) -> int:
    """Polar node count putting a few dozen grid points in the smallest cell."""
    return int(math.ceil(max(64.0, 16.0 / cs.sep_radius_q)))


def build_cells(cs: CenterSet, grid_resolution: Optional[int] = None,
                method: str = "grid") -> CellDecomposition:
    """Cell decomposition with cell measures and partition norm.

    Args:
        cs: Center set
        grid_resolution: Polar node count of the assignment grid on S^2
        method: 'grid' (nearest-center assignment of a quadrature grid) or
            'voronoi' (exact spherical Voronoi areas)

    Raises:
        EmptyCell: If a center receives no grid point
    """
    if cs.dim_n == 1:
        return _circle_cells(cs)
    if cs.dim_n != 2:
        raise UnsupportedDimension("cell decompositions exist for n <= 2 only", n=cs.dim_n)
    if method == "voronoi":
        try:
            return _voronoi_cells(cs)
        except (ValueError, RuntimeError) as e:
            logger.warning(f"Spherical Voronoi failed ({e}); falling back to grid cells")
    elif method != "grid":
        raise ValidationError(f"unknown cell method '{method}'")
    return _grid_cells(cs, grid_resolution or default_cell_resolution(cs))


def _circle_cells(cs: CenterSet) -> CellDecomposition:
    order, _, gaps = _circle_gaps(cs.points)
    cell = 0.5 * (gaps + np.roll(gaps, 1))
    measure = np.empty(cs.size)
    measure[order] = cell
    diameter = np.minimum(cell, 2.0 * np.pi - cell)
    return CellDecomposition(cs, measure, float(np.max(diameter)), "exact")


def _grid_cells(cs: CenterSet, resolution: int) -> CellDecomposition:
    grid, weights = sphere_grid(2, resolution)
    chord, owner = cKDTree(cs.points).query(grid, k=1)
    measure = np.bincount(owner, weights=weights, minlength=cs.size)
    counts = np.bincount(owner, minlength=cs.size)
    if np.any(counts == 0):
        empty = int(np.flatnonzero(counts == 0)[0])
        raise EmptyCell("a center received no grid points; increase grid_resolution",
                        center=empty, resolution=resolution)

    # two-sweep diameter: a = farthest from the center, then farthest from a
    order = np.lexsort((chord, owner))
    starts = np.flatnonzero(np.r_[True, np.diff(owner[order]) != 0])
    ends = np.r_[starts[1:], order.size] - 1
    far_a = grid[order[ends]]
    cos_ab = np.sum(grid[order] * far_a[owner[order]], axis=1)
    min_cos = np.minimum.reduceat(cos_ab, starts)
    min_cos = np.minimum(min_cos, np.sum(far_a * cs.points, axis=1))
    diameter = np.arccos(np.clip(min_cos, -1.0, 1.0))
    return CellDecomposition(cs, measure, float(np.max(diameter)), "grid", grid.shape[0])


def _voronoi_cells(cs: CenterSet) -> CellDecomposition:
    sv = SphericalVoronoi(cs.points, radius=1.0, center=np.zeros(3))
    sv.sort_vertices_of_regions()
    areas = sv.calculate_areas()
    diameter = 0.0
    for region in sv.regions:
        v = sv.vertices[region]
        diameter = max(diameter, float(np.max(pairwise_geodesic(v, v))))
    return CellDecomposition(cs, np.asarray(areas, dtype=float), diameter, "voronoi")
