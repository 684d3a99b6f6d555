"""Positive-weight quadrature and Marcinkiewicz-Zygmund sums for sbfctl."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np
from scipy.linalg import lstsq
from scipy.special import roots_legendre

from errors import (InfeasibleMoments, NegativeWeight, UnsupportedDimension,
                    ValidationError)
from harmonics import PolynomialOnSphere, lambda_n, poly_dimension, real_harmonics
from sphere_geometry import (CellDecomposition, CenterSet, build_cells, point_coords,
                             sphere_grid, sphere_volume)

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-9
DEFAULT_FEASIBILITY = 0.25
# relative disagreement between a grid norm and its refinement worth a warning
REFINEMENT_WARNING = 1e-2


@dataclass(frozen=True)
class QuadratureRule:
    """Weights c_xi exact on Pi_L, anchored at the cell measures mu(R_xi)."""
    centers: CenterSet
    degree_L: int
    weights: np.ndarray
    exactness_residual: float
    anchor: np.ndarray
    threshold: float = DEFAULT_FEASIBILITY
    anchor_method: str = "voronoi"

    @property
    def feasibility(self) -> float:
        """h (L + lambda_n), compared against the threshold."""
        return self.centers.mesh_norm_h * (self.degree_L + lambda_n(self.centers.dim_n))

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def certificate(self) -> Dict[str, float]:
        h = self.centers.mesh_norm_h
        return {
            "degree": self.degree_L,
            "N": self.centers.size,
            "residual": self.exactness_residual,
            "min_weight": float(np.min(self.weights)),
            "max_weight": float(np.max(self.weights)),
            "weight_scale": float(np.max(self.weights) / h ** self.centers.dim_n),
            "feasibility": self.feasibility,
            "threshold": self.threshold,
            "anchor": self.anchor_method,
        }


def moment_vector(n: int, L: int) -> np.ndarray:
    """Integrals of the orthonormal basis of Pi_L: sqrt(omega_n) for Y_0, else 0."""
    b = np.zeros(poly_dimension(n, L))
    b[0] = math.sqrt(sphere_volume(n))
    return b


def build_rule(cs: CenterSet, L: int, threshold: float = DEFAULT_FEASIBILITY,
               strict: bool = False, cells: Optional[CellDecomposition] = None,
               anchor_method: str = "voronoi") -> QuadratureRule:
    """Positive weights exact on Pi_L closest to the cell measures.

    The weights minimize sum (c - mu)^2 / mu under the moment constraints,
    computed as the minimum-norm least-squares solution of the scaled system.

    Args:
        cs: Center set on S^1 or S^2
        L: Exactness degree
        threshold: Feasibility threshold for h (L + lambda_n)
        strict: Raise instead of warning when the threshold is exceeded
        cells: Precomputed anchor cells (built when omitted)
        anchor_method: Cell method for the anchor ('voronoi' or 'grid')

    Raises:
        UnsupportedDimension: For n >= 3
        ValidationError: If dim Pi_L exceeds the number of centers
        InfeasibleMoments: If the moment system cannot be met
        NegativeWeight: If the solution has a non-positive weight
    """
    n = cs.dim_n
    if n > 2:
        raise UnsupportedDimension("quadrature rules are built for n <= 2 only", n=n)
    if L < 0:
        raise ValidationError(f"degree must be >= 0, got {L}")
    if poly_dimension(n, L) > cs.size:
        raise ValidationError("more moments than centers", dim=poly_dimension(n, L),
                              N=cs.size, degree=L)
    feasibility = cs.mesh_norm_h * (L + lambda_n(n))
    if feasibility > threshold:
        if strict:
            raise InfeasibleMoments("mesh too coarse for the requested degree",
                                    feasibility=feasibility, threshold=threshold)
        logger.warning(f"h(L + lambda) = {feasibility:.4g} exceeds the feasibility "
                       f"threshold {threshold}; exactness is still certified")

    cells = cells or build_cells(cs, method=anchor_method)
    mu = cells.cell_measure
    Y = real_harmonics(n, L, cs.points)
    b = moment_vector(n, L)
    root = np.sqrt(mu)
    system = Y.T * root[None, :]
    z, _, rank, _ = lstsq(system, b - Y.T @ mu)
    c = mu + root * z
    residual = float(np.max(np.abs(Y.T @ c - b)))
    logger.debug(f"Moment system {system.shape} rank={rank} residual={residual:.3g}")
    if not residual < RESIDUAL_TOLERANCE:
        raise InfeasibleMoments("moment system has no exact solution", residual=residual,
                                rank=int(rank), degree=L)
    if np.min(c) <= 0:
        raise NegativeWeight("geometry too irregular for the requested degree",
                             min_weight=float(np.min(c)), degree=L)
    rule = QuadratureRule(cs, L, c, residual, mu, threshold, cells.method)
    logger.info(f"Built rule on N={cs.size}: {rule.certificate()}")
    return rule


def build_rule_with_backoff(cs: CenterSet, L: int, min_degree: int = 0,
                            **kwargs) -> QuadratureRule:
    """build_rule, lowering L on NegativeWeight until a rule exists."""
    if "cells" not in kwargs:
        kwargs["cells"] = build_cells(cs, method=kwargs.get("anchor_method", "voronoi"))
    degree = L
    while True:
        try:
            return build_rule(cs, degree, **kwargs)
        except NegativeWeight as e:
            if degree <= min_degree:
                raise
            logger.warning(f"Negative weight at L={degree} "
                           f"(min {e.details['min_weight']:.3g}); backing off")
            degree -= 1


def _grid_norm(f: Callable, n: int, p: float, resolution: int) -> float:
    pts, w = sphere_grid(n, resolution)
    vals = np.abs(np.asarray(f(pts), dtype=float))
    if math.isinf(p):
        return float(np.max(vals))
    return float(np.sum(w * vals ** p) ** (1.0 / p))


def lp_norm_on_grid(f: Callable, n: int, p: float, band_hint: int) -> float:
    """||f||_p on S^1 or S^2 from a product grid.

    p = 2 is exact for f band-limited to band_hint. Other p take one grid
    refinement and return the finer value.

    Args:
        f: Function of an (M, n + 1) point array
        n: Sphere dimension
        p: Norm exponent in [1, inf]
        band_hint: Band limit of f (or a resolution hint)
    """
    if n > 2:
        raise UnsupportedDimension("grid norms exist for n <= 2 only", n=n)
    base = band_hint + 2 if n == 2 else 2 * band_hint + 2
    coarse = _grid_norm(f, n, p, base)
    if p == 2:
        return coarse
    fine = _grid_norm(f, n, p, 2 * base)
    if fine > 0 and abs(fine - coarse) > REFINEMENT_WARNING * fine:
        logger.warning(f"L^{p} grid norm moved {abs(fine - coarse) / fine:.2%} under refinement")
    return fine


def zonal_lp_norm(func: Callable, n: int, p: float, nodes: int = 4096) -> float:
    """||F(eta . x)||_p for a zonal profile F by quadrature in theta.

    ||F||_p^p = omega_{n-1} int_0^pi |F(cos theta)|^p sin^(n-1)(theta) dtheta
    """
    panels = max(1, nodes // 8)
    x, w = roots_legendre(8)
    edges = np.linspace(0.0, np.pi, panels + 1)
    half = 0.5 * np.diff(edges)
    theta = (edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)).ravel()
    if math.isinf(p):
        theta = np.concatenate([[0.0], theta, [np.pi]])
        return float(np.max(np.abs(func(np.cos(theta)))))
    weights = (half[:, None] * w[None, :]).ravel()
    vals = np.abs(np.asarray(func(np.cos(theta)), dtype=float)) ** p
    total = sphere_volume(n - 1) * np.sum(vals * np.sin(theta) ** (n - 1) * weights)
    return float(total ** (1.0 / p))


def mz_discrepancy(k_eps, cells: CellDecomposition, zeta) -> float:
    """| ||K_eps||_1 - sum_xi mu(R_xi) |K_eps(xi . zeta)| | over the cell owners xi."""
    z = point_coords(zeta)
    vals = np.abs(k_eps.evaluate(np.clip(cells.owner.points @ z, -1.0, 1.0)))
    return abs(k_eps.l1_norm() - float(np.dot(cells.cell_measure, vals)))


def offdiag_kernel_sum(k_eps, cs: CenterSet) -> float:
    """max over zeta in X of sum_{xi != zeta} |K_eps(xi . zeta)|."""
    if not np.any(k_eps.coeffs):
        return 0.0
    table = k_eps.tabulate()
    gram = np.clip(cs.points @ cs.points.T, -1.0, 1.0)
    vals = np.abs(k_eps.evaluate_fast(gram, table))
    np.fill_diagonal(vals, 0.0)
    return float(np.max(np.sum(vals, axis=1)))


def mz_sum(poly: PolynomialOnSphere, cells: CellDecomposition) -> float:
    """sum_xi mu(R_xi) |S(xi)|."""
    return float(np.dot(cells.cell_measure, np.abs(poly.evaluate(cells.owner.points))))


def mz_ratio(poly: PolynomialOnSphere, cells: CellDecomposition, bound: float = 1.25) -> float:
    """mz_sum / ||S||_1; ratios above the bound are logged as geometry failures."""
    ratio = mz_sum(poly, cells) / lp_norm_on_grid(poly.evaluate, poly.dim_n, 1.0, poly.degree)
    if ratio > bound:
        logger.warning(f"MZ inequality violated: ratio {ratio:.4f} > {bound} "
                       f"at L={poly.degree}, N={cells.owner.size}")
    return ratio
