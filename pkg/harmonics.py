"""Ultraspherical polynomials and spherical harmonics for sbfctl.

Conventions shared by every module:
    lambda_n = (n - 1) / 2
    R_l(t) = C_l^lambda(t) / C_l^lambda(1)  (T_l(t) when n = 1)
    P_l(t) = d_l R_l(t) / omega_n           (projection kernel onto H_l)
    nu(l) = max(l + lambda_n, 1/2)           (symbol of L_n = sqrt(lambda^2 - Laplacian))
A zonal function is phi(t) = sum_l phihat(l) P_l(t).
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln, roots_jacobi

from errors import UnsupportedDimension, ValidationError
from sphere_geometry import SpherePoint, sphere_volume

logger = logging.getLogger(__name__)

# matrix entries held at once when evaluating harmonic expansions
EVAL_CHUNK = 4_000_000


def lambda_n(n: int) -> float:
    return 0.5 * (n - 1)


def spectral_symbol(n: int, degrees) -> np.ndarray:
    """nu(l) = l + lambda_n, floored at 1/2 so L_1 is invertible on constants."""
    return np.maximum(np.asarray(degrees, dtype=float) + lambda_n(n), 0.5)


def eigenspace_dim(n: int, l: int) -> int:
    """Dimension d_l^n of the degree-l harmonic space on S^n."""
    if n < 1 or l < 0:
        raise ValidationError(f"need n >= 1 and l >= 0, got n={n}, l={l}")
    if n == 1:
        return 1 if l == 0 else 2
    return math.comb(l + n, n) - math.comb(l + n - 2, n)


def eigenspace_dims(n: int, max_degree: int) -> np.ndarray:
    """d_l^n for l = 0..max_degree as floats."""
    l = np.arange(max_degree + 1, dtype=float)
    if n == 1:
        d = np.full(l.size, 2.0)
        d[0] = 1.0
        return d
    # d_l = (2l + n - 1) (l + n - 2)! / (l! (n - 1)!)
    log_d = (np.log(2.0 * l + n - 1) + gammaln(l + n - 1)
             - gammaln(l + 1) - gammaln(n))
    return np.exp(log_d)


def poly_dimension(n: int, L: int) -> int:
    """Dimension of Pi_L on S^n."""
    if L < 0:
        return 0
    return math.comb(L + n, n) + math.comb(L + n - 1, n)


def laplace_beltrami_eigenvalue(n: int, l: int) -> float:
    """-l(l + n - 1), which equals lambda_n^2 - (l + lambda_n)^2."""
    return -float(l * (l + n - 1))


def normalized_gegenbauer_table(lam: float, max_degree: int, t) -> np.ndarray:
    """R_0..R_L at t, shape (L + 1,) + t.shape.

    R_{k+1} = (2(k + lambda) t R_k - k R_{k-1}) / (k + 2 lambda) with R_0 = 1,
    R_1 = t. The normalized values stay in [-1, 1], which keeps the forward
    recurrence stable for high degrees.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty((max_degree + 1,) + t.shape)
    out[0] = 1.0
    if max_degree >= 1:
        out[1] = t
    for k in range(1, max_degree):
        out[k + 1] = (2.0 * (k + lam) * t * out[k] - k * out[k - 1]) / (k + 2.0 * lam)
    return out


def gegenbauer(lam: float, l: int, t):
    """C_l^lambda(t) by forward recurrence, or T_l(t) when lambda = 0."""
    if lam < 0:
        raise ValidationError(f"lambda must be >= 0, got {lam}")
    t = np.asarray(t, dtype=float)
    if lam == 0:
        prev, cur = np.ones_like(t), t.copy()
        if l == 0:
            return prev if prev.ndim else float(prev)
        for _ in range(1, l):
            prev, cur = cur, 2.0 * t * cur - prev
        return cur if cur.ndim else float(cur)
    prev, cur = np.ones_like(t), 2.0 * lam * t
    if l == 0:
        return prev if prev.ndim else float(prev)
    for k in range(1, l):
        prev, cur = cur, (2.0 * (k + lam) * t * cur - (k + 2.0 * lam - 1.0) * prev) / (k + 1.0)
    return cur if cur.ndim else float(cur)


@dataclass(frozen=True)
class UltrasphericalBasis:
    """C_0^lambda..C_L^lambda of order lambda_n, with T_l standing in when lambda = 0."""
    lam: float
    max_degree: int

    def __post_init__(self):
        if self.lam < 0 or self.max_degree < 0:
            raise ValidationError(f"need lambda >= 0 and L >= 0, got {self.lam}, {self.max_degree}")

    @classmethod
    def for_dimension(cls, n: int, max_degree: int) -> "UltrasphericalBasis":
        return cls(lambda_n(n), max_degree)

    def at_one(self) -> np.ndarray:
        """C_l^lambda(1) = (2 lambda)_l / l!, and 1 for Chebyshev."""
        l = np.arange(self.max_degree + 1, dtype=float)
        if self.lam == 0:
            return np.ones(l.size)
        two = 2.0 * self.lam
        return np.exp(gammaln(l + two) - gammaln(two) - gammaln(l + 1))

    def normalized(self, t) -> np.ndarray:
        """R_0..R_L at t, shape (L + 1,) + t.shape."""
        return normalized_gegenbauer_table(self.lam, self.max_degree, t)

    def values(self, t) -> np.ndarray:
        table = self.normalized(t)
        scale = self.at_one().reshape((-1,) + (1,) * (table.ndim - 1))
        return table * scale


@dataclass(frozen=True)
class HarmonicSpace:
    """The space H_l of degree-l spherical harmonics on S^n."""
    dim_n: int
    degree_l: int

    @property
    def dimension(self) -> int:
        return eigenspace_dim(self.dim_n, self.degree_l)


def projection_kernel(n: int, l: int, t):
    """Reproducing kernel P_l(t) of H_l."""
    r = UltrasphericalBasis.for_dimension(n, l).normalized(t)[l]
    val = eigenspace_dim(n, l) * r / sphere_volume(n)
    return val if np.ndim(val) else float(val)


def zonal_series(coeffs, n: int, t) -> np.ndarray:
    """Evaluate sum_l coeffs[l] P_l(t) by a streaming recurrence.

    Memory stays proportional to t; t may have any shape.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    weights = coeffs * eigenspace_dims(n, coeffs.size - 1) / sphere_volume(n)
    return legendre_sum(weights, lambda_n(n), t)


def legendre_sum(weights, lam: float, t) -> np.ndarray:
    """sum_l weights[l] R_l(t) without storing the table."""
    weights = np.asarray(weights, dtype=float)
    t = np.asarray(t, dtype=float)
    total = np.full(t.shape, weights[0] if weights.size else 0.0)
    if weights.size < 2:
        return total
    prev = np.ones_like(t)
    cur = t.copy()
    total += weights[1] * cur
    for k in range(1, weights.size - 1):
        prev, cur = cur, (2.0 * (k + lam) * t * cur - k * prev) / (k + 2.0 * lam)
        if weights[k + 1] != 0.0:
            total += weights[k + 1] * cur
    return total


def funk_hecke_coefficients(func: Callable, n: int, max_degree: int,
                            count: Optional[int] = None,
                            endpoint_power: float = 0.0) -> np.ndarray:
    """Coefficients phihat(0..L) of a zonal function by Gauss-Jacobi quadrature.

    phihat(l) = omega_{n-1} int_{-1}^{1} phi(x) R_l(x) (1 - x^2)^(lambda - 1/2) dx

    Args:
        func: Vectorized phi(t)
        n: Sphere dimension
        max_degree: Largest degree L
        count: Number of quadrature nodes (default 2L + 64)
        endpoint_power: s > -lambda - 1/2 to absorb a (1 - x)^s factor into the
            weight; func must then return phi(x) / (1 - x)^s

    Returns:
        Array of L + 1 coefficients
    """
    if count is None:
        count = 2 * max_degree + 64
    a = lambda_n(n) - 0.5
    x, w = roots_jacobi(count, a + endpoint_power, a)
    vals = np.asarray(func(x), dtype=float) * w
    table = UltrasphericalBasis.for_dimension(n, max_degree).normalized(x)
    return sphere_volume(n - 1) * (table @ vals)


def degree_offsets(n: int, L: int) -> np.ndarray:
    """Start column of each degree block in the flat harmonic ordering."""
    return np.array([poly_dimension(n, l - 1) for l in range(L + 2)])


def degree_index(n: int, L: int) -> np.ndarray:
    """Degree l of every column of the flat harmonic ordering."""
    return np.concatenate([np.full(eigenspace_dim(n, l), l) for l in range(L + 1)])


def _require_low_dim(n: int):
    if n not in (1, 2):
        raise UnsupportedDimension("pointwise harmonic bases exist for n <= 2 only", n=n)


def real_harmonics(n: int, L: int, points) -> np.ndarray:
    """Orthonormal real harmonic basis at points, shape (N, dim Pi_L).

    Columns are degree-major. Inside degree l the order is m = 0, then
    cos 1, sin 1, cos 2, sin 2, ... On S^1 these are 1/sqrt(2 pi),
    cos(l theta)/sqrt(pi), sin(l theta)/sqrt(pi). On S^2 they are the fully
    normalized real spherical harmonics about the x3 axis.
    """
    _require_low_dim(n)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if n == 1:
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        out = np.empty((pts.shape[0], 2 * L + 1))
        out[:, 0] = 1.0 / math.sqrt(2.0 * math.pi)
        for l in range(1, L + 1):
            out[:, 2 * l - 1] = np.cos(l * theta) / math.sqrt(math.pi)
            out[:, 2 * l] = np.sin(l * theta) / math.sqrt(math.pi)
        return out

    x = np.clip(pts[:, 2], -1.0, 1.0)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    out = np.empty((pts.shape[0], (L + 1) ** 2))
    root2 = math.sqrt(2.0)
    pmm = np.full(x.shape, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(L + 1):
        if m > 0:
            pmm = math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * pmm
        if m == 0:
            cos_m, sin_m = None, None
        else:
            cos_m, sin_m = root2 * np.cos(m * phi), root2 * np.sin(m * phi)
        p_prev, p_cur = None, pmm
        for l in range(m, L + 1):
            if l == m + 1:
                p_prev, p_cur = p_cur, math.sqrt(2.0 * m + 3.0) * x * p_cur
            elif l > m + 1:
                a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
                b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
                p_prev, p_cur = p_cur, a * (x * p_cur - b * p_prev)
            base = l * l
            if m == 0:
                out[:, base] = p_cur
            else:
                out[:, base + 2 * m - 1] = p_cur * cos_m
                out[:, base + 2 * m] = p_cur * sin_m
    return out


def eval_harmonic(n: int, l: int, m: int, p) -> float:
    """Value of the orthonormal harmonic Y_{l,m} at p (m is 1-based)."""
    _require_low_dim(n)
    if not 1 <= m <= eigenspace_dim(n, l):
        raise ValidationError(f"m must be in 1..{eigenspace_dim(n, l)}, got {m}")
    coords = p.coords if isinstance(p, SpherePoint) else np.asarray(p, dtype=float)
    row = real_harmonics(n, l, coords[None, :])[0]
    return float(row[poly_dimension(n, l - 1) + m - 1])


@dataclass(frozen=True)
class PolynomialOnSphere:
    """S in Pi_L as real coefficients in the flat harmonic ordering.

    The real basis makes every real coefficient vector a real polynomial.
    """
    dim_n: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        expected = poly_dimension(self.dim_n, self.degree)
        if c.size != expected:
            raise ValidationError(f"expected {expected} coefficients for degree {self.degree}",
                                  got=c.size)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, n: int, L: int) -> "PolynomialOnSphere":
        return cls(n, L, np.zeros(poly_dimension(n, L)))

    @classmethod
    def random(cls, n: int, L: int, rng: np.random.Generator) -> "PolynomialOnSphere":
        return cls(n, L, rng.standard_normal(poly_dimension(n, L)))

    @classmethod
    def from_zonal(cls, n: int, coeffs, eta, L: Optional[int] = None) -> "PolynomialOnSphere":
        """Expand x -> sum_l ghat(l) P_l(x . eta) by the addition formula."""
        coeffs = np.asarray(coeffs, dtype=float)
        if L is None:
            L = coeffs.size - 1
        ghat = np.zeros(L + 1)
        k = min(L + 1, coeffs.size)
        ghat[:k] = coeffs[:k]
        y = real_harmonics(n, L, np.asarray(eta, dtype=float)[None, :])[0]
        return cls(n, L, ghat[degree_index(n, L)] * y)

    @property
    def degrees(self) -> np.ndarray:
        return degree_index(self.dim_n, self.degree)

    def multiply_degrees(self, multiplier) -> "PolynomialOnSphere":
        """Scale the degree-l block by multiplier[l]."""
        m = np.asarray(multiplier, dtype=float)
        return PolynomialOnSphere(self.dim_n, self.degree, self.coeffs * m[self.degrees])

    def truncate(self, L: int) -> "PolynomialOnSphere":
        if L >= self.degree:
            return self
        return PolynomialOnSphere(self.dim_n, L, self.coeffs[:poly_dimension(self.dim_n, L)])

    def pad(self, L: int) -> "PolynomialOnSphere":
        if L <= self.degree:
            return self
        c = np.zeros(poly_dimension(self.dim_n, L))
        c[:self.coeffs.size] = self.coeffs
        return PolynomialOnSphere(self.dim_n, L, c)

    def effective_degree(self, tol: float = 0.0) -> int:
        """Largest degree with a coefficient above tol in magnitude (-1 if none)."""
        big = np.flatnonzero(np.abs(self.coeffs) > tol)
        return int(self.degrees[big[-1]]) if big.size else -1

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def evaluate(self, points) -> np.ndarray:
        """Values at points, shape (N,)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        cols = self.coeffs.size
        chunk = max(1, EVAL_CHUNK // cols)
        out = np.empty(pts.shape[0])
        for start in range(0, pts.shape[0], chunk):
            stop = start + chunk
            out[start:stop] = real_harmonics(self.dim_n, self.degree, pts[start:stop]) @ self.coeffs
        return out

    def __add__(self, other: "PolynomialOnSphere") -> "PolynomialOnSphere":
        L = max(self.degree, other.degree)
        return PolynomialOnSphere(self.dim_n, L, self.pad(L).coeffs + other.pad(L).coeffs)

    def __sub__(self, other: "PolynomialOnSphere") -> "PolynomialOnSphere":
        L = max(self.degree, other.degree)
        return PolynomialOnSphere(self.dim_n, L, self.pad(L).coeffs - other.pad(L).coeffs)

    def scaled(self, factor: float) -> "PolynomialOnSphere":
        return PolynomialOnSphere(self.dim_n, self.degree, self.coeffs * factor)


def apply_L_gamma(poly: PolynomialOnSphere, gamma: float) -> PolynomialOnSphere:
    """Apply L_n^gamma: scale degree-l coefficients by nu(l)^gamma."""
    if gamma == 0:
        return poly
    nu = spectral_symbol(poly.dim_n, np.arange(poly.degree + 1))
    return poly.multiply_degrees(nu ** gamma)
