"""Frame masks, band-limited kernels and multiscale operators for sbfctl."""
import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import comb, expit, roots_legendre

from errors import DivergentSeries, ValidationError
from harmonics import (PolynomialOnSphere, apply_L_gamma, eigenspace_dims, lambda_n,
                       spectral_symbol, zonal_series)
from kernel_catalog import KernelFamily, ZonalKernel, lp_kernel_transform, make_custom
from quadrature import lp_norm_on_grid, zonal_lp_norm
from sphere_geometry import sphere_volume
from utils import conjugate_exponent, fit_loglog_slope

logger = logging.getLogger(__name__)

# envelope value treated as zero when picking the band of a non-compact envelope
ENVELOPE_FLOOR = 1e-16


def exp_ramp(x):
    """C-infinity monotone ramp from 0 (x <= 0) to 1 (x >= 1) with chi(x) + chi(1-x) = 1."""
    x = np.asarray(x, dtype=float)
    inner = np.clip(x, 1e-300, 1.0 - 1e-16)
    with np.errstate(divide="ignore", over="ignore"):
        val = expit(1.0 / (1.0 - inner) - 1.0 / inner)
    return np.where(x <= 0.0, 0.0, np.where(x >= 1.0, 1.0, val))


def smoothstep_ramp(k: int) -> Callable:
    """C^k generalized smoothstep ramp."""
    def ramp(x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        total = np.zeros_like(x)
        for j in range(k + 1):
            total += comb(k + j, j) * comb(2 * k + 1, k - j) * (-x) ** j
        return x ** (k + 1) * total
    return ramp


@dataclass(frozen=True)
class MaskPair:
    """Mask a with |a(t)|^2 + |a(2t)|^2 = 1 on [1/2, 1] and its low-pass partner b.

    smoothness_k = None selects the C-infinity exponential ramp.
    """
    smoothness_k: Optional[int] = None

    @property
    def ramp(self) -> Callable:
        if self.smoothness_k is None:
            return exp_ramp
        return smoothstep_ramp(self.smoothness_k)

    def a_squared(self, t) -> np.ndarray:
        x = np.abs(np.asarray(t, dtype=float))
        chi = self.ramp
        low = np.sin(0.5 * np.pi * chi(2.0 * x - 1.0)) ** 2
        high = np.cos(0.5 * np.pi * chi(x - 1.0)) ** 2
        out = np.where((x >= 0.5) & (x <= 1.0), low, 0.0)
        return np.where((x > 1.0) & (x <= 2.0), high, out)

    def a_eval(self, t) -> np.ndarray:
        return np.sqrt(self.a_squared(t))

    def b_eval(self, t) -> np.ndarray:
        x = np.abs(np.asarray(t, dtype=float))
        return np.where(x <= 1.0, 1.0, self.a_squared(x))

    def partition_error(self, points: int = 1001) -> float:
        """Max of | |a(t)|^2 + |a(2t)|^2 - 1 | over [1/2, 1]."""
        t = np.linspace(0.5, 1.0, points)
        return float(np.max(np.abs(self.a_squared(t) + self.a_squared(2.0 * t) - 1.0)))


def build_mask(k: Optional[int] = None) -> MaskPair:
    """Mask pair from a sin/cos pairing of a smooth ramp (C^k, or C-infinity for None)."""
    if k is not None and k < 3:
        raise ValidationError(f"mask smoothness must be >= 3, got {k}")
    return MaskPair(k)


def dimension_shift(n: int) -> int:
    """j_n: 0 on S^1, floor(log2 lambda_n) otherwise."""
    if n == 1:
        return 0
    return int(math.floor(math.log2(lambda_n(n))))


@dataclass(frozen=True)
class FrameOperatorSpec:
    """B_J with mask pair, scale J and dimension n."""
    mask: MaskPair
    J: int
    dim_n: int

    @property
    def j_n(self) -> int:
        return dimension_shift(self.dim_n)

    @property
    def scale(self) -> float:
        return 2.0 ** (self.J + self.j_n)

    @property
    def degree(self) -> int:
        """Largest degree with a nonzero B_J multiplier (nu < 2^(J + j_n + 1))."""
        return max(0, int(math.ceil(2.0 * self.scale - lambda_n(self.dim_n))) - 1)

    @property
    def reproduction_degree(self) -> int:
        """Largest degree with nu <= 2^(J + j_n), where B_J acts as the identity."""
        return int(math.floor(self.scale - lambda_n(self.dim_n)))

    def multiplier(self, max_degree: int) -> np.ndarray:
        nu = spectral_symbol(self.dim_n, np.arange(max_degree + 1))
        return self.mask.b_eval(nu / self.scale)


def frame_multiplier(spec: FrameOperatorSpec, j: int, max_degree: int) -> np.ndarray:
    """|a(2^(-j - j_n) nu)|^2, the multiplier of A_j A_j*."""
    nu = spectral_symbol(spec.dim_n, np.arange(max_degree + 1))
    return spec.mask.a_squared(nu / 2.0 ** (j + spec.j_n))


def apply_B_J(spec: FrameOperatorSpec, target):
    """Apply B_J to a polynomial or a zonal kernel.

    The result is band-limited to degree spec.degree.
    """
    if isinstance(target, PolynomialOnSphere):
        top = min(target.degree, spec.degree)
        return target.truncate(top).multiply_degrees(spec.multiplier(top))
    if isinstance(target, ZonalKernel):
        top = spec.degree
        k = target.rebuild(top) if target.l_max < top else target
        coeffs = k.coeffs[:top + 1] * spec.multiplier(top)
        with np.errstate(divide="ignore"):
            log_c = np.log(coeffs)
        params = dict(k.params)
        params["frame_J"] = spec.J
        return dataclasses.replace(k, params=params, log_coeffs=log_c,
                                   decay=dataclasses.replace(k.decay, kind="none"),
                                   closed_form=None, builder=None)
    coeffs = np.asarray(target, dtype=float)
    top = min(coeffs.size - 1, spec.degree)
    return coeffs[:top + 1] * spec.multiplier(top)


# Envelopes

@dataclass(frozen=True)
class Envelope:
    """Even generator kappa of a band kernel, with its support when compact."""
    name: str
    func: Callable
    support: Optional[Tuple[float, float]] = None

    def __call__(self, t) -> np.ndarray:
        return self.func(np.abs(np.asarray(t, dtype=float)))

    def band_limit(self) -> float:
        """Largest |t| where kappa can be nonzero (or exceeds ENVELOPE_FLOOR).

        Raises:
            DivergentSeries: If kappa does not fall below the floor
        """
        if self.support is not None:
            return self.support[1]
        t = np.linspace(0.0, 1e4, 200_001)
        big = np.flatnonzero(np.abs(self(t)) > ENVELOPE_FLOOR)
        if big.size and big[-1] == t.size - 1:
            raise DivergentSeries("envelope does not decay; band cannot be truncated",
                                  envelope=self.name)
        return float(t[big[-1] + 1]) if big.size else 0.0


def bump(lo: float, hi: float) -> Callable:
    """C-infinity bump on (lo, hi), normalized to 1 at the midpoint."""
    top = 4.0 / (hi - lo) ** 2

    def func(x):
        x = np.asarray(x, dtype=float)
        inside = (x > lo) & (x < hi)
        gap = np.where(inside, (x - lo) * (hi - x), 1.0)
        return np.where(inside, np.exp(top - 1.0 / gap), 0.0)
    return func


def make_envelope(name: str, mask: Optional[MaskPair] = None) -> Envelope:
    """Envelope presets: gaussian, bump, bump_high, mask, lowpass."""
    mask = mask or build_mask()
    if name == "gaussian":
        return Envelope(name, lambda x: np.exp(-x * x))
    if name == "bump":
        return Envelope(name, bump(0.5, 2.0), (0.5, 2.0))
    if name == "bump_high":
        return Envelope(name, bump(1.0, 2.0), (1.0, 2.0))
    if name == "mask":
        return Envelope(name, mask.a_squared, (0.5, 2.0))
    if name == "lowpass":
        return Envelope(name, mask.b_eval, (0.0, 2.0))
    raise ValidationError(f"unknown envelope '{name}'",
                          choices="gaussian,bump,bump_high,mask,lowpass")


@dataclass(frozen=True)
class BandKernel:
    """K_{eps,n}(t) = sum_l kappa(eps nu(l)) P_l(t) over the active band."""
    envelope: Envelope
    epsilon: float
    dim_n: int
    decay_order_k: int = 6

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValidationError(f"epsilon must lie in (0, 1], got {self.epsilon}")

    @property
    def band(self) -> int:
        """Largest degree whose coefficient can be nonzero."""
        limit = self.envelope.band_limit() / self.epsilon
        return max(0, int(math.floor(limit - lambda_n(self.dim_n))))

    @property
    def coeffs(self) -> np.ndarray:
        nu = spectral_symbol(self.dim_n, np.arange(self.band + 1))
        return self.envelope(self.epsilon * nu)

    def as_kernel(self) -> ZonalKernel:
        return make_custom(self.dim_n, self.coeffs,
                           params={"envelope": self.envelope.name, "epsilon": self.epsilon})

    def evaluate(self, t) -> np.ndarray:
        return zonal_series(self.coeffs, self.dim_n, t)

    def value_at_one(self) -> float:
        c = self.coeffs
        return float(np.sum(c * eigenspace_dims(self.dim_n, c.size - 1)) / sphere_volume(self.dim_n))

    def tabulate(self, points: Optional[int] = None) -> CubicSpline:
        """Cubic spline of theta -> K(cos theta) on [0, pi]."""
        points = points or max(2049, 32 * (self.band + 1) + 1)
        theta = np.linspace(0.0, np.pi, points)
        return CubicSpline(theta, self.evaluate(np.cos(theta)))

    def evaluate_fast(self, t, table: Optional[CubicSpline] = None) -> np.ndarray:
        table = table or self.tabulate()
        return table(np.arccos(np.clip(np.asarray(t, dtype=float), -1.0, 1.0)))

    def l1_norm(self, panels: Optional[int] = None, order: int = 8) -> float:
        """||K||_1 by composite Gauss-Legendre quadrature in theta."""
        panels = panels or max(64, 4 * (self.band + 1))
        x, w = roots_legendre(order)
        edges = np.linspace(0.0, np.pi, panels + 1)
        half = 0.5 * np.diff(edges)
        theta = (edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        vals = np.abs(self.evaluate(np.cos(theta))) * np.sin(theta) ** (self.dim_n - 1)
        return float(sphere_volume(self.dim_n - 1) * np.sum(vals * weights))

    def decay_constant(self, k: Optional[int] = None, points: int = 8192) -> float:
        """sup_theta |K(cos theta)| (1 + (theta/eps)^k) eps^n."""
        k = self.decay_order_k if k is None else k
        theta = np.linspace(0.0, np.pi, points)
        vals = np.abs(self.evaluate(np.cos(theta)))
        weight = (1.0 + (theta / self.epsilon) ** k) * self.epsilon ** self.dim_n
        return float(np.max(vals * weight))


def band_kernel(kappa: Envelope, n: int, eps: float, t) -> np.ndarray:
    """Value of K_{eps,n} at t."""
    return BandKernel(kappa, eps, n).evaluate(t)


def frame_error_bound(k: ZonalKernel, spec: FrameOperatorSpec, gamma: float, p: float,
                      nodes: int = 4096) -> float:
    """||(I - B_J) phi||_{H^p_gamma} of the zonal kernel phi.

    p = 2 is exact through Parseval (tail past the stored range included);
    other p use one-dimensional quadrature of the truncated series.

    Raises:
        ValidationError: If beta - gamma - n/p' <= 0 for a Green kernel
        DivergentSeries: If L^gamma phi is not in L^p
    """
    n = k.dim_n
    if k.family is KernelFamily.GREEN:
        margin = k.params["beta"] - gamma - n / conjugate_exponent(p)
        if not margin > 0:
            raise ValidationError("need beta - gamma - n/p' > 0", margin=margin)
    top = max(spec.degree + 1, k.l_max)
    kern = k.rebuild(top) if k.l_max < top else k
    scaled = lp_kernel_transform(kern, gamma)
    keep = 1.0 - spec.multiplier(scaled.l_max)
    coeffs = scaled.coeffs * keep
    if p == 2:
        beyond = scaled.tail_bound(scaled.l_max, power=2)
        if not math.isfinite(beyond):
            raise DivergentSeries("transformed kernel is not in L^2", gamma=gamma)
        inside = float(np.sum(coeffs ** 2 * eigenspace_dims(n, scaled.l_max)) / sphere_volume(n))
        return math.sqrt(inside + beyond)
    if not math.isfinite(scaled.tail_bound(0)):
        raise DivergentSeries("transformed kernel series does not converge", gamma=gamma, p=p)
    return zonal_lp_norm(lambda t: zonal_series(coeffs, n, t), n, p, nodes)


# Polynomial inequalities

def poly_bernstein_ratios(n: int, p: float, gamma: float, degrees: Sequence[int],
                          draws: int, rng: np.random.Generator) -> List[Dict[str, float]]:
    """Max over random S in Pi_L of ||L^gamma S||_p / ||S||_p for each L."""
    rows = []
    for L in degrees:
        best = 0.0
        for _ in range(draws):
            s = PolynomialOnSphere.random(n, L, rng)
            ls = apply_L_gamma(s, gamma)
            if p == 2:
                ratio = ls.l2_norm() / s.l2_norm()
            else:
                num = lp_norm_on_grid(ls.evaluate, n, p, L)
                ratio = num / lp_norm_on_grid(s.evaluate, n, p, L)
            best = max(best, ratio)
        rows.append({"L": L, "max_ratio": best})
        logger.info(f"Bernstein ensemble n={n} p={p} gamma={gamma} L={L}: {best:.6g}")
    return rows


def poly_nikolskii_ratios(n: int, degrees: Sequence[int], draws: int,
                          rng: np.random.Generator) -> List[Dict[str, float]]:
    """Max over random S in Pi_L of ||S||_inf / ||S||_2, with L^(n/2) for comparison."""
    rows = []
    for L in degrees:
        best = 0.0
        for _ in range(draws):
            s = PolynomialOnSphere.random(n, L, rng)
            best = max(best, lp_norm_on_grid(s.evaluate, n, math.inf, L) / s.l2_norm())
        rows.append({"L": L, "max_ratio": best, "scale": float(L) ** (0.5 * n)})
    return rows


def ratio_slope(rows: List[Dict[str, float]]):
    """Log-log slope of max_ratio against L."""
    return fit_loglog_slope([r["L"] for r in rows], [r["max_ratio"] for r in rows])
