"""Spherical basis function catalog for sbfctl.

Every kernel is stored by its Fourier-Legendre coefficients in log space,
phi(t) = sum_l phihat(l) P_l(t), together with a model of the coefficient
decay past the stored range so that tail sums can be bounded.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad
from scipy.special import gammaln, ive, logsumexp, roots_legendre

from errors import (DivergentSeries, InvalidFamily, InvalidPerturbation,
                    NotPositiveDefinite, PoleAtInteger, QuadratureNonConvergence,
                    SeriesNonConvergence, ValidationError)
from harmonics import (eigenspace_dims, funk_hecke_coefficients, lambda_n,
                       normalized_gegenbauer_table, spectral_symbol, zonal_series)
from sphere_geometry import sphere_volume

logger = logging.getLogger(__name__)

LMAX_ALGEBRAIC = 1024
LMAX_EXPONENTIAL = 256
CONTINUATION_MODES = ("positive", "raw")


class KernelFamily(Enum):
    GREEN = "green"
    TPS = "tps"
    WENDLAND = "wendland"
    GAUSSIAN = "gaussian"
    MULTIQUADRIC = "multiquadric"
    GENERATING = "generating"
    POISSON = "poisson"
    CUSTOM = "custom"


@dataclass(frozen=True)
class DecayModel:
    """Bound on phihat(l) for l past the stored range.

    algebraic:  phihat(l) <= constant * nu(l)^-rate
    geometric:  phihat(l) <= phihat(l_max) * rate^(l - l_max)
    none:       phihat(l) = 0
    """
    kind: str = "none"
    rate: float = 0.0
    constant: float = 0.0


def _dimension_constant(n: int) -> float:
    # d_l <= D_n nu^(n-1)
    return 2.0 / math.factorial(n - 1)


@dataclass(frozen=True)
class ZonalKernel:
    """A zonal kernel given by its coefficient sequence.

    Coefficients below ``poly_cutoff`` belong to the polynomial part of a
    conditionally positive definite kernel; ``raw_poly_coeffs`` keeps their
    original (possibly negative) values and ``continuation`` records how the
    stored values were chosen.
    """
    dim_n: int
    family: KernelFamily
    params: Dict[str, float]
    log_coeffs: np.ndarray
    decay: DecayModel = DecayModel()
    closed_form: Optional[Callable] = None
    poly_cutoff: int = 0
    raw_poly_coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    continuation: str = "positive"
    builder: Optional[Callable[[int], "ZonalKernel"]] = None

    def __post_init__(self):
        lc = np.array(self.log_coeffs, dtype=float)
        if np.any(np.isnan(lc)) or np.any(lc == np.inf):
            raise ValidationError("kernel coefficients must be finite and non-negative")
        lc.setflags(write=False)
        object.__setattr__(self, "log_coeffs", lc)

    @property
    def family_tag(self) -> str:
        return self.family.value

    @property
    def lam(self) -> float:
        return lambda_n(self.dim_n)

    @property
    def l_max(self) -> int:
        return self.log_coeffs.size - 1

    @property
    def coeffs(self) -> np.ndarray:
        return np.exp(self.log_coeffs)

    @property
    def nu(self) -> np.ndarray:
        return spectral_symbol(self.dim_n, np.arange(self.l_max + 1))

    @property
    def kernel_type(self) -> str:
        """'green' (algebraic decay), 'smooth' (geometric decay) or 'band'."""
        if self.decay.kind == "algebraic":
            return "green"
        if self.decay.kind == "geometric":
            return "smooth"
        return "band"

    def describe(self) -> Dict[str, object]:
        return {
            "family": self.family_tag,
            "n": self.dim_n,
            "params": dict(self.params),
            "l_max": self.l_max,
            "poly_cutoff": self.poly_cutoff,
            "continuation": self.continuation,
            "decay": dataclasses.asdict(self.decay),
        }

    def rebuild(self, l_max: int) -> "ZonalKernel":
        """Same kernel with coefficients stored up to l_max."""
        if l_max == self.l_max:
            return self
        if self.builder is None:
            if l_max < self.l_max:
                return dataclasses.replace(self, log_coeffs=self.log_coeffs[:l_max + 1])
            pad = np.full(l_max - self.l_max, -np.inf)
            if self.decay.kind != "none":
                raise ValidationError("kernel cannot be rebuilt to a higher degree",
                                      family=self.family_tag)
            return dataclasses.replace(self, log_coeffs=np.concatenate([self.log_coeffs, pad]))
        return self.builder(l_max)

    def _remainder(self, power: float) -> float:
        """Bound on sum over l > l_max of phihat^power d_l / omega_n."""
        return float(np.exp(self._log_remainder(power)))

    def _log_remainder(self, power: float, start: Optional[int] = None) -> float:
        """log of the decay-model bound on the sum over l > start (start >= l_max)."""
        n, M = self.dim_n, self.l_max
        start = M if start is None else max(start, M)
        omega = sphere_volume(n)
        dn = _dimension_constant(n)
        if self.decay.kind == "none":
            return -math.inf
        if self.decay.kind == "algebraic":
            alpha, c = self.decay.rate * power, self.decay.constant ** power
            if alpha <= n:
                return math.inf
            x0 = start + self.lam if start + self.lam > 0 else 0.5
            bound = c * dn * x0 ** (n - alpha) / ((alpha - n) * omega)
            return math.log(bound) if bound > 0 else -math.inf
        ratio = self.decay.rate ** power
        if ratio >= 1.0:
            return math.inf
        if ratio <= 0.0:
            return -math.inf
        last = power * self.log_coeffs[-1]
        if not np.isfinite(last):
            return -math.inf
        last += (start - M) * math.log(ratio)
        total, k = 0.0, np.arange(1, 257)
        nu0 = start + self.lam
        while True:
            terms = ratio ** k * (nu0 + k) ** (n - 1)
            total += float(np.sum(terms))
            if terms[-1] <= 1e-18 * total or k[-1] > 1_000_000:
                break
            k = k + 256
        return float(last) + math.log(dn * total / omega) if total > 0 else -math.inf

    def log_tail_terms(self, power: float = 1.0) -> np.ndarray:
        """log(phihat(l)^power d_l / omega_n) for the stored degrees."""
        return (power * self.log_coeffs + np.log(eigenspace_dims(self.dim_n, self.l_max))
                - math.log(sphere_volume(self.dim_n)))

    def tail_bound(self, L: int, power: float = 1.0) -> float:
        """Upper bound on sum_{l > L} phihat(l)^power d_l / omega_n.

        power = 1 bounds the sup-norm of the degree > L part of phi,
        power = 2 is its squared L2 norm. Returns inf when divergent.
        """
        rem = self._remainder(power)
        if L >= self.l_max:
            return rem
        terms = self.log_tail_terms(power)[max(L + 1, 0):]
        stored = float(np.exp(logsumexp(terms))) if np.any(np.isfinite(terms)) else 0.0
        return stored + rem

    def log_tail_bound(self, L: int, power: float = 1.0) -> float:
        """log of tail_bound, finite where the bound itself underflows.

        Past l_max the decay model is followed from L rather than from l_max.
        """
        if L >= self.l_max:
            return self._log_remainder(power, L)
        rem = self._log_remainder(power)
        terms = self.log_tail_terms(power)[max(L + 1, 0):]
        with np.errstate(divide="ignore"):
            return float(logsumexp(np.append(terms, rem)))

    def truncation_degree(self, tol: float, power: float = 1.0) -> int:
        """Smallest L with tail_bound(L) <= tol (l_max if never reached)."""
        rem = self._remainder(power)
        if not rem <= tol:
            return self.l_max
        terms = np.exp(self.log_tail_terms(power))
        tails = np.cumsum(terms[::-1])[::-1]  # tails[l] = sum_{k >= l}
        tails = np.append(tails[1:], 0.0) + rem
        ok = np.flatnonzero(tails <= tol)
        return int(ok[0]) if ok.size else self.l_max

    def evaluate_series(self, t, L: Optional[int] = None) -> np.ndarray:
        """Truncated expansion sum_{l <= L} phihat(l) P_l(t)."""
        top = self.l_max if L is None else min(L, self.l_max)
        return zonal_series(self.coeffs[:top + 1], self.dim_n, t)

    def evaluate(self, t) -> np.ndarray:
        """phi(t) by closed form when available, else by the stored series.

        Raises:
            DivergentSeries: If phi is singular at t or the series diverges
        """
        t = np.asarray(t, dtype=float)
        if self.closed_form is not None:
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                vals = np.asarray(self.closed_form(t), dtype=float)
            if not np.all(np.isfinite(vals)):
                raise DivergentSeries("kernel is singular at a requested point",
                                      family=self.family_tag)
            return vals
        if not math.isfinite(self.tail_bound(0)):
            raise DivergentSeries("kernel series does not converge pointwise",
                                  family=self.family_tag)
        return self.evaluate_series(t)


@dataclass(frozen=True)
class MinCoeffProfile:
    """Running minima of nu(l)^delta phihat(l), in log space."""
    delta: float
    log_values: np.ndarray

    def value(self, L: int) -> float:
        return float(np.exp(self.log_values[min(L, self.log_values.size - 1)]))

    def log_value(self, L: int) -> float:
        return float(self.log_values[min(L, self.log_values.size - 1)])


def coeff_profile(k: ZonalKernel, delta: float = 0.0) -> MinCoeffProfile:
    vals = k.log_coeffs + delta * np.log(k.nu)
    return MinCoeffProfile(delta, np.minimum.accumulate(vals))


def min_coeff_profile(k: ZonalKernel, delta: float, L: int) -> float:
    """min_{0 <= l <= L} nu(l)^delta phihat(l)."""
    if L > k.l_max:
        raise ValidationError(f"L={L} exceeds the stored degree {k.l_max}")
    return coeff_profile(k, delta).value(L)


# Families

def _greens_builder(n, beta, psi):
    return lambda l_max: make_green(n, beta, psi, l_max)


def _perturbation_coeffs(psi, l_max: int) -> np.ndarray:
    out = np.zeros(l_max + 1)
    if psi is None:
        return out
    vals = psi.coeffs if isinstance(psi, ZonalKernel) else np.asarray(psi, dtype=float)
    k = min(vals.size, l_max + 1)
    out[:k] = vals[:k]
    return out


def make_green(n: int, beta: float, psi: Union[ZonalKernel, Sequence[float], None] = None,
               l_max: int = LMAX_ALGEBRAIC) -> ZonalKernel:
    """Green's function G_beta (+ G_beta * psi): phihat(l) = nu^-beta (1 + psihat(l)).

    Raises:
        InvalidPerturbation: If some 1 + psihat(l) <= 0
    """
    if not beta > 0:
        raise ValidationError(f"beta must be positive, got {beta}")
    factor = 1.0 + _perturbation_coeffs(psi, l_max)
    bad = np.flatnonzero(factor <= 0)
    if bad.size:
        raise InvalidPerturbation("1 + psihat(l) must stay positive",
                                  degree=int(bad[0]), value=float(factor[bad[0]]))
    nu = spectral_symbol(n, np.arange(l_max + 1))
    log_c = -beta * np.log(nu) + np.log(factor)
    return ZonalKernel(
        dim_n=n, family=KernelFamily.GREEN,
        params={"beta": float(beta), "perturbed": psi is not None},
        log_coeffs=log_c,
        decay=DecayModel("algebraic", float(beta), float(np.max(factor))),
        builder=_greens_builder(n, beta, psi),
    )


def tps_constant(n: int, s: float) -> float:
    """|C_{s,n}| of the thin-plate asymptotics phihat ~ |C| nu^-(2s+n)."""
    log_c = ((s + n) * math.log(2.0) + 0.5 * n * math.log(math.pi)
             + gammaln(s + 1.0) + gammaln(s + 0.5 * n))
    if float(s).is_integer():
        return math.exp(log_c)
    return math.exp(log_c) * abs(math.sin(math.pi * s)) / math.pi


def tps_cutoff(s: float) -> int:
    return int(math.floor(s)) + 1 if s >= 0 else 0


def tps_closed_form(s: float) -> Callable:
    """(-1)^ceil(s+) (1-t)^s, or (-1)^(s+1) (1-t)^s log(1-t) for integer s."""
    if float(s).is_integer():
        sign = (-1.0) ** (int(s) + 1)

        def closed(t):
            u = 1.0 - np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                val = sign * u ** s * np.log(u)
            return np.where(u > 0, val, 0.0) if s > 0 else val

        return closed
    sign = (-1.0) ** math.ceil(max(s, 0.0))

    def closed(t):
        u = 1.0 - np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
        with np.errstate(divide="ignore"):
            return sign * u ** s

    return closed


def _funk_hecke_quad(n: int, l: int, s: float, log_weight: bool, sign: float) -> float:
    """omega_{n-1} int R_l(x) sign (1-x)^s [log(1-x)] (1-x^2)^(lambda-1/2) dx by QUADPACK."""
    a = lambda_n(n) - 0.5
    r_l = lambda x: float(normalized_gegenbauer_table(lambda_n(n), l, x)[l])
    weight = "alg-logb" if log_weight else "alg"
    val, _ = quad(r_l, -1.0, 1.0, weight=weight, wvar=(a, a + s), limit=200)
    return sphere_volume(n - 1) * sign * val


def tps_raw_coeff(n: int, s: float, l: int) -> float:
    """Funk-Hecke coefficient of the thin-plate closed form at degree l."""
    if float(s).is_integer():
        return _funk_hecke_quad(n, l, s, True, (-1.0) ** (int(s) + 1))
    return _funk_hecke_quad(n, l, s, False, (-1.0) ** math.ceil(max(s, 0.0)))


def _continue_poly_part(log_c: np.ndarray, raw: np.ndarray, cutoff: int, n: int,
                        closed: Callable, continuation: str):
    """Fill degrees below the cutoff and correct the closed form to match."""
    if cutoff == 0:
        return log_c, closed
    if continuation not in CONTINUATION_MODES:
        raise ValidationError(f"unknown continuation mode '{continuation}'",
                              choices=",".join(CONTINUATION_MODES))
    log_c = log_c.copy()
    if continuation == "raw":
        log_c[:cutoff] = -np.inf
        new = np.zeros(cutoff)
    else:
        log_c[:cutoff] = log_c[cutoff]
        new = np.full(cutoff, math.exp(log_c[cutoff]))
    delta = new - raw
    logger.info(f"Polynomial part below degree {cutoff} set by '{continuation}' continuation")

    def corrected(t):
        return closed(t) + zonal_series(delta, n, t)

    return log_c, corrected


def make_tps(n: int, s: float, l_max: int = LMAX_ALGEBRAIC,
             continuation: str = "positive") -> ZonalKernel:
    """Thin-plate spline of order s, phihat(l) = |C_{s,n}| Gamma(l-s) / Gamma(l+s+n).

    Degrees below floor(s) + 1 (s >= 0) form the polynomial part; they are
    replaced per ``continuation`` and their raw values are kept.
    """
    if not s > -0.5 * n:
        raise ValidationError(f"thin-plate order must exceed -n/2, got s={s}")
    cutoff = tps_cutoff(s)
    if cutoff > l_max:
        raise ValidationError("l_max must exceed the polynomial part", cutoff=cutoff)
    l = np.arange(l_max + 1, dtype=float)
    log_c = np.full(l_max + 1, -np.inf)
    arg = l[cutoff:] - s
    if np.any(arg <= 0):
        raise PoleAtInteger("Gamma(l - s) evaluated at a pole", s=s)
    const = tps_constant(n, s)
    log_c[cutoff:] = math.log(const) + gammaln(arg) - gammaln(l[cutoff:] + s + n)
    raw = np.array([tps_raw_coeff(n, s, j) for j in range(cutoff)])
    log_c, closed = _continue_poly_part(log_c, raw, cutoff, n, tps_closed_form(s), continuation)

    nu = spectral_symbol(n, l)
    alpha = 2.0 * s + n
    tail_const = max(float(np.max(np.exp(log_c[cutoff:] + alpha * np.log(nu[cutoff:])))), const)
    return ZonalKernel(
        dim_n=n, family=KernelFamily.TPS, params={"s": float(s)},
        log_coeffs=log_c,
        decay=DecayModel("algebraic", alpha, tail_const * 1.001),
        closed_form=closed, poly_cutoff=cutoff, raw_poly_coeffs=raw,
        continuation=continuation,
        builder=lambda m: make_tps(n, s, m, continuation),
    )


def wendland_profile(d: int, k: int) -> Polynomial:
    """Wendland's piecewise polynomial on [0, 1], normalized to 1 at r = 0."""
    ell = d // 2 + k + 1
    p = Polynomial([1.0, -1.0]) ** ell
    r = Polynomial([0.0, 1.0])
    for _ in range(k):
        anti = (r * p).integ()
        p = anti(1.0) - anti
    return p / p(0.0)


def make_wendland(n: int, d: int, k: int, t0: float = 0.0, l_max: int = LMAX_ALGEBRAIC,
                  tol: float = 1e-13, max_nodes: int = 1 << 16) -> ZonalKernel:
    """Restriction of the Wendland function phi_{d,k} to S^n with support t > t0.

    Coefficients come from Gauss-Legendre quadrature in theta over the
    support, doubling the node count until two rules agree to tol relative
    to the largest coefficient. Coefficients below the roundoff floor are
    truncated.

    Raises:
        QuadratureNonConvergence: If doubling up to max_nodes does not converge
        NotPositiveDefinite: If a coefficient above the floor is negative
    """
    if d < 1 or k < 0:
        raise ValidationError(f"need d >= 1 and k >= 0, got d={d}, k={k}")
    if not -1.0 < t0 < 1.0:
        raise ValidationError(f"support edge t0 must lie in (-1, 1), got {t0}")
    prof = wendland_profile(d, k)
    r0 = math.sqrt(2.0 * (1.0 - t0))
    theta0 = math.acos(t0)

    def closed(t):
        t = np.asarray(t, dtype=float)
        r = np.sqrt(np.clip(2.0 * (1.0 - t), 0.0, None)) / r0
        return np.where(t > t0, prof(np.minimum(r, 1.0)), 0.0)

    lam = lambda_n(n)

    def coefficients(nodes: int) -> np.ndarray:
        x, w = roots_legendre(nodes)
        theta = 0.5 * theta0 * (x + 1.0)
        w = 0.5 * theta0 * w
        t = np.cos(theta)
        vals = closed(t) * np.sin(theta) ** (n - 1) * w
        table = normalized_gegenbauer_table(lam, l_max, t)
        return sphere_volume(n - 1) * (table @ vals)

    nodes = l_max + 64
    prev = coefficients(nodes)
    while True:
        nodes *= 2
        if nodes > max_nodes:
            raise QuadratureNonConvergence("Wendland coefficients did not converge",
                                           nodes=nodes // 2)
        cur = coefficients(nodes)
        scale = float(np.max(np.abs(cur)))
        err = float(np.max(np.abs(cur - prev)))
        logger.debug(f"Wendland quadrature: {nodes} nodes, change {err:.3g}")
        if err <= tol * scale:
            break
        prev = cur

    floor = 64.0 * tol * scale
    above = np.flatnonzero(np.abs(cur) > floor)
    top = int(above[-1]) if above.size else 0
    coeffs = cur[:top + 1]
    negative = np.flatnonzero(coeffs < -floor)
    if negative.size:
        raise NotPositiveDefinite("Wendland restriction has a negative coefficient",
                                  degree=int(negative[0]), value=float(coeffs[negative[0]]))
    coeffs = np.where(coeffs > floor, coeffs, 0.0)
    with np.errstate(divide="ignore"):
        log_c = np.log(coeffs)
    if top < l_max:
        logger.info(f"Wendland coefficients truncated at degree {top} (roundoff floor)")

    alpha = 2.0 * k + 1.0 + n
    nu = spectral_symbol(n, np.arange(top + 1))
    upper = coeffs[top // 2:] * nu[top // 2:] ** alpha
    return ZonalKernel(
        dim_n=n, family=KernelFamily.WENDLAND,
        params={"d": int(d), "k": int(k), "t0": float(t0)},
        log_coeffs=log_c,
        decay=DecayModel("algebraic", alpha, 1.5 * float(np.max(upper)) if upper.size else 0.0),
        closed_form=closed,
        builder=lambda m: make_wendland(n, d, k, t0, m, tol, max_nodes),
    )


def log_bessel_i_ladder(x: float, order0: float, count: int) -> np.ndarray:
    """log I_{order0 + j}(x) e^{-x} for j = 0..count-1.

    Anchors the lowest order with ive and walks up with ratios
    r_v = I_{v+1}/I_v from the downward recurrence r_v = 1 / (2(v+1)/x + r_{v+1}).
    """
    start = count + 32 + int(2 * x)
    logger.debug(f"Bessel ratio recurrence started {start} orders above {order0}")
    ratios = np.zeros(count)
    r = 0.0
    for j in range(start, -1, -1):
        v = order0 + j
        r = 1.0 / (2.0 * (v + 1.0) / x + r)
        if j < count:
            ratios[j] = r
    out = np.empty(count)
    out[0] = math.log(ive(order0, x))
    out[1:] = out[0] + np.cumsum(np.log(ratios[:-1]))
    return out


def make_gaussian(n: int, sigma: float, l_max: Optional[int] = None) -> ZonalKernel:
    """Gaussian exp(-2 sigma (1 - t)).

    phihat(l) = 2 pi (pi / sigma)^lambda e^{-2 sigma} I_{l + lambda}(2 sigma)
    """
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    if l_max is None:
        l_max = max(LMAX_EXPONENTIAL, int(math.ceil(4.0 * sigma)) + 64)
    lam = lambda_n(n)
    x = 2.0 * sigma
    log_c = (math.log(2.0 * math.pi) + lam * math.log(math.pi / sigma)
             + log_bessel_i_ladder(x, lam, l_max + 1))
    ratio = x / (2.0 * (l_max + lam) + 1.0)
    return ZonalKernel(
        dim_n=n, family=KernelFamily.GAUSSIAN, params={"sigma": float(sigma)},
        log_coeffs=log_c,
        decay=DecayModel("geometric", ratio),
        closed_form=lambda t: np.exp(-x * (1.0 - np.asarray(t, dtype=float))),
        builder=lambda m: make_gaussian(n, sigma, m),
    )


def log_hyp2f1_series(a: np.ndarray, b: np.ndarray, c: np.ndarray, z: float,
                      rtol: float = 1e-17, max_terms: int = 1 << 20) -> np.ndarray:
    """log 2F1(a, b; c; z) for positive parameters and 0 <= z < 1, elementwise.

    Sums the power series in log space, doubling the number of terms until the
    last term is below rtol relative to the sum.

    Raises:
        SeriesNonConvergence: If max_terms terms do not reach rtol
    """
    a, b, c = (np.asarray(v, dtype=float)[:, None] for v in (a, b, c))
    terms = 64
    while True:
        k = np.arange(terms, dtype=float)[None, :]
        log_ratio = np.log((a + k) * (b + k) * z / ((c + k) * (k + 1.0)))
        log_terms = np.concatenate([np.zeros((a.shape[0], 1)),
                                    np.cumsum(log_ratio, axis=1)], axis=1)
        total = logsumexp(log_terms, axis=1)
        if np.all(log_terms[:, -1] - total < math.log(rtol)):
            return total
        terms *= 2
        if terms > max_terms:
            raise SeriesNonConvergence("hypergeometric series did not converge",
                                       terms=terms // 2)


def make_multiquadric(n: int, delta: float, l_max: int = LMAX_EXPONENTIAL,
                      continuation: str = "positive") -> ZonalKernel:
    """Hardy multiquadric -sqrt(delta^2 + 2(1 - t)), conditionally positive definite.

    For l >= 1, with c = delta^2 + 2,
    phihat(l) = pi^(lambda + 1/2) Gamma(l - 1/2) / (c^(l - 1/2) Gamma(l + lambda + 1))
                * 2F1((l - 1/2)/2, (l + 1/2)/2; l + lambda + 1; 4 / c^2).
    The degree-0 coefficient is the polynomial part, found by quadrature.
    """
    if not delta > 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    lam = lambda_n(n)
    c = delta * delta + 2.0
    l = np.arange(1, l_max + 1, dtype=float)
    log_f = log_hyp2f1_series((l - 0.5) / 2.0, (l + 0.5) / 2.0, l + lam + 1.0, 4.0 / (c * c))
    log_c = np.full(l_max + 1, -np.inf)
    log_c[1:] = ((lam + 0.5) * math.log(math.pi) + gammaln(l - 0.5)
                 - (l - 0.5) * math.log(c) - gammaln(l + lam + 1.0) + log_f)

    def closed(t):
        return -np.sqrt(c - 2.0 * np.asarray(t, dtype=float))

    raw = funk_hecke_coefficients(closed, n, 0, count=128)
    log_c, corrected = _continue_poly_part(log_c, raw, 1, n, closed, continuation)
    return ZonalKernel(
        dim_n=n, family=KernelFamily.MULTIQUADRIC, params={"delta": float(delta)},
        log_coeffs=log_c,
        decay=DecayModel("geometric", 2.0 / c),
        closed_form=corrected, poly_cutoff=1, raw_poly_coeffs=raw,
        continuation=continuation,
        builder=lambda m: make_multiquadric(n, delta, m, continuation),
    )


def make_generating(n: int, w: float, l_max: int = LMAX_EXPONENTIAL) -> ZonalKernel:
    """Generating-function kernel (phihat(l) = w^l), or the Poisson kernel on S^1."""
    if not 0.0 < w < 1.0:
        raise ValidationError(f"w must lie in (0, 1), got {w}")
    l = np.arange(l_max + 1, dtype=float)
    log_c = l * math.log(w)
    omega = sphere_volume(n)
    if n == 1:
        log_c[1:] += math.log(2.0)

        def closed(t):
            t = np.asarray(t, dtype=float)
            poisson = (1.0 - w * w) / (1.0 - 2.0 * t * w + w * w)
            return (2.0 * poisson - 1.0) / (2.0 * math.pi)

        family = KernelFamily.POISSON
    else:
        lam = lambda_n(n)

        def closed(t):
            t = np.asarray(t, dtype=float)
            return (1.0 - w * w) / (omega * (1.0 - 2.0 * t * w + w * w) ** (lam + 1.0))

        family = KernelFamily.GENERATING
    return ZonalKernel(
        dim_n=n, family=family, params={"w": float(w)},
        log_coeffs=log_c,
        decay=DecayModel("geometric", w),
        closed_form=closed,
        builder=lambda m: make_generating(n, w, m),
    )


def make_custom(n: int, coeffs: Sequence[float], closed_form: Optional[Callable] = None,
                params: Optional[Dict[str, float]] = None) -> ZonalKernel:
    """Kernel from an explicit finite coefficient sequence (zero beyond it)."""
    c = np.asarray(coeffs, dtype=float)
    if np.any(c < 0) or not np.all(np.isfinite(c)):
        raise NotPositiveDefinite("custom coefficients must be finite and non-negative")
    with np.errstate(divide="ignore"):
        log_c = np.log(c)
    return ZonalKernel(dim_n=n, family=KernelFamily.CUSTOM, params=dict(params or {}),
                       log_coeffs=log_c, closed_form=closed_form)


def combine_kernels(weights: Sequence[float], kernels: Sequence[ZonalKernel]) -> ZonalKernel:
    """Linear combination sum_j A_j phi_j on the common stored range.

    Raises:
        NotPositiveDefinite: If a combined coefficient past the polynomial
            parts is not positive
    """
    if len(weights) != len(kernels) or not kernels:
        raise ValidationError("need one weight per kernel")
    n = kernels[0].dim_n
    if any(k.dim_n != n for k in kernels):
        raise ValidationError("kernels live on different spheres")
    top = min(k.l_max for k in kernels)
    cutoff = max(k.poly_cutoff for k in kernels)
    combined = sum(a * k.coeffs[:top + 1] for a, k in zip(weights, kernels))
    bad = np.flatnonzero(combined[cutoff:] <= 0)
    if bad.size:
        raise NotPositiveDefinite("combined coefficients are not positive",
                                  degree=int(bad[0] + cutoff))
    with np.errstate(divide="ignore"):
        log_c = np.log(np.where(combined > 0, combined, 0.0))
    decay = _combined_decay(weights, kernels)
    closed = None
    if all(k.closed_form is not None for k in kernels):
        parts = [(a, k.closed_form) for a, k in zip(weights, kernels)]
        closed = lambda t: sum(a * f(t) for a, f in parts)
    family = KernelFamily.TPS if all(k.family is KernelFamily.TPS for k in kernels) \
        else KernelFamily.CUSTOM
    params = {"weights": [float(a) for a in weights],
              "components": [k.family_tag for k in kernels]}
    if family is KernelFamily.TPS:
        params["s"] = [k.params["s"] for k in kernels]
    raw = np.zeros(cutoff)
    for a, k in zip(weights, kernels):
        part = k.coeffs[:cutoff].copy()
        part[:k.poly_cutoff] = k.raw_poly_coeffs
        raw += a * part
    return ZonalKernel(dim_n=n, family=family, params=params, log_coeffs=log_c,
                       decay=decay, closed_form=closed, poly_cutoff=cutoff,
                       raw_poly_coeffs=raw)


def _combined_decay(weights, kernels) -> DecayModel:
    kinds = {k.decay.kind for k in kernels}
    if kinds == {"none"}:
        return DecayModel()
    if kinds == {"geometric"}:
        return DecayModel("geometric", max(k.decay.rate for k in kernels))
    # the slowest algebraic member dominates; faster members are bounded on the stored range
    rate = min(k.decay.rate for k in kernels if k.decay.kind == "algebraic")
    const = 0.0
    for a, k in zip(weights, kernels):
        if k.decay.kind == "algebraic":
            const += abs(a) * k.decay.constant
        elif k.decay.kind == "geometric":
            const += abs(a) * float(np.max(k.coeffs * k.nu ** rate))
    return DecayModel("algebraic", rate, const)


def lp_kernel_transform(k: ZonalKernel, gamma: float, pointwise: bool = False) -> ZonalKernel:
    """L_n^gamma phi: coefficients scaled by nu(l)^gamma, closed form dropped.

    A Green kernel G_beta stays a Green kernel, of order beta - gamma.

    Raises:
        DivergentSeries: If pointwise is requested and the series diverges
    """
    if gamma == 0:
        return k
    log_c = k.log_coeffs + gamma * np.log(k.nu)
    if k.decay.kind == "algebraic":
        decay = DecayModel("algebraic", k.decay.rate - gamma, k.decay.constant)
    elif k.decay.kind == "geometric":
        growth = ((k.l_max + k.lam + 1.0) / (k.l_max + k.lam)) ** max(gamma, 0.0)
        decay = DecayModel("geometric", k.decay.rate * growth)
    else:
        decay = k.decay
    params = dict(k.params)
    if k.family is KernelFamily.GREEN:
        params["beta"] = k.params["beta"] - gamma
    else:
        params["gamma"] = k.params.get("gamma", 0.0) + gamma
    out = dataclasses.replace(
        k, params=params, log_coeffs=log_c, decay=decay, closed_form=None,
        builder=(lambda m: lp_kernel_transform(k.rebuild(m), gamma)) if k.builder else None,
    )
    if pointwise and not math.isfinite(out.tail_bound(0)):
        raise DivergentSeries("transformed kernel is not continuous", gamma=gamma,
                              family=k.family_tag)
    return out


def best_poly_error(k: ZonalKernel, L: int, p: float) -> float:
    """Computable upper proxy for E_L(phi)_p, the error of the degree-L truncation.

    p = inf uses the absolute tail sum, p = 1 that sum times omega_n, p = 2 the
    exact L2 tail; other p interpolate between these.

    Raises:
        DivergentSeries: When the tail does not converge
    """
    return float(np.exp(log_best_poly_error(k, L, p)))


def log_best_poly_error(k: ZonalKernel, L: int, p: float) -> float:
    """log of best_poly_error, for kernels whose tails underflow.

    Raises:
        DivergentSeries: When the tail does not converge
    """
    log_omega = math.log(sphere_volume(k.dim_n))
    if p == 2:
        val = 0.5 * k.log_tail_bound(L, power=2)
    elif math.isinf(p):
        val = k.log_tail_bound(L)
    elif p == 1:
        val = log_omega + k.log_tail_bound(L)
    elif p > 2:
        val = k.log_tail_bound(L, power=2) / p + (1.0 - 2.0 / p) * k.log_tail_bound(L)
    else:
        val = (1.0 / p - 0.5) * log_omega + 0.5 * k.log_tail_bound(L, power=2)
    if not val < math.inf:
        raise DivergentSeries("kernel tail does not converge", L=L, p=p, family=k.family_tag)
    return val


FACTORIES: Dict[str, Callable[..., ZonalKernel]] = {
    "green": lambda n, beta, l_max=LMAX_ALGEBRAIC: make_green(n, beta, None, l_max),
    "tps": lambda n, s, l_max=LMAX_ALGEBRAIC, continuation="positive":
        make_tps(n, s, l_max, continuation),
    "wendland": lambda n, d=6, k=0, t0=0.0, l_max=LMAX_ALGEBRAIC:
        make_wendland(n, int(d), int(k), t0, l_max),
    "gaussian": lambda n, sigma, l_max=None: make_gaussian(n, sigma, l_max),
    "multiquadric": lambda n, delta, l_max=LMAX_EXPONENTIAL, continuation="positive":
        make_multiquadric(n, delta, l_max, continuation),
    "generating": lambda n, w, l_max=LMAX_EXPONENTIAL: make_generating(n, w, l_max),
    "poisson": lambda n, w, l_max=LMAX_EXPONENTIAL: make_generating(n, w, l_max),
}

PRESETS: Dict[str, Dict[str, float]] = {
    "green": {"beta": 3.0},
    "tps": {"s": 0.5},
    "wendland": {"d": 6, "k": 0, "t0": 0.0},
    "gaussian": {"sigma": 1.0},
    "multiquadric": {"delta": 1.0},
    "generating": {"w": 0.5},
    "poisson": {"w": 0.5},
}


def kernel_from_name(family: str, n: int, **params) -> ZonalKernel:
    """Build a catalog kernel by family name; missing parameters use presets."""
    name = family.lower()
    if name not in FACTORIES:
        raise InvalidFamily(f"unknown kernel family '{family}'",
                            choices=",".join(sorted(FACTORIES)))
    if name == "poisson" and n != 1:
        raise InvalidFamily("the Poisson kernel lives on S^1", n=n)
    merged = dict(PRESETS[name])
    merged.update({k: v for k, v in params.items() if v is not None})
    try:
        kernel = FACTORIES[name](n, **merged)
    except TypeError as e:
        raise ValidationError(f"bad parameters for '{family}': {e}")
    logger.info(f"Built {kernel.family_tag} kernel on S^{n}: params={kernel.params} "
                f"l_max={kernel.l_max} poly_cutoff={kernel.poly_cutoff}")
    return kernel
