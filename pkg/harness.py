"""Approximation-rate experiments for sbfctl.

Direct rates measure ||f - Q(B_J f)|| over nested center sets, inverse
recovery fits the observed rate and follows Sobolev norms of the
approximants, and the Besov helpers classify the distance sequence.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import lstsq
from scipy.special import eval_legendre

from errors import (ConditionFailed, DegreeOverflow, DivergentSeries, FitUnstable,
                    InconclusiveTrend, InvalidFamily, UnsupportedDimension, ValidationError)
from frames import FrameOperatorSpec, apply_B_J, build_mask
from harmonics import (PolynomialOnSphere, eigenspace_dims, funk_hecke_coefficients,
                       poly_dimension, spectral_symbol, zonal_series)
from kernel_catalog import ZonalKernel, log_best_poly_error, lp_kernel_transform
from network import (SbfNetwork, frame_degree_limit, network_l2_distance, quasi_interpolate,
                     sobolev_norm)
from quadrature import build_rule_with_backoff, lp_norm_on_grid
from sphere_geometry import (CenterSet, analyze_centers, generate_points, refine_nested,
                             sphere_volume)
from utils import conjugate_exponent, fit_loglog_slope
from worker_manager import WorkerManager

logger = logging.getLogger(__name__)

TARGET_DEGREE = 256
ZERO_DISTANCE = 1e-8
MIN_R_SQUARED = 0.95
TREND_MARGIN = 0.1
# consecutive mesh norms must satisfy h/4 < h_next <= h/2 up to this slack
HALVING_SLACK = 1e-6
SEQUENCE_DEGREES = (8, 16, 32, 64, 128, 256)
# highest degree rebuilt for the ratio profiles; larger degrees follow the decay model
SEQUENCE_LMAX = 2048
EXACTNESS_MODES = ("relaxed", "frame")


# Targets

@dataclass(frozen=True)
class Target:
    """Zonal target f(x) = sum_l fhat(l) P_l(x . eta), eta the north pole."""
    name: str
    dim_n: int
    coeffs: np.ndarray
    params: Dict[str, float] = field(default_factory=dict)

    @property
    def eta(self) -> np.ndarray:
        e = np.zeros(self.dim_n + 1)
        e[-1] = 1.0
        return e

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def sobolev_coeffs(self, gamma: float) -> np.ndarray:
        return self.coeffs * spectral_symbol(self.dim_n, np.arange(self.coeffs.size)) ** gamma

    def evaluate(self, points, gamma: float = 0.0) -> np.ndarray:
        return zonal_series(self.sobolev_coeffs(gamma), self.dim_n,
                            np.asarray(points, dtype=float) @ self.eta)

    def l2_norm(self) -> float:
        c = self.coeffs
        return math.sqrt(float(np.sum(c ** 2 * eigenspace_dims(self.dim_n, c.size - 1)))
                         / sphere_volume(self.dim_n))


def cap_coefficients(n: int, theta0: float, L: int) -> np.ndarray:
    """Coefficients of the indicator of the cap {x . eta >= cos theta0}."""
    l = np.arange(L + 1)
    if n == 1:
        out = np.empty(L + 1)
        out[0] = 2.0 * theta0
        out[1:] = 2.0 * np.sin(l[1:] * theta0) / l[1:]
        return out
    if n != 2:
        raise UnsupportedDimension("cap targets exist for n <= 2 only", n=n)
    x0 = math.cos(theta0)
    out = np.empty(L + 1)
    out[0] = 1.0 - x0
    out[1:] = (eval_legendre(l[1:] - 1, x0) - eval_legendre(l[1:] + 1, x0)) / (2 * l[1:] + 1)
    return 2.0 * math.pi * out


def bump_profile(theta0: float) -> Callable:
    """C-infinity zonal bump exp(1 - 1/(1 - (theta/theta0)^2)) on the cap of radius theta0."""
    def profile(t):
        theta = np.arccos(np.clip(t, -1.0, 1.0))
        u = np.minimum(theta / theta0, 1.0)
        inside = u < 1.0
        gap = np.where(inside, 1.0 - u * u, 1.0)
        return np.where(inside, np.exp(1.0 - 1.0 / gap), 0.0)
    return profile


def make_target(name: str, n: int, degree: int = TARGET_DEGREE, **params) -> Target:
    """Target catalog: polynomial, bump, cap, green, green_bump, green_cap."""
    nu = spectral_symbol(n, np.arange(degree + 1))
    theta0 = float(params.get("theta0", 0.5 * math.pi))
    s = float(params.get("s", 3.0))
    if name == "polynomial":
        d = int(params.get("d", 4))
        coeffs = 1.0 / (np.arange(d + 1) + 1.0)
        return Target(name, n, coeffs, {"d": d})
    if name in ("bump", "green_bump"):
        bump = funk_hecke_coefficients(bump_profile(theta0), n, degree, count=4 * degree + 256)
        if name == "bump":
            return Target(name, n, bump, {"theta0": theta0})
        return Target(name, n, bump * nu ** -s, {"theta0": theta0, "s": s})
    if name in ("cap", "green_cap"):
        cap = cap_coefficients(n, theta0, degree)
        if name == "cap":
            return Target(name, n, cap, {"theta0": theta0})
        return Target(name, n, cap * nu ** -s, {"theta0": theta0, "s": s})
    if name == "green":
        return Target(name, n, nu ** -s, {"s": s})
    raise ValidationError(f"unknown target '{name}'",
                          choices="polynomial,bump,cap,green,green_bump,green_cap")


def nested_sets(n: int, count: int, levels: int, generator: Optional[str] = None,
                rho_cap: float = 2.5, seed: int = 0) -> List[CenterSet]:
    """Base set from a generator, refined to levels + 1 nested sets."""
    generator = generator or ("equispaced" if n == 1 else "fibonacci" if n == 2 else "uniform")
    rng = np.random.default_rng(seed)
    base = analyze_centers(n, generate_points(generator, n, count, rng), seed=seed)
    return refine_nested(base, levels, rho_cap=rho_cap, seed=seed)


# Direct rates

@dataclass
class RateExperiment:
    """Kernel, target, nested center sets and the norm to measure in."""
    kernel: ZonalKernel
    target: Target
    sets: List[CenterSet]
    p: float = 2.0
    gamma: float = 0.0
    beta: Optional[float] = None
    mask_k: Optional[int] = None
    oversample: float = 2.0
    exactness: str = "relaxed"
    config: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.exactness not in EXACTNESS_MODES:
            raise ValidationError(f"unknown exactness accounting '{self.exactness}'",
                                  choices=",".join(EXACTNESS_MODES))
        hs = [cs.mesh_norm_h for cs in self.sets]
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise ValidationError("center sets must strictly refine", h=hs)
        for level, (a, b) in enumerate(zip(hs, hs[1:]), start=1):
            if not a / 4.0 < b <= a / 2.0 * (1.0 + HALVING_SLACK):
                raise ValidationError("mesh norm must roughly halve per level",
                                      level=level, ratio=b / a)
        if self.beta is not None:
            margin = self.beta - self.gamma - self.kernel.dim_n / conjugate_exponent(self.p)
            if not margin > 0:
                raise ValidationError("need beta > gamma + n/p'", margin=margin)


def initial_rule_degree(cs: CenterSet, oversample: float) -> int:
    """Largest L with dim Pi_L <= N / oversample."""
    L = 0
    while poly_dimension(cs.dim_n, L + 1) <= cs.size / oversample:
        L += 1
    return L


def frame_level(n: int, max_degree: int, mask=None) -> FrameOperatorSpec:
    """Largest J whose B_J output degree stays within max_degree (J >= 0)."""
    mask = mask or build_mask()
    J = 0
    while FrameOperatorSpec(mask, J + 1, n).degree <= max_degree:
        J += 1
    return FrameOperatorSpec(mask, J, n)


def approximation_distance(net: SbfNetwork, target: Target, gamma: float, p: float) -> float:
    """||f - g||_{H^p_gamma}; p = 2 through the Gram system, other p on a grid."""
    kernel = lp_kernel_transform(net.kernel, gamma)
    g = SbfNetwork(kernel, net.centers, net.coeffs_a)
    if p == 2:
        return network_l2_distance(g, target.sobolev_coeffs(gamma), target.eta)
    band = min(target.degree, 2 * kernel.truncation_degree(1e-10))
    return lp_norm_on_grid(lambda x: target.evaluate(x, gamma) - g.evaluate(x),
                           net.dim_n, p, band)


def level_approximant(exp: RateExperiment, cs: CenterSet, mask):
    n = cs.dim_n
    rule = build_rule_with_backoff(cs, initial_rule_degree(cs, exp.oversample))
    relaxed = exp.exactness == "relaxed"
    limit = rule.degree_L // 2 if relaxed else frame_degree_limit(n, rule.degree_L)
    if limit < 0:
        raise DegreeOverflow("rule too coarse for the frame degree accounting",
                             rule_degree=rule.degree_L, N=cs.size)
    if exp.kernel.decay.kind == "none":
        limit = min(limit, exp.kernel.l_max)
    spec = frame_level(n, limit, mask)
    top = min(spec.degree, exp.target.degree)
    S = PolynomialOnSphere.from_zonal(n, apply_B_J(spec, exp.target.coeffs[:top + 1]),
                                      exp.target.eta, top)
    return rule, spec, quasi_interpolate(exp.kernel, rule, S, relaxed=relaxed)


def _direct_rate(exp: RateExperiment):
    """Per-level reports and the approximating networks."""
    mask = build_mask(exp.mask_k)
    records, networks = [], []
    for level, cs in enumerate(exp.sets):
        rule, spec, net = level_approximant(exp, cs, mask)
        dist = approximation_distance(net, exp.target, exp.gamma, exp.p)
        records.append({"level": level, "N": cs.size, "q": cs.sep_radius_q,
                        "h": cs.mesh_norm_h, "rho": cs.mesh_ratio_rho,
                        "rule_degree": rule.degree_L, "J": spec.J, "distance": dist})
        networks.append(net)
        logger.info(f"Direct rate level {level}: N={cs.size} M={rule.degree_L} "
                    f"J={spec.J} distance={dist:.6g}")
    report = {
        "kernel": exp.kernel.describe(),
        "target": {"name": exp.target.name, **exp.target.params},
        "p": exp.p, "gamma": exp.gamma, "beta": exp.beta, "exactness": exp.exactness,
        "expected_slope": None if exp.beta is None else exp.beta - exp.gamma,
        "levels": records,
        "config": dict(exp.config),
    }
    dists = [r["distance"] for r in records]
    if all(d < ZERO_DISTANCE for d in dists):
        report.update({"regime": "exact", "slope": None, "r_squared": None, "quoted": False})
    elif len(records) >= 2:
        fit = fit_loglog_slope([r["h"] for r in records], dists)
        report.update({"regime": "rate", "slope": fit.slope, "r_squared": fit.r_squared,
                       "quoted": fit.r_squared >= MIN_R_SQUARED})
        logger.info(f"Direct rate slope {fit.slope:.4f} (R^2={fit.r_squared:.4f})")
    return report, networks


def run_direct_rate(exp: RateExperiment) -> Dict[str, object]:
    """Measure ||f - Q(B_J f)||_{H^p_gamma} level by level and fit the rate in h."""
    return _direct_rate(exp)[0]


# Inverse recovery

@dataclass(frozen=True)
class RateFit:
    """dist ~ c h^mu log^-t(1/h)."""
    mu: float
    t: float
    log_c: float

    def to_dict(self) -> Dict[str, float]:
        return {"mu": self.mu, "t": self.t, "log_c": self.log_c}


def fit_inverse_rate(h: Sequence[float], distances: Sequence[float]) -> RateFit:
    """Least-squares fit of log d = log c + mu log h - t log log(1/h).

    Raises:
        FitUnstable: With fewer than three usable levels
    """
    h = np.asarray(h, dtype=float)
    d = np.asarray(distances, dtype=float)
    if d.size and np.all(d < ZERO_DISTANCE):
        return RateFit(math.inf, 0.0, -math.inf)
    keep = (d >= ZERO_DISTANCE) & (h > 0) & (h < 1)
    if keep.sum() < 3:
        raise FitUnstable("rate fit needs at least three usable levels", usable=int(keep.sum()))
    lh = np.log(h[keep])
    design = np.column_stack([np.ones(lh.size), lh, -np.log(-lh)])
    sol, _, rank, _ = lstsq(design, np.log(d[keep]))
    if rank < 3:
        raise FitUnstable("rate fit is rank deficient", rank=int(rank))
    return RateFit(float(sol[1]), float(sol[2]), float(sol[0]))


def synthetic_distances(mu: float, t: float, levels: int, start: int = 1):
    """(h_j, d_j) with h_j = 2^-j and d_j = 2^(-mu j) j^-t."""
    j = np.arange(start, start + levels, dtype=float)
    return 2.0 ** -j, 2.0 ** (-mu * j) * j ** -t


def _embed(net: SbfNetwork, cs: CenterSet) -> np.ndarray:
    a = np.zeros(cs.size)
    a[:net.centers.size] = net.coeffs_a
    return a


def level_trend(values: Sequence[float]) -> float:
    """Fitted log2 growth of a positive sequence per level."""
    v = np.asarray(values, dtype=float)
    keep = v > 0
    if keep.sum() < 2:
        return -math.inf
    j = np.arange(v.size)[keep]
    return float(np.polyfit(j, np.log2(v[keep]), 1)[0])


def run_inverse_recovery(kernel: ZonalKernel, target: Target, sets: List[CenterSet],
                         p: float = 2.0, nus: Optional[Sequence[float]] = None,
                         config: Optional[Dict[str, object]] = None) -> Dict[str, object]:
    """Fit (mu, t) from the direct distances and follow ||f_j||_{H^p_nu} for nu < mu.

    The approximants live on nested sets, so f_{j+1} - f_j is itself a
    network on X_{j+1}; the sequence is Cauchy-like when those differences
    shrink geometrically.
    """
    config = config or {}
    mode = str(config.get("exactness", "relaxed"))
    direct, networks = _direct_rate(RateExperiment(kernel, target, sets, p=p, config=config,
                                                    exactness=mode))
    dists = [r["distance"] for r in direct["levels"]]
    fit = fit_inverse_rate([r["h"] for r in direct["levels"]], dists)
    if nus is None:
        top = fit.mu if math.isfinite(fit.mu) else 4.0
        nus = [round(0.25 * top * k, 6) for k in (1, 2, 3)]
    verdicts = []
    for nu in nus:
        row = {"nu": float(nu), "below_mu": bool(nu < fit.mu)}
        try:
            norms = [sobolev_norm(net, nu, p) for net in networks]
            diffs = []
            for prev, cur in zip(networks, networks[1:]):
                delta = SbfNetwork(kernel, cur.centers, cur.coeffs_a - _embed(prev, cur.centers))
                diffs.append(sobolev_norm(delta, nu, p))
            rate = level_trend(diffs)
            row.update({"norms": norms, "differences": diffs, "difference_trend": rate,
                        "cauchy": bool(rate < 0 or all(d < ZERO_DISTANCE for d in diffs)),
                        "status": "ok"})
        except DivergentSeries as e:
            row.update({"norms": None, "differences": None, "cauchy": False,
                        "status": "divergent", "reason": e.message})
        verdicts.append(row)
        logger.info(f"Inverse check nu={nu}: {row['status']} cauchy={row['cauchy']}")
    return {"fit": fit.to_dict(), "distances": dists, "direct": direct, "nus": verdicts,
            "config": dict(config or {})}


# Besov sequence norms

@dataclass(frozen=True)
class BesovRecord:
    tau: float
    r: float
    distances: tuple
    seq_norm: float
    verdict: str

    def to_dict(self) -> Dict[str, object]:
        return {"tau": self.tau, "r": self.r, "distances": list(self.distances),
                "seq_norm": self.seq_norm, "verdict": self.verdict, "heuristic": True}


def besov_seq_norm(distances: Sequence[float], tau: float, r: float) -> float:
    """(sum_j (2^(j r) |a_j|)^tau)^(1/tau), or sup_j 2^(j r) |a_j| for tau = inf."""
    if not r > 0 or not tau > 0:
        raise ValidationError("need r > 0 and tau > 0", r=r, tau=tau)
    a = np.abs(np.asarray(distances, dtype=float))
    with np.errstate(over="ignore"):
        weighted = 2.0 ** (r * np.arange(a.size)) * a
    if math.isinf(tau):
        return float(np.max(weighted)) if a.size else 0.0
    return float(np.sum(weighted ** tau) ** (1.0 / tau))


def besov_verdict(mu: float, t: float, r: float, tau: float) -> str:
    """Finiteness of ||(2^(-mu j) j^-t)_j||_{tau, r}: member iff r < mu, or r = mu with tau t > 1."""
    if r < mu:
        return "member"
    if r == mu:
        if math.isinf(tau):
            return "member" if t >= 0 else "non-member"
        return "member" if tau * t > 1 else "non-member"
    return "non-member"


def classify_r(mu: float, t: float, r: float, tau: float, margin: float = TREND_MARGIN) -> str:
    """Verdict from a fitted rate.

    Raises:
        InconclusiveTrend: If mu lies within margin of r
    """
    if math.isfinite(mu) and abs(mu - r) < margin:
        raise InconclusiveTrend("fitted exponent too close to r", mu=mu, r=r)
    return besov_verdict(mu, t, r, tau)


def classify_besov(kernel: ZonalKernel, target: Target, sets: List[CenterSet], p: float,
                   tau: float, r_grid: Sequence[float],
                   config: Optional[Dict[str, object]] = None) -> Dict[str, object]:
    """Heuristic B^r_{tau,p} membership of the target for every r in r_grid."""
    config = config or {}
    mode = str(config.get("exactness", "relaxed"))
    direct = run_direct_rate(RateExperiment(kernel, target, sets, p=p, config=config,
                                            exactness=mode))
    dists = [r["distance"] for r in direct["levels"]]
    hs = [r["h"] for r in direct["levels"]]
    if all(d < ZERO_DISTANCE for d in dists):
        mu, t = math.inf, 0.0
    elif len(dists) >= 3:
        fit = fit_inverse_rate(hs, dists)
        mu, t = fit.mu, fit.t
    else:
        mu, t = fit_loglog_slope(hs, dists).slope, 0.0
    records = []
    for r in r_grid:
        try:
            verdict = classify_r(mu, t, r, tau)
        except InconclusiveTrend:
            verdict = "inconclusive"
        records.append(BesovRecord(tau, float(r), tuple(dists),
                                   besov_seq_norm(dists, tau, r), verdict).to_dict())
    logger.info(f"Besov classification mu={mu:.4g}: "
                + ", ".join(f"r={rec['r']}:{rec['verdict']}" for rec in records))
    return {"mu": mu, "t": t, "records": records, "direct": direct,
            "config": dict(config or {})}


# Sequence conditions for smooth kernels

def _first_nonincreasing(log_profiles: Dict[int, np.ndarray]) -> Optional[int]:
    for m in sorted(log_profiles):
        vals = log_profiles[m]
        if np.all(np.diff(vals) <= 1e-12 * np.maximum(np.abs(vals[:-1]), 1.0)):
            return m
    return None


def check_sequence_conditions(k: ZonalKernel, beta: float,
                              Ls: Sequence[int] = SEQUENCE_DEGREES,
                              max_m: int = 8) -> Dict[str, object]:
    """Smallest m making E_{2^m L}(L^beta phi)_1 / phihat_min(L) non-increasing in L.

    The direct-theorem ratio E_{2^m L}(L^(beta + n/2) phi)_1 / (L^beta phi)_min(L)
    is checked the same way; the certified m is the larger of the two. Ratios are
    formed in log space, since the tails of smooth kernels underflow long before
    the largest L.

    Raises:
        InvalidFamily: For kernels without geometric coefficient decay
        ConditionFailed: If no m <= max_m works
    """
    if k.kernel_type != "smooth":
        raise InvalidFamily("sequence conditions apply to smooth kernels only",
                            family=k.family_tag)
    Ls = np.asarray(sorted(Ls))
    need = min(int(Ls[-1]) * 2 ** max_m, max(SEQUENCE_LMAX, int(Ls[-1])))
    kernel = k.rebuild(need) if k.l_max < need and k.builder else k
    if kernel.l_max < Ls[-1]:
        raise ValidationError("kernel is not stored up to the largest L",
                              l_max=kernel.l_max, L=int(Ls[-1]))
    n = kernel.dim_n
    half = n / 2.0
    smooth_b = lp_kernel_transform(kernel, beta)
    smooth_d = lp_kernel_transform(kernel, beta + half)
    min_plain = np.minimum.accumulate(kernel.log_coeffs)
    min_beta = np.minimum.accumulate(smooth_b.log_coeffs)

    bern, direct = {}, {}
    for m in range(max_m + 1):
        tops = Ls * 2 ** m
        bern[m] = np.array([log_best_poly_error(smooth_b, int(M), 1.0) for M in tops]) \
            - min_plain[Ls]
        direct[m] = np.array([log_best_poly_error(smooth_d, int(M), 1.0) for M in tops]) \
            - min_beta[Ls]
    m_bern = _first_nonincreasing(bern)
    m_direct = _first_nonincreasing(direct)
    if m_bern is None or m_direct is None:
        raise ConditionFailed("no m makes the ratio profiles non-increasing",
                              family=kernel.family_tag, max_m=max_m)
    certified = max(m_bern, m_direct)
    logger.info(f"Sequence conditions for {kernel.family_tag}: m_bernstein={m_bern} "
                f"m_direct={m_direct}")
    return {
        "family": kernel.family_tag, "params": dict(kernel.params), "beta": beta,
        "L": [int(v) for v in Ls], "m_bernstein": m_bern, "m_direct": m_direct,
        "certified_m": certified,
        "log_bernstein_profile": [float(v) for v in bern[m_bern]],
        "log_direct_profile": [float(v) for v in direct[m_direct]],
    }


def run_experiments(tasks: Sequence[Callable[[], Dict[str, object]]],
                    workers: int = 1) -> List[Dict[str, object]]:
    """Run independent experiments; reports come back in submission order."""
    return WorkerManager(workers).run(tasks)
