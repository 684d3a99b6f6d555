"""SBF networks: evaluation, interpolation, smoothed systems and stability for sbfctl."""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, eigh, eigvalsh, inv, solve

from errors import (ConditionFailed, DegreeOverflow, DivergentSeries, SearchBudgetExhausted,
                    SingularSystem, ValidationError, ZeroCoefficient)
from frames import BandKernel, Envelope, dimension_shift, make_envelope
from harmonics import (EVAL_CHUNK, PolynomialOnSphere, eigenspace_dims, lambda_n,
                       real_harmonics, spectral_symbol, zonal_series)
from kernel_catalog import KernelFamily, ZonalKernel, lp_kernel_transform, min_coeff_profile
from quadrature import QuadratureRule, lp_norm_on_grid
from sphere_geometry import (CenterSet, evaluation_grid, point_coords, sphere_grid,
                             sphere_volume)
from utils import conjugate_exponent, inverse_exponent

logger = logging.getLogger(__name__)

N_CAP = 2000
SERIES_TOL = 1e-13
GRAM_TOL = 1e-11
DEFAULT_SMOOTHING_FACTOR = 1.0
C_CANDIDATES = (4.0, 2.0, 1.0, 0.5, 0.25, 0.125, 0.0625)
DOMINANCE_TARGET = 0.5


def kernel_values(kernel: ZonalKernel, t, tol: float = SERIES_TOL) -> np.ndarray:
    """phi(t) by closed form, or by the series truncated where its tail drops below tol.

    Raises:
        DivergentSeries: If phi is singular at t or the series does not converge
    """
    if kernel.closed_form is not None:
        return kernel.evaluate(t)
    if not math.isfinite(kernel.tail_bound(0)):
        raise DivergentSeries("kernel series does not converge pointwise",
                              family=kernel.family_tag)
    return kernel.evaluate_series(t, kernel.truncation_degree(tol))


def _dots(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.clip(a @ b.T, -1.0, 1.0)


@dataclass(frozen=True)
class SbfNetwork:
    """g(x) = sum_xi a_xi phi(x . xi)."""
    kernel: ZonalKernel
    centers: CenterSet
    coeffs_a: np.ndarray

    def __post_init__(self):
        a = np.array(self.coeffs_a, dtype=float).reshape(-1)
        if a.size != self.centers.size:
            raise ValidationError("one coefficient per center required",
                                  coeffs=a.size, centers=self.centers.size)
        if self.kernel.dim_n != self.centers.dim_n:
            raise ValidationError("kernel and centers live on different spheres")
        a.setflags(write=False)
        object.__setattr__(self, "coeffs_a", a)

    @property
    def dim_n(self) -> int:
        return self.centers.dim_n

    def evaluate(self, points, tol: float = SERIES_TOL) -> np.ndarray:
        """Network values at one point or an (M, n + 1) array of points."""
        pts = point_coords(points)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        out = np.empty(pts.shape[0])
        chunk = max(1, EVAL_CHUNK // self.centers.size)
        for start in range(0, pts.shape[0], chunk):
            block = _dots(pts[start:start + chunk], self.centers.points)
            out[start:start + chunk] = kernel_values(self.kernel, block, tol) @ self.coeffs_a
        return float(out[0]) if single else out

    def coefficient_norm(self, p: float) -> float:
        """|a|_p."""
        return float(np.linalg.norm(self.coeffs_a, ord=p))

    def to_dict(self, centers_file: str = "") -> Dict[str, object]:
        return {
            "family_tag": self.kernel.family_tag,
            "params": dict(self.kernel.params),
            "centers_file": centers_file,
            "coeffs": [float(v) for v in self.coeffs_a],
        }


def random_network(kernel: ZonalKernel, cs: CenterSet, rng: np.random.Generator) -> SbfNetwork:
    """Network with coefficients drawn uniformly from [-1, 1]."""
    return SbfNetwork(kernel, cs, rng.uniform(-1.0, 1.0, cs.size))


def kernel_matrix(kernel: ZonalKernel, cs: CenterSet, tol: float = SERIES_TOL) -> np.ndarray:
    """A = [phi(xi . eta)]."""
    return kernel_values(kernel, _dots(cs.points, cs.points), tol)


def interpolate(kernel: ZonalKernel, cs: CenterSet, values_y) -> SbfNetwork:
    """Network with g(xi) = y_xi on every center.

    Raises:
        SingularSystem: If A is numerically singular or the solve misses y
    """
    y = np.asarray(values_y, dtype=float).reshape(-1)
    if y.size != cs.size:
        raise ValidationError("one value per center required", values=y.size, centers=cs.size)
    if cs.size > N_CAP:
        raise ValidationError(f"N={cs.size} exceeds the dense solve cap {N_CAP}")
    A = kernel_matrix(kernel, cs)
    evals = eigvalsh(A)
    lam_min, lam_max = float(evals[0]), float(evals[-1])
    if lam_min <= 1e-15 * max(lam_max, 1e-300):
        raise SingularSystem("interpolation matrix is numerically singular",
                             lambda_min=lam_min, lambda_max=lam_max)
    a = solve(A, y, assume_a="pos")
    miss = float(np.max(np.abs(A @ a - y)))
    if miss > 1e-8 * max(float(np.max(np.abs(y))), 1e-300):
        raise SingularSystem("interpolation solve did not reproduce the data",
                             lambda_min=lam_min, residual=miss)
    logger.info(f"Interpolated N={cs.size} with {kernel.family_tag}: "
                f"lambda_min={lam_min:.3e} residual={miss:.3e}")
    return SbfNetwork(kernel, cs, a)


# Smoothed systems

@dataclass(frozen=True)
class InterpolationSystem:
    """A_eps with entries phi_eps(xi . eta) and its inverse-norm estimates."""
    matrix_A: np.ndarray
    epsilon: float
    cond_estimates: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class DiagonalDominance:
    """||D^-1 F||_1 of A = D + F and the resulting bound on ||A^-1||_1."""
    ratio: float
    diag_inverse_norm: float
    inverse_bound: float


def smoothed_kernel(kernel: ZonalKernel, envelope: Envelope, eps: float) -> ZonalKernel:
    """phi_eps with coefficients kappa(eps nu(l)) phihat(l) over the envelope band."""
    band = BandKernel(envelope, eps, kernel.dim_n)
    top = band.band
    k = kernel.rebuild(top) if kernel.l_max < top else kernel
    coeffs = band.coeffs * k.coeffs[:top + 1]
    with np.errstate(divide="ignore"):
        log_c = np.log(coeffs)
    params = dict(k.params)
    params.update({"envelope": envelope.name, "epsilon": float(eps)})
    return dataclasses.replace(k, params=params, log_coeffs=log_c,
                               decay=dataclasses.replace(k.decay, kind="none"),
                               closed_form=None, builder=None)


def _inverse_estimates(A: np.ndarray) -> Dict[str, float]:
    lam_min = float(eigvalsh(A)[0])
    try:
        norm1 = float(np.max(np.sum(np.abs(inv(A)), axis=0)))
    except LinAlgError:
        norm1 = math.inf
    return {
        "lambda_min": lam_min,
        "norm1_inv": norm1,
        "norm2_inv": 1.0 / lam_min if lam_min > 0 else math.inf,
    }


def smoothed_matrix(kernel: ZonalKernel, cs: CenterSet, kappa: Envelope, eps: float,
                    n_cap: int = N_CAP) -> InterpolationSystem:
    """Assemble A_eps and estimate ||A_eps^-1||_1, ||A_eps^-1||_2 and lambda_min."""
    if not 0.0 < eps <= 1.0:
        raise ValidationError(f"epsilon must lie in (0, 1], got {eps}")
    if cs.size > n_cap:
        raise ValidationError(f"N={cs.size} exceeds the dense solve cap {n_cap}")
    smooth = smoothed_kernel(kernel, kappa, eps)
    A = zonal_series(smooth.coeffs, cs.dim_n, _dots(cs.points, cs.points))
    est = _inverse_estimates(A)
    logger.debug(f"A_eps eps={eps:.4g} band={smooth.l_max}: {est}")
    return InterpolationSystem(A, eps, est)


def diagonal_dominance(A: np.ndarray) -> DiagonalDominance:
    """Split A = D + F and bound ||A^-1||_1 <= ||D^-1||_1 / (1 - ||D^-1 F||_1)."""
    d = np.diag(A)
    if np.any(d <= 0):
        return DiagonalDominance(math.inf, math.inf, math.inf)
    F = A - np.diag(d)
    ratio = float(np.max(np.sum(np.abs(F) / d[:, None], axis=0)))
    dinv = float(np.max(1.0 / d))
    bound = dinv / (1.0 - ratio) if ratio < 1.0 else math.inf
    return DiagonalDominance(ratio, dinv, bound)


def calibrate_epsilon_factor(kernel: ZonalKernel, cs: CenterSet, kappa: Envelope,
                             candidates: Sequence[float] = C_CANDIDATES,
                             target: float = DOMINANCE_TARGET) -> float:
    """Largest c with ||D^-1 F||_1 <= target for A_eps at eps = c q.

    Raises:
        ConditionFailed: If no candidate reaches the target
    """
    q = cs.sep_radius_q
    for c in sorted(candidates, reverse=True):
        eps = min(1.0, c * q)
        smooth = smoothed_kernel(kernel, kappa, eps)
        A = zonal_series(smooth.coeffs, cs.dim_n, _dots(cs.points, cs.points))
        dom = diagonal_dominance(A)
        logger.debug(f"c={c}: ||D^-1 F||_1 = {dom.ratio:.4g}")
        if dom.ratio <= target:
            logger.info(f"Calibrated smoothing factor c={c} for {kernel.family_tag} "
                        f"({kappa.name}): dominance {dom.ratio:.4g}")
            return c
    raise ConditionFailed("no smoothing factor makes A_eps diagonally dominant",
                          target=target, candidates=",".join(str(c) for c in candidates))


# Gram matrices and norms

def gram_coefficients(kernel: ZonalKernel, gamma: float = 0.0, tol: float = GRAM_TOL,
                      degree: Optional[int] = None):
    """nu^2gamma phihat^2 up to the truncation degree, plus the L2 tail past it.

    Raises:
        DivergentSeries: If L^gamma phi is not in L^2
    """
    k = lp_kernel_transform(kernel, gamma)
    if degree is None:
        top = k.truncation_degree(tol, power=2)
        rest = k.tail_bound(top, power=2)
    else:
        if degree > k.l_max:
            k = k.rebuild(degree)
        top, rest = degree, 0.0
    if not math.isfinite(rest):
        raise DivergentSeries("transformed kernel is not in L^2", gamma=gamma,
                              family=kernel.family_tag)
    return k.coeffs[:top + 1] ** 2, rest


def sobolev_gram(kernel: ZonalKernel, cs: CenterSet, gamma: float, tol: float = GRAM_TOL,
                 degree: Optional[int] = None) -> np.ndarray:
    """Entries <L^gamma phi(. xi), L^gamma phi(. eta)> = sum nu^2gamma phihat^2 P_l(xi . eta).

    The L2 tail past the truncation degree is added to the diagonal.
    """
    coeffs, rest = gram_coefficients(kernel, gamma, tol, degree)
    G = zonal_series(coeffs, cs.dim_n, _dots(cs.points, cs.points))
    G[np.diag_indices_from(G)] += rest
    return G


def l2_gram(kernel: ZonalKernel, cs: CenterSet, tol: float = GRAM_TOL,
            degree: Optional[int] = None) -> np.ndarray:
    return sobolev_gram(kernel, cs, 0.0, tol, degree)


def harmonic_coefficients(net: SbfNetwork, L: int) -> PolynomialOnSphere:
    """Degree <= L part of g: coefficient (l, m) is phihat(l) sum_xi a_xi Y_lm(xi)."""
    k = net.kernel.rebuild(L) if net.kernel.l_max < L else net.kernel
    Y = real_harmonics(net.dim_n, L, net.centers.points)
    poly = PolynomialOnSphere(net.dim_n, L, Y.T @ net.coeffs_a)
    return poly.multiply_degrees(k.coeffs[:L + 1])


def sobolev_norm(net: SbfNetwork, gamma: float, p: float, degree: Optional[int] = None,
                 grid_band: Optional[int] = None) -> float:
    """||g||_{H^p_gamma} = ||L^gamma g||_p.

    p = 2 is computed through the Sobolev Gram matrix; other p on a grid.

    Raises:
        DivergentSeries: If L^gamma phi is not in L^p
    """
    k = net.kernel
    if k.family is KernelFamily.GREEN:
        margin = k.params["beta"] - gamma - k.dim_n / conjugate_exponent(p)
        if not margin > 0:
            raise DivergentSeries("gamma too large for this Green kernel", margin=margin)
    if p == 2:
        G = sobolev_gram(k, net.centers, gamma, degree=degree)
        return math.sqrt(max(float(net.coeffs_a @ G @ net.coeffs_a), 0.0))
    transformed = SbfNetwork(lp_kernel_transform(k, gamma, pointwise=True),
                             net.centers, net.coeffs_a)
    band = grid_band or min(transformed.kernel.truncation_degree(1e-8), 256)
    return lp_norm_on_grid(transformed.evaluate, net.dim_n, p, band)


def network_l2_distance(net: SbfNetwork, f_coeffs, eta, tol: float = GRAM_TOL) -> float:
    """||f - g||_2 for f zonal about eta with coefficients f_coeffs."""
    f = np.asarray(f_coeffs, dtype=float)
    k = net.kernel.rebuild(f.size - 1) if net.kernel.l_max < f.size - 1 else net.kernel
    n = net.dim_n
    f_sq = float(np.sum(f ** 2 * eigenspace_dims(n, f.size - 1)) / sphere_volume(n))
    cross = zonal_series(f * k.coeffs[:f.size], n, net.centers.points @ np.asarray(eta))
    G = l2_gram(k, net.centers, tol)
    a = net.coeffs_a
    return math.sqrt(max(f_sq - 2.0 * float(a @ cross) + float(a @ G @ a), 0.0))


def projection_distance(kernel: ZonalKernel, cs: CenterSet, f_coeffs, eta,
                        tol: float = GRAM_TOL):
    """Exact L2 distance from a zonal f to span{phi(. xi)} via the Gram system.

    Returns:
        (distance, best network)
    """
    f = np.asarray(f_coeffs, dtype=float)
    n = cs.dim_n
    k = kernel.rebuild(f.size - 1) if kernel.l_max < f.size - 1 else kernel
    G = l2_gram(k, cs, tol)
    r = zonal_series(f * k.coeffs[:f.size], n, cs.points @ np.asarray(eta))
    try:
        a = solve(G, r, assume_a="pos")
    except LinAlgError:
        raise SingularSystem("Gram matrix is numerically singular", N=cs.size)
    f_sq = float(np.sum(f ** 2 * eigenspace_dims(n, f.size - 1)) / sphere_volume(n))
    return math.sqrt(max(f_sq - float(r @ a), 0.0)), SbfNetwork(kernel, cs, a)


# Stability

@dataclass(frozen=True)
class StabilityReport:
    """Certified interval [lower_bound, upper_bound] for the p-norm stability ratio."""
    p: float
    lower_bound: float
    upper_bound: float
    witness_coeffs: np.ndarray
    exhausted: bool = False
    details: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "p": self.p,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "exhausted": self.exhausted,
            "details": dict(self.details),
        }


def stability_upper_bound(kernel: ZonalKernel, cs: CenterSet, p: float,
                          kappa: Optional[Envelope] = None,
                          c: Optional[float] = None) -> Dict[str, float]:
    """sigma_p <= ||A_eps^-1||_p M_1^(1/p) ||K_eps||_1^(1/p'), eps = c q.

    M_1 = sup_x sum_xi |K_eps(xi . x)|; ||A_eps^-1||_p is bounded by
    ||A_eps^-1||_1 (by 1/lambda_min for p = 2). Green-type kernels default to
    the high-pass bump with a calibrated c, others to the low-pass b.
    """
    green_type = kernel.kernel_type == "green"
    if kappa is None:
        kappa = make_envelope("bump_high" if green_type else "lowpass")
    if c is None:
        c = calibrate_epsilon_factor(kernel, cs, kappa) if green_type \
            else DEFAULT_SMOOTHING_FACTOR
    eps = min(1.0, c * cs.sep_radius_q)
    system = smoothed_matrix(kernel, cs, kappa, eps)
    band = BandKernel(kappa, eps, cs.dim_n)
    table = band.tabulate()
    sample = np.vstack([cs.points, evaluation_grid(cs.dim_n, max(4096, 16 * cs.size))])
    sums = np.abs(band.evaluate_fast(_dots(sample, cs.points), table)).sum(axis=1)
    m1 = float(np.max(sums))
    l1 = band.l1_norm()
    est = system.cond_estimates
    inv_norm = est["norm2_inv"] if p == 2 else est["norm1_inv"]
    bound = inv_norm * m1 ** inverse_exponent(p) * l1 ** inverse_exponent(conjugate_exponent(p))
    return {"upper_bound": bound, "c": c, "epsilon": eps, "m1": m1, "kernel_l1": l1,
            "inverse_norm": inv_norm, "lambda_min_eps": est["lambda_min"]}


def _coordinate_ascent(ratio, a0: np.ndarray, budget: int):
    """Maximize ratio(a) by signed coordinate steps; returns (a, value, exhausted)."""
    a = a0.copy()
    best = ratio(a)
    step = 0.5 * float(np.max(np.abs(a))) or 1.0
    evals = 1
    while step > 1e-3 * float(np.max(np.abs(a))):
        improved = False
        for i in range(a.size):
            for sign in (1.0, -1.0):
                if evals >= budget:
                    return a, best, True
                trial = a.copy()
                trial[i] += sign * step
                val = ratio(trial)
                evals += 1
                if val > best:
                    a, best, improved = trial, val, True
                    break
        if not improved:
            step *= 0.5
    return a, best, False


def stability_ratio(kernel: ZonalKernel, cs: CenterSet, p: float, search_budget: int = 2000,
                    kappa: Optional[Envelope] = None, c: Optional[float] = None,
                    with_upper: bool = True, strict: bool = False) -> StabilityReport:
    """Witness lower bound and theorem upper bound for sup |a|_p / ||g||_p.

    The witness starts from the eigenvector of the smallest eigenvalue of the
    L2 Gram matrix; p = 2 stops there, other p refine it by coordinate ascent
    on a fixed product grid. An exhausted budget is flagged, and raised only
    in strict mode.

    Raises:
        SearchBudgetExhausted: If strict and the witness search ran out of budget
    """
    if cs.size > N_CAP:
        raise ValidationError(f"N={cs.size} exceeds the dense solve cap {N_CAP}")
    G = l2_gram(kernel, cs)
    evals, vecs = eigh(G)
    seed = vecs[:, 0]
    details = {"lambda_min_gram": float(evals[0])}
    exhausted = False
    if p == 2:
        witness = seed
        lower = float(np.linalg.norm(seed) / math.sqrt(max(seed @ G @ seed, 1e-300)))
    else:
        band = min(kernel.truncation_degree(1e-8), 128)
        pts, w = sphere_grid(cs.dim_n, band + 2 if cs.dim_n == 2 else 2 * band + 2)
        Phi = kernel_values(kernel, _dots(pts, cs.points))

        def ratio(a):
            vals = np.abs(Phi @ a)
            norm = float(np.max(vals)) if math.isinf(p) else float(np.sum(w * vals ** p)) ** (1 / p)
            return float(np.linalg.norm(a, ord=p)) / norm

        witness, lower, exhausted = _coordinate_ascent(ratio, seed, search_budget)
        if exhausted and strict:
            raise SearchBudgetExhausted("witness search ran out of budget",
                                        budget=search_budget, best=lower)
        if exhausted:
            logger.warning(f"Stability search budget {search_budget} exhausted; "
                           f"reporting best-so-far {lower:.6g}")
    upper = math.inf
    if with_upper:
        bound = stability_upper_bound(kernel, cs, p, kappa, c)
        upper = bound.pop("upper_bound")
        details.update(bound)
    logger.info(f"Stability ratio p={p} N={cs.size}: [{lower:.6g}, {upper:.6g}]")
    return StabilityReport(p, lower, upper, witness, exhausted, details)


def inverse_norm_ratio(kernel: ZonalKernel, cs: CenterSet, c: float) -> Dict[str, float]:
    """||A^-1||_2 phihat_min(L) / q^n with L = floor(2 / (c q) - lambda_n)."""
    q, n = cs.sep_radius_q, cs.dim_n
    lam_min = float(eigvalsh(kernel_matrix(kernel, cs))[0])
    L = max(0, int(math.floor(2.0 / (c * q) - lambda_n(n))))
    k = kernel.rebuild(L) if kernel.l_max < L else kernel
    phi_min = min_coeff_profile(k, 0.0, L)
    inv_norm = 1.0 / lam_min if lam_min > 0 else math.inf
    return {"q": q, "L": L, "lambda_min": lam_min, "phi_min": phi_min,
            "ratio": inv_norm * phi_min / q ** n}


def network_bernstein_ratios(kernel: ZonalKernel, sets: Sequence[CenterSet], gamma: float,
                             p: float, draws: int,
                             rng: np.random.Generator) -> List[Dict[str, float]]:
    """Max over random networks of ||g||_{H^p_gamma} / ||g||_p on each center set."""
    rows = []
    for level, cs in enumerate(sets):
        best = 0.0
        if p == 2:
            G0 = l2_gram(kernel, cs)
            Gg = sobolev_gram(kernel, cs, gamma)
            for _ in range(draws):
                a = rng.uniform(-1.0, 1.0, cs.size)
                best = max(best, math.sqrt(float(a @ Gg @ a) / float(a @ G0 @ a)))
        else:
            for _ in range(draws):
                net = random_network(kernel, cs, rng)
                best = max(best, sobolev_norm(net, gamma, p) / sobolev_norm(net, 0.0, p))
        rows.append({"level": level, "N": cs.size, "q": cs.sep_radius_q,
                     "inv_q": 1.0 / cs.sep_radius_q, "max_ratio": best})
        logger.info(f"Network Bernstein level {level}: N={cs.size} ratio={best:.6g}")
    return rows


# Convolution with polynomials

def _coeffs_through(kernel: ZonalKernel, L: int) -> np.ndarray:
    k = kernel.rebuild(L) if kernel.l_max < L else kernel
    return k.coeffs[:L + 1]


def convolve_poly(kernel: ZonalKernel, S: PolynomialOnSphere) -> PolynomialOnSphere:
    """phi * S: degree-l coefficients times phihat(l)."""
    return S.multiply_degrees(_coeffs_through(kernel, S.degree))


def inv_convolve_poly(kernel: ZonalKernel, S: PolynomialOnSphere) -> PolynomialOnSphere:
    """phi^-1 * S: degree-l coefficients divided by phihat(l).

    Raises:
        ZeroCoefficient: If phihat(l) = 0 for a degree S uses
    """
    c = _coeffs_through(kernel, S.degree)
    used = np.unique(S.degrees[S.coeffs != 0])
    zero = [int(l) for l in used if c[l] == 0]
    if zero:
        raise ZeroCoefficient("kernel coefficient vanishes on a degree of S",
                              degree=zero[0], family=kernel.family_tag)
    with np.errstate(divide="ignore"):
        recip = np.where(c > 0, 1.0 / c, 0.0)
    return S.multiply_degrees(recip)


def green_fredholm_solve(beta: float, psi_coeffs, S: PolynomialOnSphere) -> PolynomialOnSphere:
    """Solve T + psi * T = L^beta S degree by degree."""
    nu = spectral_symbol(S.dim_n, np.arange(S.degree + 1))
    psi = np.zeros(S.degree + 1)
    given = np.asarray(psi_coeffs, dtype=float)[:S.degree + 1]
    psi[:given.size] = given
    return S.multiply_degrees(nu ** beta / (1.0 + psi))


def frame_degree_requirement(n: int, degree: int) -> int:
    """Exactness degree 2^(J + j_n + 2) for the smallest J with degree <= 2^(J + j_n - 1)."""
    shift = dimension_shift(n)
    J = max(0, int(math.ceil(math.log2(max(degree, 1)))) + 1 - shift)
    return 2 ** (J + shift + 2)


def frame_degree_limit(n: int, rule_degree: int) -> int:
    """Largest polynomial degree whose frame requirement is at most rule_degree (-1 if none)."""
    D = -1
    while frame_degree_requirement(n, D + 1) <= rule_degree:
        D += 1
    return D


def quasi_interpolate(kernel: ZonalKernel, rule: QuadratureRule, S: PolynomialOnSphere,
                      relaxed: bool = False) -> SbfNetwork:
    """Q S = sum_xi c_xi (phi^-1 * S)(xi) phi(. xi).

    By default the rule must be exact to degree 2^(J + j_n + 2), the frame
    accounting for deg S <= 2^(J + j_n - 1). relaxed=True only asks for
    L >= 2 deg S, enough to integrate (phi^-1 * S) against the degree <= L - deg S
    part of phi exactly.

    Raises:
        DegreeOverflow: If the rule's exactness degree is below the requirement
        ZeroCoefficient: If phi^-1 * S is undefined
    """
    D = max(S.effective_degree(), 0)
    needed = 2 * D if relaxed else frame_degree_requirement(S.dim_n, D)
    if rule.degree_L < needed:
        raise DegreeOverflow("quadrature exactness degree too low for S",
                             rule_degree=rule.degree_L, poly_degree=D, required=needed,
                             accounting="relaxed" if relaxed else "frame")
    T = inv_convolve_poly(kernel, S.truncate(D))
    a = rule.weights * T.evaluate(rule.centers.points)
    return SbfNetwork(kernel, rule.centers, a)
