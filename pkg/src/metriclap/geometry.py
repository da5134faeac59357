"""Induced-metric estimation and convergence-assumption audits.

A metric oracle d on a chart induces a candidate Riemannian form at each
point, half the Hessian of y -> d^2(y, x). This module estimates that form
by finite differences, detects degeneracy, audits the two properties that
make the scaled graph Laplacian converge (first-order agreement of d with
the geodesic distance along geodesics, and the fourth-order comparability
bound d_g^2 - d^2 <= K d_g^4 below a separation scale eps0), and evaluates
the kernel-integral bias terms and their non-asymptotic bounds.

All audits are pure functions of their grids; reports are immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
import scipy.integrate
import scipy.optimize
import scipy.special

from .oracles import (
    WEIGHTED_L1_EXCLUDED,
    MetricOracle,
    canonical_angle,
    circle_separation,
)

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------
# induced metric from the squared-distance Hessian
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class BilinearForm:
    """Symmetric m x m form estimated in a chart at a base point."""

    matrix: np.ndarray
    base_point: np.ndarray
    step: float
    richardson_error: float


def _pairwise(metric, points) -> np.ndarray:
    if isinstance(metric, MetricOracle):
        return metric.pairwise(points)
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        return np.asarray(metric(pts[:, None], pts[None, :]), dtype=float)
    return np.asarray(metric(pts[:, None, :], pts[None, :, :]), dtype=float)


def induced_metric_hessian(metric, chart_point, step: float = 1e-3) -> BilinearForm:
    """Half the Hessian of y -> d^2(y, x) at y = x by central differences.

    Richardson-extrapolated over steps {h, h/2}; the base point is a
    critical point of the squared distance, so the diagonal stencil reuses
    d(x, x) = 0.

    Parameters
    ----------
    metric : callable or MetricOracle
        Pairwise distance; called with scalar chart points when chart_point
        is scalar, with vectors otherwise.
    chart_point : float or array
        Base point in the chart.
    step : float
        Base finite-difference step h.

    Returns
    -------
    BilinearForm
        matrix is the symmetrized half-Hessian; richardson_error is the
        max-entry difference of the two step estimates divided by 3.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(chart_point, dtype=float)
    scalar_chart = x.ndim == 0
    base = np.atleast_1d(x).astype(float)
    m = base.size

    def sq(y: np.ndarray) -> float:
        if scalar_chart:
            val = float(metric(float(y[0]), float(base[0])))
        else:
            val = float(metric(y, base))
        return val * val

    eye = np.eye(m)

    def hess_at(h: float) -> np.ndarray:
        H = np.empty((m, m))
        f0 = sq(base)
        for i in range(m):
            fp = sq(base + h * eye[i])
            fm = sq(base - h * eye[i])
            H[i, i] = (fp - 2.0 * f0 + fm) / (h * h)
        for i in range(m):
            for j in range(i + 1, m):
                fpp = sq(base + h * eye[i] + h * eye[j])
                fpm = sq(base + h * eye[i] - h * eye[j])
                fmp = sq(base - h * eye[i] + h * eye[j])
                fmm = sq(base - h * eye[i] - h * eye[j])
                H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h * h)
        return H

    Hh = hess_at(step)
    Hh2 = hess_at(step / 2.0)
    if not (np.all(np.isfinite(Hh)) and np.all(np.isfinite(Hh2))):
        raise ValueError(
            f"non-finite second differences of d^2 around {base} with step {step}"
        )
    H = (4.0 * Hh2 - Hh) / 3.0
    err = float(np.max(np.abs(Hh2 - Hh)) / 3.0)
    matrix = 0.25 * (H + H.T)  # symmetrize, then halve
    return BilinearForm(matrix=matrix, base_point=base, step=step, richardson_error=err)


Verdict = Literal["positive_definite", "degenerate"]


def nondegeneracy_check(form: BilinearForm, tol: float = 1e-8) -> Verdict:
    """positive_definite iff the smallest eigenvalue exceeds tol."""
    smallest = float(np.linalg.eigvalsh(form.matrix)[0])
    return "positive_definite" if smallest > tol else "degenerate"


# ---------------------------------------------------------------------
# second-order limit along a path
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class SecondOrderLimit:
    """Convergence table of d^2(path(t), path(0)) / t^2 down a t ladder."""

    t_values: np.ndarray
    ratios: np.ndarray
    limit: float
    converged: bool


def second_order_limit(metric, path, t_ladder) -> SecondOrderLimit:
    """Estimate lim_{t->0} d^2(path(t), path(0)) / t^2.

    The ladder must be positive and is sorted decreasing. Non-convergence
    (ratios that keep drifting, e.g. when d^2 scales like |t| instead of
    t^2) is flagged rather than extrapolated.
    """
    t = np.asarray(sorted(t_ladder, reverse=True), dtype=float)
    if t.size < 2 or np.any(t <= 0):
        raise ValueError("t ladder must hold at least two positive values")
    base = path(0.0)
    ratios = np.array(
        [float(metric(path(tk), base)) ** 2 / (tk * tk) for tk in t]
    )
    diffs = np.abs(np.diff(ratios))
    scale = max(abs(ratios[-1]), 1e-300)
    if diffs.size >= 2:
        shrinking = diffs[-1] <= 0.75 * diffs[-2] + 1e-12 * scale
    else:
        shrinking = True
    settled = diffs[-1] <= 0.05 * scale
    converged = bool(shrinking and settled)
    limit = float(ratios[-1])
    if converged and ratios.size >= 3:
        d1 = ratios[-1] - ratios[-2]
        d2 = d1 - (ratios[-2] - ratios[-3])
        if abs(d2) > 1e-14 * scale:
            limit = float(ratios[-1] - d1 * d1 / d2)
    return SecondOrderLimit(t_values=t, ratios=ratios, limit=limit, converged=converged)


# ---------------------------------------------------------------------
# assumption audits
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class AssumptionAudit:
    """Empirical constants of the convergence assumptions on a grid.

    K_hat bounds (d_g^2 - d^2) / d_g^4 over audited pairs; kappa_hat bounds
    the fourth derivative of t -> d^2(x, exp_x(t v)) and relates to K_hat
    through K = kappa / 24. max_violation is the worst residual
    (d_g^2 - d^2) - K_hat d_g^4 (0 at the pair attaining the max);
    d_minus_dg_max is the worst gap of the ordering d <= d_g, whose failure
    signals that d cannot agree with arc length to first order.
    """

    K_hat: float | None
    eps0: float
    kappa_hat: float | None
    max_violation: float | None
    degenerate: bool
    d_minus_dg_max: float | None = None


def assumption2_audit(metric, d_g, x_grid, eps0: float) -> AssumptionAudit:
    """Scan grid pairs with 0 < d_g < eps0 for the fourth-order bound constant.

    K_hat = max over pairs of (d_g^2 - d^2) / d_g^4, clamped below at 0.
    Raises if the grid holds no pair below the separation cap.
    """
    pts = np.asarray(x_grid, dtype=float)
    D = _pairwise(metric, pts)
    Dg = _pairwise(d_g, pts)
    mask = (Dg > 0) & (Dg < eps0) & np.isfinite(Dg)
    if not mask.any():
        raise ValueError(f"no grid pairs with 0 < d_g < {eps0}")
    d = D[mask]
    dg = Dg[mask]
    ratios = (dg**2 - d**2) / dg**4
    K_hat = max(float(ratios.max()), 0.0)
    max_violation = float(((dg**2 - d**2) - K_hat * dg**4).max())
    return AssumptionAudit(
        K_hat=K_hat,
        eps0=float(eps0),
        kappa_hat=None,
        max_violation=max_violation,
        degenerate=False,
        d_minus_dg_max=float((d - dg).max()),
    )


def circle_exp(x, v, t):
    """Arc-length exponential map on the unit circle chart."""
    return x + t * v


def fourth_derivative_bound(
    metric,
    d_g,
    x_grid,
    v_grid,
    t_span,
    exp_map: Callable = circle_exp,
    step: float = 0.05,
    num_t: int = 21,
) -> float:
    """Max |h''''| of h(t) = d^2(x, exp_x(t v)) by 5-point central differences.

    exp_map(x, v, t) must follow unit-speed geodesics of the audited
    geometry; this is probed once against d_g. The t stencil must stay
    inside t_span, and any stencil leaving the chart domain surfaces as an
    error from exp_map.
    """
    lo, hi = float(t_span[0]), float(t_span[1])
    if hi - lo <= 4 * step:
        raise ValueError("t span too narrow for the 5-point stencil")
    ts = np.linspace(lo + 2 * step, hi - 2 * step, num_t)
    xs = list(np.atleast_1d(np.asarray(x_grid, dtype=float))) if np.ndim(x_grid) <= 1 else list(np.asarray(x_grid, dtype=float))
    vs = list(np.atleast_1d(np.asarray(v_grid, dtype=float))) if np.ndim(v_grid) <= 1 else list(np.asarray(v_grid, dtype=float))

    probe_t = max(abs(ts[0]), abs(ts[-1]), step)
    probe = float(d_g(exp_map(xs[0], vs[0], probe_t), xs[0]))
    if not math.isclose(probe, probe_t, rel_tol=1e-2):
        raise ValueError(
            f"exp_map is not unit speed: d_g at t={probe_t} is {probe}"
        )

    kappa = 0.0
    offsets = (-2.0, -1.0, 0.0, 1.0, 2.0)
    weights = (1.0, -4.0, 6.0, -4.0, 1.0)
    for x in xs:
        for v in vs:
            for t0 in ts:
                acc = 0.0
                for o, w in zip(offsets, weights):
                    y = exp_map(x, v, t0 + o * step)
                    acc += w * float(metric(y, x)) ** 2
                d4 = acc / step**4
                if not math.isfinite(d4):
                    raise ValueError(
                        f"non-finite fourth difference at x={x}, v={v}, t={t0}"
                    )
                kappa = max(kappa, abs(d4))
    return kappa


# ---------------------------------------------------------------------
# kernel integrals on the circle and bias bounds
# ---------------------------------------------------------------------

def quadrature_A_G(metric, f, x, eps: float, num_nodes: int = 2**14):
    """Kernel integrals on the unit circle by periodic midpoint quadrature.

    Returns (A_eps, G_eps_f) with
        A_eps   = (2 pi eps)^{-1/2} * int_0^{2pi} exp(-d(x,y)^2/(2 eps)) dy
        G_eps_f = (2 pi eps)^{-1/2} * int_0^{2pi} exp(-d(x,y)^2/(2 eps)) f(y) dy
    so that 2/eps * (f(x) A_eps - G_eps_f) approaches the positive
    Laplacian of f at x as eps -> 0.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if num_nodes < 2**14:
        raise ValueError("composite rule needs at least 2^14 nodes")
    y = TWO_PI * (np.arange(num_nodes) + 0.5) / num_nodes
    w = TWO_PI / num_nodes
    d = np.asarray(metric(x, y), dtype=float)
    k = np.exp(-(d * d) / (2.0 * eps))
    norm = math.sqrt(TWO_PI * eps)
    A = float(np.sum(k) * w / norm)
    G = float(np.sum(k * f(y)) * w / norm)
    return A, G


def beta_separation(metric, d_g, x, R: float, num_grid: int = 2**15) -> float:
    """Infimum of d(y, x) over the geodesic far set {y : d_g(y, x) >= R}.

    Grid minimum over the circle refined by locating the d_g = R boundary
    (root finding) and polishing around the argmin. Strictly positive for a
    topological embedding.
    """
    if not (0.0 < R <= np.pi):
        raise ValueError("R must lie in (0, pi]")
    y = x + TWO_PI * np.arange(num_grid) / num_grid
    q = np.asarray(d_g(y, x), dtype=float) - R
    feasible = q >= 0
    if not feasible.any():
        raise ValueError(f"no points at geodesic distance >= {R}")
    dvals = np.asarray(metric(y, x), dtype=float)
    masked = np.where(feasible, dvals, np.inf)
    i = int(np.argmin(masked))
    best = float(masked[i])

    # include the exact constraint boundary points
    sign_change = np.nonzero(np.diff(np.sign(q)) != 0)[0]
    for j in sign_change:
        yb = scipy.optimize.brentq(lambda t: float(d_g(t, x)) - R, y[j], y[j + 1])
        if float(d_g(yb, x)) >= R - 1e-12:
            best = min(best, float(metric(yb, x)))

    # polish around the grid argmin, penalizing the infeasible side
    span = TWO_PI / num_grid

    def objective(t):
        yy = y[i] + t
        if float(d_g(yy, x)) < R:
            return best + abs(t)
        return float(metric(yy, x))

    res = scipy.optimize.minimize_scalar(
        objective, bounds=(-span, span), method="bounded", options={"xatol": 1e-12}
    )
    return min(best, float(res.fun))


def sphere_area(m: int) -> float:
    """Surface area of the unit sphere S^{m-1} in R^m (2 for m = 1)."""
    return float(2.0 * np.pi ** (m / 2.0) / scipy.special.gamma(m / 2.0))


def gaussian_tail_integral(a: float, eps: float, m: int) -> float:
    """int_a^infty exp(-y^2/(2 eps)) y^(m+1) dy via the upper incomplete gamma."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    s = m / 2.0 + 1.0
    z = a * a / (2.0 * eps)
    return float(
        0.5 * (2.0 * eps) ** s * scipy.special.gammaincc(s, z) * scipy.special.gamma(s)
    )


@dataclass(frozen=True)
class BiasBoundReport:
    """Non-asymptotic bias bounds at one bandwidth.

    R1 bounds the contribution of the geodesic far set (controlled by the
    separation infimum beta); R3 bounds the Gaussian tail lost when the
    local integral is extended over the whole tangent space. The middle
    term's constant is existential, so only the residual attribution
    |quad_bias| - R1 - R3 is reported.
    """

    eps: float
    eps0: float
    r_x: float
    beta_val: float
    R1: float
    R3: float
    quad_bias: float | None = None
    r2_residual: float | None = None


def bias_bounds(
    x,
    eps: float,
    eps0: float,
    c: float,
    f_inf: float,
    lap_f_x: float,
    m: int,
    vol_tail,
    beta_val,
    inj_radius: float = np.pi,
    quad_bias: float | None = None,
) -> BiasBoundReport:
    """Evaluate the far-set and Gaussian-tail bias bounds.

    r(x) = min(eps0, c * inj_radius). vol_tail and beta_val may be numbers
    or callables of r(x) (the volume of the geodesic far set and the
    separation infimum at radius r(x)). The tail factor of R3 is the closed
    form of gaussian_tail_integral; |lap_f_x| keeps R3 nonnegative.
    """
    if not (0.0 < c < 1.0):
        raise ValueError("c must lie in (0, 1)")
    if eps <= 0 or eps0 <= 0:
        raise ValueError("bandwidths must be positive")
    r_x = min(eps0, c * inj_radius)
    beta = float(beta_val(r_x)) if callable(beta_val) else float(beta_val)
    vol = float(vol_tail(r_x)) if callable(vol_tail) else float(vol_tail)
    norm = (TWO_PI * eps) ** (m / 2.0)
    R1 = 2.0 * vol * math.exp(-beta * beta / (2.0 * eps)) * f_inf / norm
    R3 = sphere_area(m) * abs(lap_f_x) / (2.0 * m) * gaussian_tail_integral(r_x, eps, m) / norm
    r2 = None if quad_bias is None else abs(quad_bias) - R1 - R3
    return BiasBoundReport(
        eps=float(eps),
        eps0=float(eps0),
        r_x=float(r_x),
        beta_val=beta,
        R1=float(R1),
        R3=float(R3),
        quad_bias=None if quad_bias is None else float(quad_bias),
        r2_residual=None if r2 is None else float(r2),
    )


# ---------------------------------------------------------------------
# weighted-l1 chart: speed, density, geodesics and limiting operator
# ---------------------------------------------------------------------

def weighted_l1_speed(w1: float, w2: float, theta):
    """Chart speed w1 |sin theta| + w2 |cos theta| of the weighted-l1 form."""
    t = canonical_angle(theta)
    return w1 * np.abs(np.sin(t)) + w2 * np.abs(np.cos(t))


def weighted_l1_speed_derivative(w1: float, w2: float, theta):
    """Quadrant-interior derivative of the chart speed."""
    t = canonical_angle(theta)
    return w1 * np.sign(np.sin(t)) * np.cos(t) - w2 * np.sign(np.cos(t)) * np.sin(t)


def weighted_l1_density(w1: float, w2: float, theta):
    """Density 1 / (2 pi (w1|sin| + w2|cos|)) of uniform circle samples
    relative to the weighted-l1 volume element."""
    return 1.0 / (TWO_PI * weighted_l1_speed(w1, w2, theta))


def weighted_l1_density_derivative(w1: float, w2: float, theta):
    S = weighted_l1_speed(w1, w2, theta)
    return -weighted_l1_speed_derivative(w1, w2, theta) / (TWO_PI * S * S)


def _wl1_arclength(w1: float, w2: float, theta):
    """Quadrant-wise antiderivative of the chart speed (signed length)."""
    t = canonical_angle(theta)
    sgn_sin = np.where(np.sin(t) >= 0, 1.0, -1.0)
    sgn_cos = np.where(np.cos(t) >= 0, 1.0, -1.0)
    return -w1 * sgn_sin * np.cos(t) + w2 * sgn_cos * np.sin(t)


def _wl1_quadrant(theta):
    return np.minimum(np.floor(canonical_angle(theta) / (0.5 * np.pi)), 3.0)


def weighted_l1_geodesic(w1: float, w2: float) -> MetricOracle:
    """Geodesic distance of the induced weighted-l1 form.

    Finite only within one quadrant of the circle chart (the chart loses
    smoothness at quadrant boundaries, which disconnect the chart domain);
    cross-quadrant distances are inf.
    """

    def fn(t, p):
        same = _wl1_quadrant(t) == _wl1_quadrant(p)
        gap = np.abs(_wl1_arclength(w1, w2, t) - _wl1_arclength(w1, w2, p))
        return np.where(same, gap, np.inf)

    return MetricOracle(
        "weighted-l1-geodesic",
        fn,
        params={"w1": w1, "w2": w2},
        domain_note="finite within a single quadrant of the circle chart",
    )


def weighted_l1_exp(w1: float, w2: float) -> Callable:
    """Unit-speed exponential map of the weighted-l1 form within a quadrant.

    Returns exp(x, v, t) solving arclength(theta) = arclength(x) + t*v by
    bracketed root finding; raises when the target leaves the quadrant.
    """

    def expmap(x: float, v: float, t: float) -> float:
        th = float(canonical_angle(x))
        quad = int(_wl1_quadrant(th))
        qlo = quad * 0.5 * np.pi
        qhi = (quad + 1) * 0.5 * np.pi
        pad = 1e-12
        target = float(_wl1_arclength(w1, w2, th)) + t * v
        lo_val = float(_wl1_arclength(w1, w2, qlo + pad))
        hi_val = float(_wl1_arclength(w1, w2, qhi - pad))
        if not (lo_val <= target <= hi_val):
            raise ValueError(
                f"geodesic from {th} with parameter {t * v} leaves the quadrant"
            )
        return float(
            scipy.optimize.brentq(
                lambda u: float(_wl1_arclength(w1, w2, u)) - target,
                qlo + pad,
                qhi - pad,
                xtol=1e-14,
            )
        )

    return expmap


@dataclass(frozen=True)
class WeightedL1Limit:
    """Both closed forms of the weighted-l1 limiting operator at one angle."""

    intrinsic: float
    extrinsic: float
    ratio: float | None


def limiting_operator_weighted_l1(
    w1: float,
    w2: float,
    theta: float,
    f,
    df,
    d2f,
    margin: float = 1e-3,
) -> WeightedL1Limit:
    """Evaluate the limiting operator of weighted-l1 graph Laplacians.

    The intrinsic form is -(2 pi)^2 (P^3 f'' + 3 P^2 P' f') with
    P = 1/(2 pi (w1|sin| + w2|cos|)); the extrinsic form is
        sign(cos sin) (-w1|cos| + w2|sin|) / S^4 * f' + f'' / (3 S^3).
    The two are proportional with a theta-independent ratio, which is
    returned (None where the extrinsic form vanishes). Angles within
    margin of a quadrant boundary are rejected.
    """
    th = float(canonical_angle(theta))
    if min(circle_separation(th, e) for e in WEIGHTED_L1_EXCLUDED) < margin:
        raise ValueError(f"angle {theta} is within {margin} of a quadrant boundary")
    S = float(weighted_l1_speed(w1, w2, th))
    Sp = float(weighted_l1_speed_derivative(w1, w2, th))
    P = 1.0 / (TWO_PI * S)
    Pp = -Sp / (TWO_PI * S * S)
    fp = float(df(th))
    fpp = float(d2f(th))
    intrinsic = -(TWO_PI**2) * (P**3 * fpp + 3.0 * P * P * Pp * fp)
    first_coef = (
        np.sign(np.cos(th) * np.sin(th))
        * (-w1 * abs(np.cos(th)) + w2 * abs(np.sin(th)))
        / S**4
    )
    extrinsic = float(first_coef * fp + fpp / (3.0 * S**3))
    ratio = intrinsic / extrinsic if abs(extrinsic) > 1e-300 else None
    return WeightedL1Limit(intrinsic=float(intrinsic), extrinsic=extrinsic, ratio=ratio)


# ---------------------------------------------------------------------
# radial trace integral
# ---------------------------------------------------------------------

def trace_integral(A, h, r: float, m: int) -> float:
    """int_{B_r(0)} h(|v|) v^T A v dv as a 1-D radial quadrature.

    Equals area(S^{m-1}) Tr(A) / m * int_0^r h(s) s^(m+1) ds for symmetric A.
    """
    mat = np.asarray(A, dtype=float)
    if mat.shape != (m, m):
        raise ValueError(f"A must be {m} x {m}")
    if not np.allclose(mat, mat.T, rtol=1e-12, atol=1e-12):
        raise ValueError("A must be symmetric")
    radial, _ = scipy.integrate.quad(lambda s: h(s) * s ** (m + 1), 0.0, r)
    return float(sphere_area(m) * np.trace(mat) / m * radial)
