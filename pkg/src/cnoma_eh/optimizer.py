"""Per-realization weighted sum rate maximization over (alpha, rho).

At the optimum the weak user's rate is limited by U2's combiner, not by U1's
decode step (otherwise lowering rho would raise both rates).  The problem is
therefore equivalent to maximizing

    f(alpha, rho) = (1 + sinr_x1) * (1 + sinr_mrc)^wr,      wr = w2/w1,

subject to sinr_x2_at_u1 >= sinr_mrc_at_u2, whose boundary in rho is the
smaller root rho_tilde(alpha) of a quadratic a*rho^2 - b*rho + c (the
constraint holds exactly on [0, rho_tilde]).  For fixed alpha,

    f_alpha(rho) = (d - e*rho) / (t - rho) * (p + q*rho)^wr

with d = 1 + mu + alpha*snr*g1, e = 1 + alpha*snr*g1, t = 1 + mu,
p = 1 + (1-alpha)*snr*g2 / (alpha*snr*g2 + 1 + mu), q = eta*snr*g1*g3/(1+mu).
The sign of d f_alpha / d rho on [0, 1) is the sign of the quadratic

    N(rho) = (d - e*t)*(p + q*rho) + q*wr*(t - rho)*(d - e*rho)
           = (q*wr*e)*rho^2 - 2*beta*rho + [(d - e*t)*p + q*wr*t*d],

    beta = 0.5*q*d*(wr - 1) + 0.5*q*e*t*(wr + 1),

an upward parabola whose larger root is >= t >= 1, so only the smaller root
rho_bar = (beta - sqrt(theta)) / (q*wr*e), theta = beta^2 - leading*constant,
matters on [0, 1).  Case split per candidate alpha:

* theta > 0 and rho_bar in (0, rho_tilde):  interior maximum at rho_bar;
* theta > 0 and rho_bar <= 0:               f_alpha decreasing, rho* = 0;
* otherwise:                                f_alpha nondecreasing on the
                                            feasible set, rho* = rho_tilde;
* q == 0 (dead relay link):                 N = (d - e*t)*p <= 0, f_alpha is
                                            nonincreasing, rho* = 0.  The
                                            "otherwise" rule above would pick
                                            the boundary here, which is wrong.

The 1D search evaluates f(alpha, rho*(alpha)) on a uniform alpha grid and
sharpens the incumbent with a golden-section pass on the bracketing interval.
``solve_2d_exhaustive`` is the independent benchmark: a plain grid argmax of
the raw weighted sum (with the min{} in the weak user's rate), kept free of
the reformulation on purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DivisionDegenerate,
    DomainError,
    InfeasibleChannel,
    NumericalFailure,
)
from .model import (
    ChannelRealization,
    DesignPoint,
    RateTriple,
    SystemParams,
    _rate_tuple,
    rates,
    sinr_mrc_at_u2,
    sinr_x1_at_u1,
)

__all__ = [
    "SolverBranch",
    "InnerCoefficients",
    "BoundaryCoefficients",
    "AlphaGridSpec",
    "Grid2DSpec",
    "OptimizationOutcome",
    "boundary_coeffs",
    "rho_tilde",
    "inner_coeffs",
    "f_objective",
    "df_drho_numerator",
    "theta_beta",
    "rho_bar",
    "optimal_rho_for_alpha",
    "solve_1d",
    "solve_2d_exhaustive",
]

# Largest rho the solver will ever return; keeps boundary solutions inside the
# open constraint rho < 1 when the feasibility constraint never binds.
_RHO_CAP = 1.0 - 1e-9

# Discriminants this far below zero (relative to scale^2) are roundoff near a
# tangency and are clamped; anything worse is a genuine numerical failure.
_DISC_GUARD = 1e-8

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class SolverBranch(Enum):
    INTERIOR = "interior"  # rho* at the stationary point rho_bar
    LOWER = "lower"        # rho* = 0
    BOUNDARY = "boundary"  # rho* at the feasibility boundary rho_tilde
    TRIVIAL = "trivial"    # w2 <= w1: all power to U1, no splitting
    GRID = "grid"          # exhaustive 2D search result


@dataclass(frozen=True)
class InnerCoefficients:
    """Coefficients of the fixed-alpha objective f_alpha(rho)."""

    d: float
    e: float
    t: float
    p: float
    q: float


@dataclass(frozen=True)
class BoundaryCoefficients:
    """Coefficients of the feasibility quadratic a*rho^2 - b*rho + c >= 0."""

    a: float
    b: float
    c: float


@dataclass(frozen=True)
class AlphaGridSpec:
    """Grid for the 1D search: n points on (margin, 1 - margin), optionally
    refined by golden-section search to refine_tol in alpha."""

    n: int = 1000
    margin: float = 1e-4
    refine: bool = True
    refine_tol: float = 1e-6

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("alpha grid needs at least 2 points")
        if not 0 < self.margin < 0.5:
            raise DomainError("alpha margin must be in (0, 0.5)")
        if not self.refine_tol > 0:
            raise DomainError("refine_tol must be > 0")


@dataclass(frozen=True)
class Grid2DSpec:
    """Exhaustive-search grid over (alpha, rho)."""

    n_alpha: int = 300
    n_rho: int = 300
    alpha_margin: float = 1e-4
    rho_max: float = 1.0 - 1e-6

    def __post_init__(self):
        if self.n_alpha < 2 or self.n_rho < 2:
            raise DomainError("2D grid needs at least 2 points per axis")
        if not 0 <= self.rho_max < 1:
            raise DomainError("rho_max must be in [0, 1)")


@dataclass(frozen=True)
class OptimizationOutcome:
    alpha_star: float
    rho_star: float
    objective_f: float
    rate_triple: RateTriple
    branch: SolverBranch
    evaluations: int


def _require_ordered(ch: ChannelRealization):
    if not ch.g1 > ch.g2:
        raise InfeasibleChannel(f"requires g1 > g2, got g1={ch.g1}, g2={ch.g2}")


def _check_alpha(alpha: float):
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")


def inner_coeffs(p: SystemParams, ch: ChannelRealization, alpha: float) -> InnerCoefficients:
    """Coefficients d, e, t, p, q of f_alpha for this realization and alpha."""
    _check_alpha(alpha)
    ag = alpha * p.avg_snr * ch.g1
    e = 1.0 + ag
    return InnerCoefficients(
        d=e + p.mu,
        e=e,
        t=1.0 + p.mu,
        p=1.0 + (1.0 - alpha) * p.avg_snr * ch.g2 / (alpha * p.avg_snr * ch.g2 + 1.0 + p.mu),
        q=p.eta * p.avg_snr * ch.g1 * ch.g3 / (1.0 + p.mu),
    )


def boundary_coeffs(p: SystemParams, ch: ChannelRealization, alpha: float) -> BoundaryCoefficients:
    """Coefficients of the feasibility quadratic in rho (a > 0 when the relay
    link is alive; c > 0 whenever g1 > g2)."""
    _check_alpha(alpha)
    ic = inner_coeffs(p, ch, alpha)
    direct = ic.p - 1.0
    return BoundaryCoefficients(
        a=ic.q * ic.e,
        b=ic.q * ic.d - direct * ic.e + (1.0 - alpha) * p.avg_snr * ch.g1,
        c=(1.0 - alpha) * p.avg_snr * ch.g1 - direct * ic.d,
    )


def rho_tilde(p: SystemParams, ch: ChannelRealization, alpha: float) -> float:
    """Largest power-splitting fraction for which U1 still decodes x2 at least
    as well as U2's combiner.

    Returns the smaller root of the feasibility quadratic, computed in the
    cancellation-free form 2c / (b + sqrt(b^2 - 4ac)).  Returns exactly 1.0
    when the constraint never binds on [0, 1) (possible only with mu == 0 and
    a weak relay link); then there is no SINR crossing below 1.
    """
    _require_ordered(ch)
    bc = boundary_coeffs(p, ch, alpha)
    disc = bc.b * bc.b - 4.0 * bc.a * bc.c
    scale = max(abs(bc.a), abs(bc.b), abs(bc.c))
    if disc < 0.0:
        if disc < -_DISC_GUARD * scale * scale:
            raise NumericalFailure(
                f"feasibility discriminant {disc} below roundoff guard"
            )
        disc = 0.0
    root = 2.0 * bc.c / (bc.b + math.sqrt(disc))
    return min(root, 1.0)


def f_objective(p: SystemParams, ch: ChannelRealization, d: DesignPoint) -> float:
    """(1 + sinr_x1) * (1 + sinr_mrc)^(w2/w1); its scaled log is the weighted
    sum rate with the weak user's rate taken at the combiner."""
    return (1.0 + sinr_x1_at_u1(p, ch, d)) * (1.0 + sinr_mrc_at_u2(p, ch, d)) ** p.wtilde2


def df_drho_numerator(ic: InnerCoefficients, wtilde2: float, rho: float) -> float:
    """Numerator of d f_alpha / d rho; shares its sign with the derivative on
    rho in [0, 1) since the denominator (p + q rho)^(1-wr) (t - rho)^2 > 0."""
    if not 0 <= rho < 1:
        raise DomainError(f"rho must be in [0, 1), got {rho}")
    return (ic.d - ic.e * ic.t) * (ic.p + ic.q * rho) + ic.q * wtilde2 * (
        ic.t - rho
    ) * (ic.d - ic.e * rho)


def theta_beta(ic: InnerCoefficients, wtilde2: float):
    """(theta, beta) of the stationary-point quadratic
    (q wr e) rho^2 - 2 beta rho + [(d - e t) p + q wr t d]; its discriminant
    is 4 theta."""
    beta = 0.5 * ic.q * ic.d * (wtilde2 - 1.0) + 0.5 * ic.q * ic.e * ic.t * (wtilde2 + 1.0)
    constant = (ic.d - ic.e * ic.t) * ic.p + ic.q * wtilde2 * ic.t * ic.d
    theta = beta * beta - ic.q * wtilde2 * ic.e * constant
    return theta, beta


def rho_bar(ic: InnerCoefficients, wtilde2: float) -> float:
    """Smaller root of the stationary-point quadratic: the interior maximizer
    of f_alpha when it falls in (0, 1).  May lie outside (0, 1); callers
    check theta > 0 first."""
    lead = ic.q * wtilde2 * ic.e
    if lead == 0.0:
        raise DivisionDegenerate(
            "stationary-point quadratic degenerates when q * wtilde2 * e == 0"
        )
    theta, beta = theta_beta(ic, wtilde2)
    constant = (ic.d - ic.e * ic.t) * ic.p + ic.q * wtilde2 * ic.t * ic.d
    if theta < 0.0:
        guard = _DISC_GUARD * max(beta * beta, abs(lead * constant))
        if theta < -guard:
            raise NumericalFailure(f"theta {theta} below roundoff guard")
        theta = 0.0
    root = math.sqrt(theta)
    if beta > 0.0:
        return constant / (beta + root)
    return (beta - root) / lead


def optimal_rho_for_alpha(p: SystemParams, ch: ChannelRealization, alpha: float):
    """Best feasible rho for this alpha, with the case actually taken.

    Returns ``(rho_star, branch)``; see the module docstring for the split.
    """
    _require_ordered(ch)
    ic = inner_coeffs(p, ch, alpha)
    if ic.q == 0.0:
        return 0.0, SolverBranch.LOWER
    rt = rho_tilde(p, ch, alpha)
    theta, _ = theta_beta(ic, p.wtilde2)
    if theta > 0.0:
        rb = rho_bar(ic, p.wtilde2)
        if 0.0 < rb < rt:
            return rb, SolverBranch.INTERIOR
        if rb <= 0.0:
            return 0.0, SolverBranch.LOWER
    return min(rt, _RHO_CAP), SolverBranch.BOUNDARY


def _log_f(ic: InnerCoefficients, wtilde2: float, rho: float) -> float:
    return (
        math.log(ic.d - ic.e * rho)
        - math.log(ic.t - rho)
        + wtilde2 * math.log(ic.p + ic.q * rho)
    )


def _g_scalar(p: SystemParams, ch: ChannelRealization, alpha: float) -> float:
    """log f(alpha, rho*(alpha)); the profile the 1D search maximizes."""
    rho, _ = optimal_rho_for_alpha(p, ch, alpha)
    return _log_f(inner_coeffs(p, ch, alpha), p.wtilde2, rho)


def _grid_stage(p: SystemParams, ch: ChannelRealization, alphas: np.ndarray) -> np.ndarray:
    """Vectorized log f(alpha, rho*(alpha)) over an alpha grid; mirrors
    optimal_rho_for_alpha (equivalence is pinned by tests)."""
    snr, mu, eta, wr = p.avg_snr, p.mu, p.eta, p.wtilde2
    ag = alphas * (snr * ch.g1)
    e = 1.0 + ag
    d = e + mu
    t = 1.0 + mu
    pp = 1.0 + (1.0 - alphas) * snr * ch.g2 / (alphas * snr * ch.g2 + 1.0 + mu)
    q = eta * snr * ch.g1 * ch.g3 / (1.0 + mu)

    if q == 0.0:
        rho = np.zeros_like(alphas)
    else:
        a = q * e
        b = q * d - (pp - 1.0) * e + (1.0 - alphas) * snr * ch.g1
        c = (1.0 - alphas) * snr * ch.g1 - (pp - 1.0) * d
        disc = b * b - 4.0 * a * c
        scale = np.maximum(np.abs(a), np.maximum(np.abs(b), np.abs(c)))
        if np.any(disc < -_DISC_GUARD * scale * scale):
            raise NumericalFailure("feasibility discriminant below roundoff guard")
        rt = np.minimum(2.0 * c / (b + np.sqrt(np.maximum(disc, 0.0))), 1.0)

        beta = 0.5 * q * d * (wr - 1.0) + 0.5 * q * e * t * (wr + 1.0)
        constant = (d - e * t) * pp + q * wr * t * d
        lead = q * wr * e
        theta = beta * beta - lead * constant
        th_scale = np.maximum(beta * beta, np.abs(lead * constant))
        if np.any(theta < -_DISC_GUARD * th_scale):
            raise NumericalFailure("stationary-point discriminant below roundoff guard")
        root = np.sqrt(np.maximum(theta, 0.0))
        rb = np.where(beta > 0.0, constant / (beta + root), (beta - root) / lead)
        interior = (theta > 0.0) & (rb > 0.0) & (rb < rt)
        lower = (theta > 0.0) & (rb <= 0.0)
        rho = np.where(interior, rb, np.where(lower, 0.0, np.minimum(rt, _RHO_CAP)))

    return np.log(d - e * rho) - np.log(t - rho) + wr * np.log(pp + q * rho)


def _golden_max(g, lo: float, hi: float, tol: float):
    """Golden-section maximization of g on [lo, hi]; ties keep the left probe
    so results are deterministic.  Returns (x_best, g_best, evaluations)."""
    a, b = lo, hi
    if b - a <= tol:
        mid = 0.5 * (a + b)
        return mid, g(mid), 1
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = g(c), g(d)
    evals = 2
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = g(d)
        evals += 1
    if fc >= fd:
        return c, fc, evals
    return d, fd, evals


def solve_1d(p: SystemParams, ch: ChannelRealization,
             grid: AlphaGridSpec | None = None) -> OptimizationOutcome:
    """Weighted-sum-rate maximization by 1D search over alpha.

    For w2 <= w1 the optimum is the no-cooperation corner (all source power
    on x1, no splitting); alpha sits at 1 - margin since the constraint set
    is open at 1 and the supremum is only approached.  Otherwise evaluates
    f(alpha, rho*(alpha)) on the grid and refines the incumbent bracket by
    golden section.
    """
    grid = grid or AlphaGridSpec()
    if p.w2 <= p.w1:
        d = DesignPoint(alpha=1.0 - grid.margin, rho=0.0)
        return OptimizationOutcome(
            alpha_star=d.alpha,
            rho_star=0.0,
            objective_f=f_objective(p, ch, d),
            rate_triple=rates(p, ch, d),
            branch=SolverBranch.TRIVIAL,
            evaluations=1,
        )
    _require_ordered(ch)

    alphas = np.linspace(grid.margin, 1.0 - grid.margin, grid.n)
    logf = _grid_stage(p, ch, alphas)
    i = int(np.argmax(logf))  # first hit: smallest alpha wins ties
    best_alpha = float(alphas[i])
    best_logf = float(logf[i])
    evaluations = grid.n

    if grid.refine:
        lo = float(alphas[max(i - 1, 0)])
        hi = float(alphas[min(i + 1, grid.n - 1)])
        a_ref, f_ref, n_ref = _golden_max(
            lambda a: _g_scalar(p, ch, a), lo, hi, grid.refine_tol
        )
        evaluations += n_ref
        if f_ref > best_logf:
            best_alpha, best_logf = a_ref, f_ref

    rho_star, branch = optimal_rho_for_alpha(p, ch, best_alpha)
    evaluations += 1
    d = DesignPoint(alpha=best_alpha, rho=rho_star)
    return OptimizationOutcome(
        alpha_star=best_alpha,
        rho_star=rho_star,
        objective_f=f_objective(p, ch, d),
        rate_triple=rates(p, ch, d),
        branch=branch,
        evaluations=evaluations,
    )


def solve_2d_exhaustive(p: SystemParams, ch: ChannelRealization,
                        grid: Grid2DSpec | None = None) -> OptimizationOutcome:
    """Grid argmax of the raw weighted sum rate over the (alpha, rho) box.

    Deliberately independent of the solver: evaluates w1*C1 + w2*C2 with the
    min{} inside C2 and no constraint reformulation.  Ties break toward the
    smallest alpha, then the smallest rho.
    """
    grid = grid or Grid2DSpec()
    alphas = np.linspace(grid.alpha_margin, 1.0 - grid.alpha_margin, grid.n_alpha)
    rhos = np.linspace(0.0, grid.rho_max, grid.n_rho)
    c1, c2, ws = _rate_tuple(
        p.avg_snr, p.mu, p.eta, ch.g1, ch.g2, ch.g3,
        alphas[:, None], rhos[None, :], p.w1, p.w2,
    )
    flat = int(np.argmax(ws))  # C order: first max is smallest alpha, then rho
    i, j = divmod(flat, grid.n_rho)
    d = DesignPoint(alpha=float(alphas[i]), rho=float(rhos[j]))
    return OptimizationOutcome(
        alpha_star=d.alpha,
        rho_star=d.rho,
        objective_f=f_objective(p, ch, d),
        rate_triple=RateTriple(
            c1=float(c1[i, j]), c2=float(c2[i, j]), weighted_sum=float(ws[i, j])
        ),
        branch=SolverBranch.GRID,
        evaluations=grid.n_alpha * grid.n_rho,
    )
