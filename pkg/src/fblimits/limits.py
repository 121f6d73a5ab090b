"""Asymptotic extremes of codebook selection under linear feedback scaling.

With feedback depth R = r n over n dimensions, the smallest and largest
selected quadratic forms converge almost surely:

    c_min -> x_r_minus / beta,      c_max -> x_r_plus / beta,

where x_r_minus in (lambda_t_minus, 1) and x_r_plus in (1, lambda_plus) are
the unique levels at which the t = 0 rate equals r log 2.  Both admit
explicit formulas: a fixed-point branch x e^(1 - x) = 2^(-beta r) when the
optimal tilt is interior, and an explicit edge branch once r crosses the
threshold where the tilt saturates at an interval endpoint.
"""

from __future__ import annotations

import dataclasses
import math

from scipy.optimize import brentq

from .ratefn import ConsistencyError, RateContext, rate_zero
from .spectra import MpLaw, QuadratureConfig, mp_law

__all__ = [
    "AsymptoticResult",
    "thresholds",
    "solve_x_minus",
    "solve_x_plus",
    "solve_x_by_rate",
    "asymptotic_limits",
    "throughput",
]

_LN2 = math.log(2.0)


@dataclasses.dataclass(frozen=True)
class AsymptoticResult:
    """Limits for one (beta, r) pair; branch tags record the formula used."""

    beta: float
    r: float
    x_minus: float
    x_plus: float
    c_min_limit: float
    c_max_limit: float
    r_min: float | None
    r_max: float
    branch_minus: str
    branch_plus: str


def _check_beta_r(beta: float, r: float) -> None:
    if not (math.isfinite(beta) and beta > 0.0):
        raise ValueError(f"beta must be finite and positive, got {beta!r}")
    if not (math.isfinite(r) and r > 0.0):
        raise ValueError(f"r must be finite and positive, got {r!r}")


def thresholds(beta: float) -> tuple[float | None, float]:
    """Branch-switch rates (r_min, r_max).

    r_min exists only for beta < 1 (the lower tilt can saturate only when
    the continuous edge is positive); r_max exists for every beta.
    """
    if not (math.isfinite(beta) and beta > 0.0):
        raise ValueError(f"beta must be finite and positive, got {beta!r}")
    root = math.sqrt(beta)
    r_max = (root - math.log1p(root)) / (beta * _LN2)
    if beta < 1.0:
        r_min = (-math.log1p(-root) - root) / (beta * _LN2)
    else:
        r_min = None
    return r_min, r_max


def _fixed_point(beta: float, r: float, side: str) -> float:
    """Root of x e^(1 - x) = 2^(-beta r), solved in log space.

    g(u) = u + 1 - e^u + beta r log 2 with u = log x is strictly monotone on
    each side of u = 0, so the bracket never degenerates.
    """
    shift = beta * r * _LN2

    def g(u: float) -> float:
        return u + 1.0 - math.exp(u) + shift

    if side == "minus":
        lo = -shift - 1.0  # g(lo) = -exp(lo) <= 0 exactly
        hi = 0.0
    else:
        lo = 0.0
        hi = 2.0 * math.log1p(math.sqrt(beta))  # u at the upper support edge
    u = float(brentq(g, lo, hi, xtol=1e-14, rtol=8.9e-16))
    return math.exp(u)


def solve_x_minus(beta: float, r: float) -> tuple[float, str]:
    """Lower level x_r_minus and the branch ('explicit' or 'fixed_point')."""
    _check_beta_r(beta, r)
    r_min, _ = thresholds(beta)
    if r_min is not None and r > r_min:
        root = math.sqrt(beta)
        x = (1.0 - root) ** 2 + root * (1.0 - root) ** (1.0 - 1.0 / beta) * math.exp(
            -1.0 / root - r * _LN2
        )
        return x, "explicit"
    return _fixed_point(beta, r, "minus"), "fixed_point"


def solve_x_plus(beta: float, r: float) -> tuple[float, str]:
    """Upper level x_r_plus and the branch ('explicit' or 'fixed_point')."""
    _check_beta_r(beta, r)
    _, r_max = thresholds(beta)
    if r > r_max:
        root = math.sqrt(beta)
        x = (1.0 + root) ** 2 - root * (1.0 + root) ** (1.0 - 1.0 / beta) * math.exp(
            1.0 / root - r * _LN2
        )
        return x, "explicit"
    return _fixed_point(beta, r, "plus"), "fixed_point"


def solve_x_by_rate(
    beta: float,
    r: float,
    side: str,
    cfg: QuadratureConfig | None = None,
) -> float:
    """Invert rate_zero(x) = r log 2 directly, without the explicit formulas.

    Serves as the independent route against solve_x_minus / solve_x_plus.
    The root is found in a log-distance variable from the relevant support
    edge, which keeps the search accurate when x is within rounding of it.
    """
    _check_beta_r(beta, r)
    if side not in ("minus", "plus"):
        raise ValueError(f"side must be 'minus' or 'plus', got {side!r}")
    law = mp_law(beta)
    target = r * _LN2
    root = math.sqrt(beta)
    kwargs = {} if cfg is None else {"cfg": cfg}

    if side == "minus":
        edge = law.lambda_t_minus

        def value_at(w: float) -> float:
            return rate_zero(RateContext(law, edge + math.exp(w), **kwargs)).value - target

        # Guaranteed-sign left bracket: for beta >= 1 the interior rate obeys
        # rate(e^w) >= (-1 - w)/beta, for beta < 1 the lower edge branch is
        # exactly edge_log_moment - w once x <= 1 - sqrt(beta).
        if law.beta >= 1.0:
            w_lo = -2.0 - law.beta * target
        else:
            lam_log = (
                0.5 * math.log(law.beta)
                + (1.0 - 1.0 / law.beta) * math.log1p(-root)
                - 1.0 / root
            )
            w_lo = min(math.log(root * (1.0 - root)), lam_log - target) - 1.0
    else:
        edge = law.lambda_plus

        def value_at(w: float) -> float:
            return rate_zero(RateContext(law, edge - math.exp(w), **kwargs)).value - target

        # Upper edge branch is edge_log_moment - w once x >= 1 + sqrt(beta).
        lam_log = (
            0.5 * math.log(law.beta)
            + (1.0 - 1.0 / law.beta) * math.log1p(root)
            + 1.0 / root
        )
        w_lo = min(math.log(root * (1.0 + root)), lam_log - target) - 1.0

    w_hi = math.log(abs(1.0 - edge)) - 1e-9  # just inside x = 1, where the rate is ~0
    if value_at(w_lo) <= 0.0 or value_at(w_hi) >= 0.0:
        raise ConsistencyError(
            f"rate equation bracket failed for beta={beta}, r={r}, side={side}"
        )
    w = float(brentq(value_at, w_lo, w_hi, xtol=1e-13, rtol=8.9e-16))
    x = edge + math.exp(w) if side == "minus" else edge - math.exp(w)
    return x


def asymptotic_limits(
    beta: float,
    r: float,
    cfg: QuadratureConfig | None = None,
    validate: bool = True,
) -> AsymptoticResult:
    """Solve both levels and scale them into performance limits.

    With validate=True (default) each level is substituted back into the
    rate at zero; residuals beyond 1e-8 raise ConsistencyError.
    """
    x_minus, branch_minus = solve_x_minus(beta, r)
    x_plus, branch_plus = solve_x_plus(beta, r)
    r_min, r_max = thresholds(beta)
    if validate:
        law = mp_law(beta)
        kwargs = {} if cfg is None else {"cfg": cfg}
        target = r * _LN2
        res_minus = rate_zero(RateContext(law, x_minus, **kwargs)).value - target
        res_plus = rate_zero(RateContext(law, x_plus, **kwargs)).value - target
        if abs(res_minus) > 1e-8 or abs(res_plus) > 1e-8:
            raise ConsistencyError(
                f"defining-equation residuals too large at beta={beta}, r={r}: "
                f"minus {res_minus:.3e}, plus {res_plus:.3e}"
            )
    return AsymptoticResult(
        beta=beta,
        r=r,
        x_minus=x_minus,
        x_plus=x_plus,
        c_min_limit=x_minus / beta,
        c_max_limit=x_plus / beta,
        r_min=r_min,
        r_max=r_max,
        branch_minus=branch_minus,
        branch_plus=branch_plus,
    )


def throughput(c: float, sigma2: float, mode: str) -> float:
    """Single-user throughput in nats for a selected quadratic form c.

    mode 'cdma_min': log(1 + 1/(sigma2 + c)), interference energy c.
    mode 'mimo_max': log(1 + c/sigma2), beamforming gain c.
    """
    if not (math.isfinite(c) and c >= 0.0):
        raise ValueError(f"c must be finite and >= 0, got {c!r}")
    if not (math.isfinite(sigma2) and sigma2 > 0.0):
        raise ValueError(f"sigma2 must be finite and positive, got {sigma2!r}")
    if mode == "cdma_min":
        return math.log1p(1.0 / (sigma2 + c))
    if mode == "mimo_max":
        return math.log1p(c / sigma2)
    raise ValueError(f"mode must be 'cdma_min' or 'mimo_max', got {mode!r}")
