"""Finite-size Monte Carlo machinery for codebook selection.

Three routes to the selected quadratic form are kept deliberately separate
so they can cross-check one another:

* direct simulation of v* A v over an explicit codebook,
* the spectral representation min_k sum(lam_i |z_i|^2) / sum(|z_i|^2) with
  i.i.d. complex Gaussian codewords, driven by exponential weights,
* the conditional-CDF route, which integrates (1 - mu(x))^K and scales,
  reaching feedback depths where enumeration is impossible.

The conditional CDF itself is estimated by exponentially tilted importance
sampling with exact likelihood ratios, which keeps log-probabilities
accurate far into the tails.

All randomness flows through counter-based substreams derived from
(seed, role, trial), so results are independent of execution order and of
the number of worker threads.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.optimize import brentq

from .spectra import sample_spectrum, mp_law

__all__ = [
    "Codebook",
    "SimConfig",
    "Estimate",
    "TiltedCdfResult",
    "BudgetError",
    "ReliabilityError",
    "DIRECT_BUDGET",
    "random_codebook",
    "min_chordal_distance",
    "design_codebook",
    "simulate_c_direct",
    "simulate_c_spectral",
    "simulate_c_cdf",
    "conditional_cdf_mc",
    "conditional_cdf_tilted",
    "ldp_rate_estimate",
    "c_rand_via_cdf",
    "quantile_x_n",
    "uniform_codebook_bound",
]

_LN2 = math.log(2.0)
_SEED_MASK = (1 << 64) - 1

DIRECT_BUDGET = 5_000_000_000  # max 2^R_fb * n * trials for enumeration paths


class BudgetError(RuntimeError):
    """Requested enumeration work exceeds the configured compute budget."""


class ReliabilityError(RuntimeError):
    """An importance-sampling estimate is too degenerate to report."""


def _rng(seed: int, *path: int) -> np.random.Generator:
    # Philox is counter-based, so disjoint (seed, path) tuples give
    # independent streams.  Exponential draws everywhere use method="inv"
    # (inverse CDF) to stay bit-stable across numpy's ziggurat revisions.
    ss = np.random.SeedSequence([int(seed) & _SEED_MASK, *path])
    return np.random.Generator(np.random.Philox(seed=ss))


def _child_seed(seed: int, *path: int) -> int:
    ss = np.random.SeedSequence([int(seed) & _SEED_MASK, *path])
    return int(ss.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# codebooks


@dataclasses.dataclass(frozen=True, eq=False)
class Codebook:
    """K unit-norm codewords in C^n, one per row of `vectors`.

    min_chordal is None for a single codeword.
    """

    n: int
    vectors: np.ndarray
    kind: str
    seed: int
    min_chordal: float | None

    @property
    def size(self) -> int:
        return self.vectors.shape[0]


def _unit_rows(z: np.ndarray) -> np.ndarray:
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _max_cross_gain(vectors: np.ndarray, block: int = 512) -> float:
    """Largest off-diagonal |<v_i, v_j>|^2, computed in row blocks."""
    k = vectors.shape[0]
    worst = 0.0
    conj_t = vectors.conj().T
    for start in range(0, k, block):
        stop = min(start + block, k)
        g = vectors[start:stop] @ conj_t
        p = np.abs(g) ** 2
        for i in range(start, stop):
            p[i - start, i] = 0.0
        worst = max(worst, float(p.max()))
    return worst


def _chordal_from_gain(gain: float) -> float:
    return math.sqrt(max(0.0, 1.0 - gain))


def random_codebook(n: int, size: int, seed: int) -> Codebook:
    """Isotropically random codebook: normalized i.i.d. CN(0,1) rows."""
    if n < 1 or size < 1:
        raise ValueError(f"need n >= 1 and size >= 1, got n={n}, size={size}")
    rng = _rng(seed, 0)
    z = rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))
    vectors = _unit_rows(z)
    chordal = _chordal_from_gain(_max_cross_gain(vectors)) if size >= 2 else None
    return Codebook(n=n, vectors=vectors, kind="random_isotropic", seed=int(seed), min_chordal=chordal)


def min_chordal_distance(codebook: Codebook) -> float:
    """Minimum pairwise chordal distance sqrt(1 - |<v_i, v_j>|^2)."""
    if codebook.size < 2:
        raise ValueError("min chordal distance needs at least two codewords")
    return _chordal_from_gain(_max_cross_gain(codebook.vectors))


def _design_descent(v0: np.ndarray, iterations: int) -> tuple[float, np.ndarray]:
    """Soft-min descent on the worst pairwise gain, rows kept unit norm.

    Returns the best true min-chordal seen along the path and its codebook;
    the starting point itself is included, so the result never regresses.
    """
    v = v0.copy()
    best_gain = _max_cross_gain(v)
    best_v = v.copy()
    steps = max(1, iterations)
    for it in range(steps):
        frac = it / max(1, steps - 1)
        # Anneal the soft-min sharpness over five decades; the final tau must
        # separate pairwise gains that differ by ~1e-5 or the descent stalls
        # before the worst pairs equalize.
        tau = 8.0 * (1e6 / 8.0) ** frac
        eta = 0.7 * (2e-4 / 0.7) ** frac
        g = v @ v.conj().T
        p = np.abs(g) ** 2
        np.fill_diagonal(p, 0.0)
        w = np.exp(tau * (p - p.max()))
        np.fill_diagonal(w, 0.0)
        total = w.sum()
        if total <= 0.0:
            break
        w /= total
        grad = (w * g) @ v
        scale = np.linalg.norm(grad, axis=1).max()
        if scale > 0.0:
            v = _unit_rows(v - (eta / scale) * grad)
        gain = _max_cross_gain(v)
        if gain < best_gain:
            best_gain = gain
            best_v = v.copy()
    return best_gain, best_v


def design_codebook(n: int, size: int, seed: int, iterations: int = 800) -> Codebook:
    """Grassmannian-style packing via soft-min gradient descent, 8 restarts.

    Deterministic in (seed, iterations).  Restart 0 starts from
    random_codebook(n, size, seed), so the designed codebook is never worse
    than that baseline; when size <= n one restart starts from an
    orthonormal frame, whose min chordal distance is already 1.
    """
    if n < 1 or size < 1:
        raise ValueError(f"need n >= 1 and size >= 1, got n={n}, size={size}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if size == 1:
        vectors = random_codebook(n, 1, seed).vectors
        return Codebook(n=n, vectors=vectors, kind="designed", seed=int(seed), min_chordal=None)

    inits = [random_codebook(n, size, seed).vectors]
    for j in range(1, 8):
        rng = _rng(seed, 30 + j)
        z = rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))
        inits.append(_unit_rows(z))
    if size <= n:
        rng = _rng(seed, 29)
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        q, _ = np.linalg.qr(z)
        inits[1] = q[:size].copy()

    best_gain = math.inf
    best_v = inits[0]
    for v0 in inits:
        gain, v = _design_descent(v0, iterations)
        if gain < best_gain:
            best_gain = gain
            best_v = v
    return Codebook(
        n=n,
        vectors=best_v,
        kind="designed",
        seed=int(seed),
        min_chordal=_chordal_from_gain(best_gain),
    )


# ---------------------------------------------------------------------------
# enumeration estimators


@dataclasses.dataclass(frozen=True)
class SimConfig:
    """One finite-size experiment: n x m channel, feedback depth r_fb bits."""

    n: int
    m: int
    r_fb: int
    trials: int
    seed: int
    mode: str = "min"

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise ValueError(f"n and m must be >= 1, got n={self.n}, m={self.m}")
        if not 0 <= self.r_fb <= 62:
            raise ValueError(f"r_fb must be in [0, 62] for enumeration, got {self.r_fb}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.mode not in ("min", "max"):
            raise ValueError(f"mode must be 'min' or 'max', got {self.mode!r}")


@dataclasses.dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    samples: int


def _estimate_from(vals: np.ndarray) -> Estimate:
    n = vals.size
    stderr = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Estimate(mean=float(vals.mean()), stderr=stderr, samples=n)


def _run_trials(trials: int, threads: int, worker) -> np.ndarray:
    """Fill one slot per trial; the slot layout makes the merge order-free."""
    vals = np.empty(trials, dtype=float)

    def run_range(lo: int, hi: int) -> None:
        for t in range(lo, hi):
            vals[t] = worker(t)

    threads = max(1, int(threads))
    if threads == 1 or trials < 2 * threads:
        run_range(0, trials)
        return vals
    bounds = np.linspace(0, trials, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(run_range, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        for f in futures:
            f.result()
    return vals


def _check_budget(cfg: SimConfig) -> int:
    k = 1 << cfg.r_fb
    work = k * cfg.n * cfg.trials
    if work > DIRECT_BUDGET:
        raise BudgetError(
            f"enumeration of 2^{cfg.r_fb} codewords x {cfg.trials} trials needs "
            f"{work:.2e} element ops (budget {DIRECT_BUDGET:.2e}); "
            "use the conditional-CDF route instead"
        )
    return k


def simulate_c_direct(cfg: SimConfig, codebook: Codebook | None = None, threads: int = 1) -> Estimate:
    """Selected quadratic form of (1/n) H H* by explicit enumeration.

    codebook=None redraws an isotropic codebook every trial (the random
    ensemble); a fixed Codebook evaluates that specific design.
    """
    k = _check_budget(cfg)
    if codebook is not None and codebook.n != cfg.n:
        raise ValueError(f"codebook dimension {codebook.n} != cfg.n {cfg.n}")
    fixed = None if codebook is None else codebook.vectors
    scale = math.sqrt(0.5)
    pick = np.min if cfg.mode == "min" else np.max

    def worker(t: int) -> float:
        rng = _rng(cfg.seed, 1, t)
        h = scale * (rng.standard_normal((cfg.n, cfg.m)) + 1j * rng.standard_normal((cfg.n, cfg.m)))
        a = (h @ h.conj().T) / cfg.n
        if fixed is None:
            z = rng.standard_normal((k, cfg.n)) + 1j * rng.standard_normal((k, cfg.n))
            v = _unit_rows(z)
        else:
            v = fixed
        quad = np.einsum("ki,ij,kj->k", v.conj(), a, v).real
        return float(pick(quad))

    return _estimate_from(_run_trials(cfg.trials, threads, worker))


def simulate_c_spectral(cfg: SimConfig, threads: int = 1) -> Estimate:
    """Random-ensemble estimator through the spectral representation.

    Conditional on the spectrum of (1/m) H H*, each isotropic codeword's
    quadratic form is distributed as sum(lam_i Y_i)/sum(Y_i) with Y ~ Exp(1)
    i.i.d.; the m/n factor converts back to (1/n) H H* units.
    """
    k = _check_budget(cfg)
    scale = math.sqrt(0.5)
    pick = np.min if cfg.mode == "min" else np.max
    factor = cfg.m / cfg.n

    def worker(t: int) -> float:
        rng = _rng(cfg.seed, 2, t)
        h = scale * (rng.standard_normal((cfg.n, cfg.m)) + 1j * rng.standard_normal((cfg.n, cfg.m)))
        lam = np.maximum(np.linalg.eigvalsh((h @ h.conj().T) / cfg.m), 0.0)
        y = rng.standard_exponential((k, cfg.n), method="inv")
        ratios = (y @ lam) / y.sum(axis=1)
        return factor * float(pick(ratios))

    return _estimate_from(_run_trials(cfg.trials, threads, worker))


def simulate_c_cdf(cfg: SimConfig, samples: int = 20000, threads: int = 1) -> Estimate:
    """Random-ensemble estimator through the conditional-CDF integral.

    Each trial draws one spectrum and integrates the selected-extreme
    identity E[extreme | lam] over it, so the feedback depth never enters
    as an enumeration count.  Far cheaper than simulate_c_direct once
    2^r_fb codewords stop fitting in memory, at the price of a small
    integration bias controlled by `samples` and the grid refinement.
    """
    factor = cfg.m / cfg.n

    def worker(t: int) -> float:
        spec = sample_spectrum(cfg.n, cfg.m, _child_seed(cfg.seed, 3, t))
        val = c_rand_via_cdf(
            spec.eigenvalues, cfg.r_fb, cfg.mode, samples, _child_seed(cfg.seed, 4, t)
        )
        return factor * val

    return _estimate_from(_run_trials(cfg.trials, threads, worker))


# ---------------------------------------------------------------------------
# conditional CDF of the weighted exponential ratio


def _as_spectrum(lam) -> np.ndarray:
    arr = np.asarray(lam, dtype=float).ravel()
    if arr.size < 1 or not np.isfinite(arr).all():
        raise ValueError("spectrum must be a non-empty finite array")
    return arr


def conditional_cdf_mc(lam, x: float, samples: int, seed: int) -> float:
    """Plain Monte Carlo estimate of P(sum (lam_i - x) Y_i <= 0)."""
    arr = _as_spectrum(lam)
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    coeffs = arr - float(x)
    rng = _rng(seed, 10)
    hits = 0
    remaining = int(samples)
    chunk = max(1, min(remaining, 8_000_000 // max(1, arr.size)))
    while remaining > 0:
        take = min(chunk, remaining)
        s = rng.standard_exponential((take, arr.size), method="inv") @ coeffs
        hits += int(np.count_nonzero(s <= 0.0))
        remaining -= take
    return hits / samples


@dataclasses.dataclass(frozen=True)
class TiltedCdfResult:
    x: float
    log_prob: float
    ess: float
    gamma: float
    used_fallback: bool = False


def _tilt_root(coeffs: np.ndarray) -> tuple[float, bool]:
    """Tilt gamma centering the weighted exponential sum at zero.

    g(gamma) = sum c_i / (1 - gamma c_i) is strictly increasing between the
    poles, so the root is unique.  The closed-form bulk tilt scaled from the
    spectrum moments is kept as a defensive fallback.
    """
    cmin = float(coeffs.min())
    cmax = float(coeffs.max())
    lo = (1.0 - 1e-9) / cmin
    hi = (1.0 - 1e-9) / cmax

    def g(gamma: float) -> float:
        return float(np.sum(coeffs / (1.0 - gamma * coeffs)))

    if g(0.0) == 0.0:
        return 0.0, False
    try:
        return float(brentq(g, lo, hi, xtol=1e-13, rtol=8.9e-16)), False
    except (ValueError, RuntimeError):
        # Fallback: bulk optimal tilt with beta estimated from the spectrum
        # variance, clipped into the open range between the poles.
        beta_hat = max(float(np.var(coeffs)), 1e-6)
        x_hat = 1.0 - float(coeffs.mean())
        gamma = (x_hat - 1.0) / (beta_hat * max(abs(x_hat), 1e-12))
        gamma = min(max(gamma, lo * (1.0 - 1e-6)), hi * (1.0 - 1e-6))
        return float(gamma), True


def _tail_log_prob(
    coeffs: np.ndarray,
    expo: np.ndarray,
    gamma: float,
    lower: bool,
) -> tuple[float, float, float]:
    """Log tail probability by exact-likelihood-ratio tilting.

    expo holds standard exponential draws, one row per sample.  Returns
    (log_prob of the requested side, effective sample size, stderr of the
    log estimate).
    """
    rho = 1.0 - gamma * coeffs
    scaled = coeffs / rho
    s = expo @ scaled
    log_w = -float(np.log(rho).sum()) - gamma * s
    mask = (s <= 0.0) if lower else (s > 0.0)
    if not mask.any():
        return -math.inf, 0.0, math.inf
    lw = log_w[mask]
    m = float(lw.max())
    u = np.exp(lw - m)
    s1 = float(u.sum())
    s2 = float((u * u).sum())
    n = expo.shape[0]
    log_p = m + math.log(s1) - math.log(n)
    ess = s1 * s1 / s2
    # stderr of log p from the weight second moment (weights off the event
    # count as zero).
    ratio = n * s2 / (s1 * s1) - 1.0
    se_log = math.sqrt(max(ratio, 0.0) / n)
    return log_p, ess, se_log


def _cdf_log_prob(
    coeffs: np.ndarray,
    expo: np.ndarray,
    gamma: float,
) -> tuple[float, float, float]:
    """log P(S <= 0) with the indicator taken on the rare side of the tilt."""
    if float(coeffs.sum()) >= 0.0:
        return _tail_log_prob(coeffs, expo, gamma, lower=True)
    log_q, ess, se = _tail_log_prob(coeffs, expo, gamma, lower=False)
    q = math.exp(min(log_q, -1e-17))
    return math.log1p(-min(q, 1.0 - 1e-16)), ess, se


def conditional_cdf_tilted(lam, x: float, samples: int, seed: int) -> TiltedCdfResult:
    """Tilted importance-sampling estimate of log P(sum (lam_i - x) Y_i <= 0).

    x must lie strictly between the smallest and largest spectrum values.
    Raises ReliabilityError when the effective sample size drops below 10.
    """
    arr = _as_spectrum(lam)
    x = float(x)
    if not (arr.min() < x < arr.max()):
        raise ValueError(
            f"x={x!r} must lie strictly inside the spectrum range "
            f"({arr.min():.6g}, {arr.max():.6g})"
        )
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    coeffs = arr - x
    gamma, used_fallback = _tilt_root(coeffs)
    expo = _rng(seed, 11).standard_exponential((int(samples), arr.size), method="inv")
    log_p, ess, _ = _cdf_log_prob(coeffs, expo, gamma)
    if ess < 10.0:
        raise ReliabilityError(
            f"effective sample size {ess:.2f} < 10 at x={x:.6g}; "
            f"increase samples (gamma={gamma:.4g})"
        )
    return TiltedCdfResult(
        x=x,
        log_prob=min(log_p, 0.0),
        ess=ess,
        gamma=gamma,
        used_fallback=used_fallback,
    )


def ldp_rate_estimate(beta: float, x: float, n_list, samples: int, seed: int) -> list[tuple[int, float]]:
    """Empirical decay rates -log mu_n / n along a list of sizes.

    Each size draws one spectrum at m = round(n / beta) and estimates the
    conditional tail probability at level x by tilted sampling.  Levels
    below the mean probe the lower tail; levels above it are handled by
    negating the spectrum, which swaps the tails.
    """
    law = mp_law(beta)
    if not (law.lambda_t_minus < x < law.lambda_plus) or x == 1.0:
        raise ValueError(
            f"x={x!r} must lie in ({law.lambda_t_minus}, {law.lambda_plus}) "
            "and away from the mean at 1"
        )
    out: list[tuple[int, float]] = []
    for n in n_list:
        n = int(n)
        if n < 1:
            raise ValueError(f"sizes must be >= 1, got {n}")
        m = max(1, round(n / beta))
        spec = sample_spectrum(n, m, _child_seed(seed, 21, n))
        eigs = spec.eigenvalues
        if x <= float(eigs.min()) or x >= float(eigs.max()):
            raise ReliabilityError(
                f"level x={x:.6g} fell outside the sampled spectrum at n={n}"
            )
        if x > 1.0:
            res = conditional_cdf_tilted(-eigs, -x, samples, _child_seed(seed, 22, n))
        else:
            res = conditional_cdf_tilted(eigs, x, samples, _child_seed(seed, 22, n))
        out.append((n, -res.log_prob / n))
    return out


# ---------------------------------------------------------------------------
# conditional-CDF route to the selected extremes


def _survival_power(log_p: float, r_fb: int) -> float:
    """(1 - p)^(2^r_fb) from log p, stable across the whole range."""
    if log_p >= -1e-12:
        return 0.0
    if log_p > -37.0:
        l1p = math.log1p(-math.exp(log_p))
        if l1p == 0.0:
            return 1.0
        log_t = r_fb * _LN2 + math.log(-l1p)
    else:
        log_t = r_fb * _LN2 + log_p
    if log_t > 709.0:
        return 0.0
    return math.exp(-math.exp(log_t))


def _refine(xs: list[float], vals: list[float], evaluate, budget: int = 4096) -> tuple[list[float], list[float]]:
    """Bisect intervals until adjacent integrand values differ by <= 0.2."""
    while True:
        splits = [
            i
            for i in range(len(xs) - 1)
            if abs(vals[i + 1] - vals[i]) > 0.2 and (xs[i + 1] - xs[i]) > 1e-12
        ]
        if not splits:
            return xs, vals
        if len(xs) + len(splits) > budget:
            raise BudgetError(
                f"integration grid would exceed {budget} nodes; integrand too sharp"
            )
        for offset, i in enumerate(splits):
            mid = 0.5 * (xs[i + offset] + xs[i + offset + 1])
            xs.insert(i + offset + 1, mid)
            vals.insert(i + offset + 1, evaluate(mid))


def _trapezoid(xs: list[float], vals: list[float]) -> float:
    total = 0.0
    for i in range(len(xs) - 1):
        total += 0.5 * (vals[i] + vals[i + 1]) * (xs[i + 1] - xs[i])
    return total


def _c_min_via_cdf(arr: np.ndarray, r_fb: int, samples: int, seed: int) -> float:
    lmin = float(arr.min())
    lmax = float(arr.max())
    if lmax - lmin <= 1e-14 * max(1.0, abs(lmax)):
        return lmin
    if r_fb == 0:
        # One codeword: the ratio has mean equal to the spectrum average.
        return float(arr.mean())
    expo = _rng(seed, 12).standard_exponential((int(samples), arr.size), method="inv")

    def integrand(x: float) -> float:
        coeffs = arr - x
        gamma, _ = _tilt_root(coeffs)
        log_p, _, _ = _cdf_log_prob(coeffs, expo, gamma)
        return _survival_power(log_p, r_fb)

    inner = np.linspace(lmin, lmax, 64)[1:-1]
    xs = [lmin, *map(float, inner), lmax]
    vals = [1.0, *(integrand(float(x)) for x in inner), 0.0]
    xs, vals = _refine(xs, vals, integrand)
    return lmin + _trapezoid(xs, vals)


def c_rand_via_cdf(lam, r_fb: int, mode: str, samples: int, seed: int) -> float:
    """Conditional random-ensemble extreme, integrated through the CDF.

    Returns E[ extreme_k sum(lam_i Y_i)/sum(Y_i) | lam ] over 2^r_fb
    independent codewords, in the units of the supplied spectrum; callers
    apply the m/n channel normalization and any averaging over spectra.
    Feedback depths far beyond enumeration are fine since 2^r_fb only ever
    appears inside logarithms.
    """
    arr = _as_spectrum(lam)
    if r_fb < 0:
        raise ValueError(f"r_fb must be >= 0, got {r_fb}")
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    if mode == "min":
        return _c_min_via_cdf(arr, r_fb, samples, seed)
    if mode == "max":
        return -_c_min_via_cdf(-arr, r_fb, samples, seed)
    raise ValueError(f"mode must be 'min' or 'max', got {mode!r}")


def quantile_x_n(lam, p: float, seed: int, samples: int = 20000) -> float:
    """Level x with conditional CDF mu(x) = p, by bisection in x.

    Common random numbers across bisection steps keep the estimated CDF
    monotone in x, so the search is stable even for p around 2^(-200).
    """
    arr = _as_spectrum(lam)
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must be in (0, 1), got {p!r}")
    lmin = float(arr.min())
    lmax = float(arr.max())
    span = lmax - lmin
    if span <= 0.0:
        raise ValueError("spectrum is degenerate; the quantile is not defined")
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    expo = _rng(seed, 13).standard_exponential((int(samples), arr.size), method="inv")
    target = math.log(p)

    def log_cdf(x: float) -> tuple[float, float]:
        coeffs = arr - x
        gamma, _ = _tilt_root(coeffs)
        log_p, _, se = _cdf_log_prob(coeffs, expo, gamma)
        return log_p, se

    a = lmin + 1e-9 * span
    b = lmax - 1e-9 * span
    fa, _ = log_cdf(a)
    if fa >= target:
        return a
    fb, _ = log_cdf(b)
    if fb <= target:
        return b
    for _ in range(80):
        mid = 0.5 * (a + b)
        fm, se = log_cdf(mid)
        if abs(fm - target) <= se or (b - a) <= 1e-9 * span:
            return mid
        if fm < target:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def _uniform_min_bound(arr: np.ndarray, r_fb: int, samples: int, seed: int) -> float:
    if r_fb == 0:
        return float(arr.mean())
    lmin = float(arr.min())
    expo = _rng(seed, 14).standard_exponential((int(samples), arr.size), method="inv")

    def log_cdf(x: float) -> float:
        coeffs = arr - x
        gamma, _ = _tilt_root(coeffs)
        log_p, _, _ = _cdf_log_prob(coeffs, expo, gamma)
        return log_p

    # Quantile at 2^-r_fb with the same exponential panel.
    lmax = float(arr.max())
    span = lmax - lmin
    target = -r_fb * _LN2
    a = lmin + 1e-9 * span
    b = lmax - 1e-9 * span
    if log_cdf(a) >= target:
        xq = a
    elif log_cdf(b) <= target:
        xq = b
    else:
        for _ in range(80):
            mid = 0.5 * (a + b)
            if (b - a) <= 1e-9 * span:
                break
            if log_cdf(mid) < target:
                a = mid
            else:
                b = mid
        xq = 0.5 * (a + b)

    def integrand(x: float) -> float:
        # min(2^r_fb mu(x), 1), evaluated in logs.
        return math.exp(min(0.0, r_fb * _LN2 + log_cdf(x)))

    if xq - lmin <= 1e-12 * max(1.0, abs(lmin)):
        return xq
    inner = np.linspace(lmin, xq, 64)[1:-1]
    xs = [lmin, *map(float, inner), xq]
    vals = [0.0, *(integrand(float(x)) for x in inner), integrand(xq)]
    xs, vals = _refine(xs, vals, integrand)
    return xq - _trapezoid(xs, vals)


def uniform_codebook_bound(lam, r_fb: int, mode: str, seed: int, samples: int = 20000) -> float:
    """Codebook-independent conditional bound on the selected extreme.

    mode 'min': a lower bound on E[min | lam] valid for every codebook of
    2^r_fb codewords under the isotropic selection statistics; mode 'max'
    gives the mirrored upper bound.  r_fb = 0 returns the conditional mean.
    """
    arr = _as_spectrum(lam)
    if r_fb < 0:
        raise ValueError(f"r_fb must be >= 0, got {r_fb}")
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    if mode == "min":
        return _uniform_min_bound(arr, r_fb, samples, seed)
    if mode == "max":
        return -_uniform_min_bound(-arr, r_fb, samples, seed)
    raise ValueError(f"mode must be 'min' or 'max', got {mode!r}")
