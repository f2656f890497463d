"""Statistical primitives: binomial pmf/tails, least-squares fits, quantiles,
and bootstrap resampling.

Binomial quantities are evaluated exactly for small M and in log space above
that, keeping tails accurate down to ~1e-40. The quantile convention is fixed
(order statistics with linear interpolation) so thresholds are reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# math.comb stays exactly representable as a float well past this, and the
# linear-space product is then correct to a few ulp
_EXACT_PMF_MAX_M = 400


class FitError(Exception):
    """A least-squares fit could not be completed (singular or non-convergent)."""


@dataclass(frozen=True)
class FitResult:
    """Named fit parameters with per-parameter standard deviations."""

    parameters: dict[str, float]
    standard_deviations: dict[str, float]
    residual_norm: float

    def __post_init__(self):
        for name, sd in self.standard_deviations.items():
            if sd < 0.0 or not math.isfinite(sd):
                raise ValueError(f"standard deviation for {name} must be finite and >= 0")


def _check_binomial_args(m: int, total: int, p: float):
    if not 0 <= m <= total:
        raise ValueError(f"need 0 <= m <= M, got m={m}, M={total}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")


def _log_pmf(m: int, total: int, p: float) -> float:
    log_comb = (math.lgamma(total + 1) - math.lgamma(m + 1) - math.lgamma(total - m + 1))
    return log_comb + m * math.log(p) + (total - m) * math.log1p(-p)


def binomial_pmf(m: int, total: int, p: float) -> float:
    """P(X = m) for X ~ Binomial(total, p)."""
    _check_binomial_args(m, total, p)
    if p == 0.0:
        return 1.0 if m == 0 else 0.0
    if p == 1.0:
        return 1.0 if m == total else 0.0
    if total <= _EXACT_PMF_MAX_M:
        value = math.comb(total, m) * p**m * (1.0 - p) ** (total - m)
        if value > 0.0:
            return value
    return math.exp(_log_pmf(m, total, p))


def binomial_tail_at_least(m: int, total: int, p: float) -> float:
    """P(X >= m) for X ~ Binomial(total, p), stable deep into the tail."""
    _check_binomial_args(m, total, p)
    if m == 0:
        return 1.0
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    # sum the shorter side for accuracy near 1
    if m <= total * p:
        head = math.fsum(binomial_pmf(k, total, p) for k in range(m))
        return max(0.0, 1.0 - head)
    logs = [_log_pmf(k, total, p) for k in range(m, total + 1)]
    peak = max(logs)
    return math.exp(peak) * math.fsum(math.exp(v - peak) for v in logs)


def fit_linear_basis(xs: Sequence[float], ys: Sequence[float],
                     basis: Sequence[tuple[str, Callable[[float], float]]]) -> FitResult:
    """Ordinary least squares over named basis functions, via normal equations.

    Parameter covariance comes from the residual variance; with as many points
    as parameters the system is determined and the deviations are zero.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size != ys.size:
        raise ValueError("xs and ys must have equal length")
    n_params = len(basis)
    if xs.size < n_params:
        raise FitError(f"need at least {n_params} points, got {xs.size}")
    if np.unique(xs).size < 2:
        raise FitError("need at least 2 distinct x values")
    design = np.column_stack([[fn(x) for x in xs] for _, fn in basis])
    gram = design.T @ design
    try:
        coeffs = np.linalg.solve(gram, design.T @ ys)
        gram_inv = np.linalg.inv(gram)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"singular design matrix: {exc}") from None
    residuals = ys - design @ coeffs
    rss = float(residuals @ residuals)
    dof = xs.size - n_params
    variance = rss / dof if dof > 0 else 0.0
    sds = np.sqrt(np.maximum(variance * np.diag(gram_inv), 0.0))
    names = [name for name, _ in basis]
    return FitResult(
        parameters=dict(zip(names, (float(c) for c in coeffs))),
        standard_deviations=dict(zip(names, (float(s) for s in sds))),
        residual_norm=math.sqrt(rss),
    )


def _exp_model(ns: np.ndarray, amplitude: float, decay: float, offset: float) -> np.ndarray:
    return amplitude * np.exp(-ns / decay) + offset


def _exp_residual_norm(ns, cs, params) -> float:
    return float(np.linalg.norm(cs - _exp_model(ns, *params)))


def fit_exponential_decay(ns: Sequence[float], c_bars: Sequence[float],
                          max_iterations: int = 200) -> FitResult:
    """Fit A * exp(-n / lam) + B by Gauss-Newton from data-driven seeds.

    B seeds at the tail mean, A at head minus tail, and lam from a log-linear
    regression of (c - B); a small grid around that lam guards bad seeds.
    Raises FitError when no seed converges.
    """
    ns = np.asarray(ns, dtype=float)
    cs = np.asarray(c_bars, dtype=float)
    if ns.size != cs.size:
        raise ValueError("ns and c_bars must have equal length")
    if ns.size < 4:
        raise FitError("need at least 4 points for a 3-parameter fit")

    k = max(2, ns.size // 4)
    tail_mean = float(cs[-k:].mean())
    head_mean = float(cs[:k].mean())
    amp0 = head_mean - tail_mean
    span = float(ns[-1] - ns[0]) or 1.0

    seeds = []
    shifted = cs - tail_mean
    usable = shifted * np.sign(amp0 or 1.0) > 1e-12
    if usable.sum() >= 2:
        slope = np.polyfit(ns[usable], np.log(np.abs(shifted[usable])), 1)[0]
        if slope < -1e-12:
            lam0 = -1.0 / slope
            seeds.extend(lam0 * f for f in (1.0, 0.5, 2.0))
    seeds.extend(span * f for f in (0.25, 1.0))

    best = None
    for lam_seed in seeds:
        fitted = _gauss_newton_exp(ns, cs, [amp0, lam_seed, tail_mean], max_iterations)
        if fitted is None:
            continue
        norm = _exp_residual_norm(ns, cs, fitted)
        if best is None or norm < best[1]:
            best = (fitted, norm)
    if best is None:
        raise FitError("exponential fit did not converge from any seed")

    params, norm = best
    amplitude, decay, offset = params
    jac = _exp_jacobian(ns, amplitude, decay)
    dof = ns.size - 3
    variance = norm**2 / dof if dof > 0 else 0.0
    try:
        cov = variance * np.linalg.inv(jac.T @ jac)
        sds = np.sqrt(np.maximum(np.diag(cov), 0.0))
    except np.linalg.LinAlgError:
        sds = np.full(3, math.inf)
    if not np.all(np.isfinite(sds)):
        sds = np.zeros(3)
    amplitude, decay, offset = (float(x) for x in (amplitude, decay, offset))
    return FitResult(
        parameters={"amplitude": amplitude, "decay": decay, "offset": offset},
        standard_deviations={"amplitude": float(sds[0]), "decay": float(sds[1]), "offset": float(sds[2])},
        residual_norm=norm,
    )


def _exp_jacobian(ns: np.ndarray, amplitude: float, decay: float) -> np.ndarray:
    decayed = np.exp(-ns / decay)
    return np.column_stack([decayed, amplitude * decayed * ns / decay**2, np.ones_like(ns)])


def _gauss_newton_exp(ns, cs, start, max_iterations):
    amplitude, decay, offset = start
    if not decay > 0:
        return None
    params = np.array([amplitude, decay, offset], dtype=float)
    for _ in range(max_iterations):
        residuals = cs - _exp_model(ns, *params)
        jac = _exp_jacobian(ns, params[0], params[1])
        try:
            step, *_ = np.linalg.lstsq(jac, residuals, rcond=None)
        except np.linalg.LinAlgError:
            return None
        # damped update keeping the decay constant positive
        scale = 1.0
        base_norm = float(np.linalg.norm(residuals))
        for _ in range(20):
            trial = params + scale * step
            if trial[1] > 0 and _exp_residual_norm(ns, cs, trial) <= base_norm + 1e-15:
                break
            scale *= 0.5
        else:
            return None
        params = params + scale * step
        if float(np.max(np.abs(scale * step))) < 1e-12:
            return tuple(params)
    converged = float(np.max(np.abs(step))) < 1e-9
    return tuple(params) if converged else None


def empirical_quantile(samples: Sequence[float], q: float) -> float:
    """Order-statistic quantile with linear interpolation between ranks."""
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("samples must be nonempty")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must be in (0, 1), got {q}")
    return float(np.quantile(arr, q, method="linear"))


def bootstrap_std(samples: Sequence[float], statistic: Callable[[np.ndarray], float],
                  resamples: int = 1000, rng: np.random.Generator | None = None) -> float:
    """Standard deviation of a statistic over resamples-with-replacement."""
    if resamples < 100:
        raise ValueError("use at least 100 bootstrap resamples")
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("samples must be nonempty")
    if rng is None:
        rng = np.random.default_rng()
    values = np.empty(resamples)
    for b in range(resamples):
        values[b] = statistic(arr[rng.integers(0, arr.size, size=arr.size)])
    return float(values.std(ddof=1))
