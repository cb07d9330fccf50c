"""Reduction of trajectory ensembles into asymptotic observables.

The pipeline is: pointwise ensemble statistics over trajectories, long-time
averages over a window ``[t*, T]``, scaling fits of the time-averaged
entropy against ``ln L``, and the crossover-field estimate where the fitted
saturation scale times ``ln L_max`` reaches unity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .trajectories import EntropyTimeSeries

__all__ = [
    "EnsembleStats",
    "AsymptoticEstimate",
    "TanhFit",
    "CrossoverEstimate",
    "ensemble_average",
    "single_trajectory_stats",
    "time_average",
    "stationarity_check",
    "fit_tanh_log",
    "crossover_field",
    "asymptotic_correlation",
    "loglinear_slope",
    "gamma_monotonicity_warnings",
]

BLOCK_LENGTH = 10.0  # time units treated as one correlated block


@dataclass
class EnsembleStats:
    """Pointwise mean and standard error over an ensemble.

    The per-trajectory sample matrices are retained so that window averages
    can carry exact (autocorrelation-free) errors; when statistics are
    rebuilt from CSV files the samples are absent and errors fall back to a
    blocked propagation of the pointwise standard errors.
    """

    times: np.ndarray
    n_rand: int
    entropy_mean: np.ndarray
    entropy_err: np.ndarray
    renyi2_mean: np.ndarray
    renyi2_err: np.ndarray
    occ_mean: np.ndarray | None = None       # (n_records, L)
    occ_err: np.ndarray | None = None
    nbar_mean: np.ndarray | None = None      # site-averaged occupation
    nbar_err: np.ndarray | None = None
    corr_mean: np.ndarray | None = None      # (n_records, n_r)
    corr_err: np.ndarray | None = None
    entropy_samples: np.ndarray | None = None  # (n_rand, n_records)
    renyi2_samples: np.ndarray | None = None
    corr_samples: np.ndarray | None = None     # (n_rand, n_records, n_r)
    trajectory_ids: tuple = ()

    def quantity(self, name: str):
        """(mean, err, samples) triplet for a named observable."""
        table = {
            "entropy": (self.entropy_mean, self.entropy_err, self.entropy_samples),
            "renyi2": (self.renyi2_mean, self.renyi2_err, self.renyi2_samples),
        }
        if name not in table:
            raise KeyError(f"unknown quantity {name!r}; expected one of {sorted(table)}")
        return table[name]


@dataclass(frozen=True)
class AsymptoticEstimate:
    """Window average ``(T - t*)^{-1} integral_{t*}^{T} dt <O(t)>``."""

    value: float
    error: float
    t_star: float
    T: float


@dataclass(frozen=True)
class TanhFit:
    """Weighted fit of ``a tanh(lambda ln L)`` to size-resolved averages."""

    lam: float
    lam_err: float
    amplitude: float
    residual: float
    L_max: int
    converged: bool


@dataclass(frozen=True)
class CrossoverEstimate:
    """Field where ``lambda(h_f) ln L_max`` crosses 1, if it does."""

    hf_c: float | None
    error: float | None
    L_max: int
    verdict: str  # "crossover" | "subextensive" | "area-law"


def _mean_sem(samples: np.ndarray):
    mean = samples.mean(axis=0)
    sem = samples.std(axis=0, ddof=1) / np.sqrt(samples.shape[0])
    return mean, sem


def ensemble_average(series: list[EntropyTimeSeries], keep_samples: bool = True) -> EnsembleStats:
    """Pointwise mean and standard error over trajectories, in list order.

    All series must share the time grid exactly.  The reduction is a fixed
    fold over the given order, so it is deterministic; the mean itself is
    permutation-invariant to round-off.
    """
    if len(series) < 2:
        raise ValueError(f"ensemble_average needs >= 2 trajectories, got {len(series)}")
    times = series[0].times
    for s in series[1:]:
        if s.times.shape != times.shape or not np.array_equal(s.times, times):
            raise ValueError("trajectories recorded on different time grids")

    S = np.stack([s.entropy for s in series])
    H2 = np.stack([s.renyi2 for s in series])
    occ = np.stack([s.occupations for s in series])
    s_mean, s_err = _mean_sem(S)
    h_mean, h_err = _mean_sem(H2)
    o_mean, o_err = _mean_sem(occ)
    # sites within one trajectory are correlated: the error of the
    # site-averaged occupation comes from the spread of per-trajectory means
    nbar_mean, nbar_err = _mean_sem(occ.mean(axis=2))

    corr_mean = corr_err = corr_samples = None
    if series[0].corr is not None:
        C = np.stack([s.corr for s in series])
        corr_mean, corr_err = _mean_sem(C)
        corr_samples = C if keep_samples else None

    return EnsembleStats(
        times=times,
        n_rand=len(series),
        entropy_mean=s_mean,
        entropy_err=s_err,
        renyi2_mean=h_mean,
        renyi2_err=h_err,
        occ_mean=o_mean,
        occ_err=o_err,
        nbar_mean=nbar_mean,
        nbar_err=nbar_err,
        corr_mean=corr_mean,
        corr_err=corr_err,
        entropy_samples=S if keep_samples else None,
        renyi2_samples=H2 if keep_samples else None,
        corr_samples=corr_samples,
        trajectory_ids=tuple((s.seed, s.traj_index) for s in series),
    )


def single_trajectory_stats(s: EntropyTimeSeries) -> EnsembleStats:
    """Stats wrapper for deterministic (no-click) runs: zero standard error."""
    zeros = np.zeros_like(s.entropy)
    return EnsembleStats(
        times=s.times,
        n_rand=1,
        entropy_mean=s.entropy.copy(),
        entropy_err=zeros.copy(),
        renyi2_mean=s.renyi2.copy(),
        renyi2_err=zeros.copy(),
        occ_mean=s.occupations.copy(),
        occ_err=np.zeros_like(s.occupations),
        nbar_mean=s.occupations.mean(axis=1),
        nbar_err=zeros.copy(),
        corr_mean=None if s.corr is None else s.corr.copy(),
        corr_err=None if s.corr is None else np.zeros_like(s.corr),
        entropy_samples=s.entropy[None, :].copy(),
        renyi2_samples=s.renyi2[None, :].copy(),
        corr_samples=None if s.corr is None else s.corr[None, :, :].copy(),
        trajectory_ids=((s.seed, s.traj_index),),
    )


def _window(times: np.ndarray, t_star: float, T: float) -> np.ndarray:
    eps = 1e-9 * max(1.0, abs(T))
    if times[0] > t_star + eps or times[-1] < T - eps:
        raise ValueError(
            f"recorded samples [{times[0]}, {times[-1]}] do not span the window [{t_star}, {T}]"
        )
    mask = (times >= t_star - eps) & (times <= T + eps)
    if mask.sum() < 2:
        raise ValueError("fewer than two recorded samples in the averaging window")
    return mask


def _window_mean(times, values, mask):
    t = times[mask]
    return np.trapezoid(values[..., mask], t, axis=-1) / (t[-1] - t[0])


def _blocked_error(times, sem, mask) -> float:
    """Error propagation treating each BLOCK_LENGTH span as fully correlated."""
    t = times[mask]
    e = sem[mask]
    span = t[-1] - t[0]
    edges = np.arange(t[0], t[-1] + BLOCK_LENGTH, BLOCK_LENGTH)
    var = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (t >= lo) & (t < hi) if hi < t[-1] else (t >= lo) & (t <= t[-1])
        if not np.any(sel):
            continue
        weight = (min(hi, t[-1]) - lo) / span
        var += (weight * e[sel].mean()) ** 2
    return float(np.sqrt(var))


def time_average(
    stats: EnsembleStats, t_star: float, T: float, quantity: str = "entropy"
) -> AsymptoticEstimate:
    """Trapezoidal window average of an ensemble-mean observable.

    The error is the standard error of the per-trajectory window averages
    (trajectories are independent, so no autocorrelation correction is
    needed); without samples it falls back to pointwise standard errors
    combined over 10-time-unit blocks.
    """
    if not t_star < T:
        raise ValueError(f"need t_star < T, got {t_star} >= {T}")
    mean, sem, samples = stats.quantity(quantity)
    mask = _window(stats.times, t_star, T)
    value = float(_window_mean(stats.times, mean, mask))
    if samples is not None and samples.shape[0] > 1:
        per_traj = _window_mean(stats.times, samples, mask)
        error = float(per_traj.std(ddof=1) / np.sqrt(len(per_traj)))
    elif samples is not None:
        error = 0.0
    else:
        error = _blocked_error(stats.times, sem, mask)
    return AsymptoticEstimate(value=value, error=error, t_star=t_star, T=T)


def stationarity_check(
    stats: EnsembleStats, t_star: float, T: float, quantity: str = "entropy"
) -> str | None:
    """Warn when the two halves of the averaging window disagree at 2 sigma."""
    mid = 0.5 * (t_star + T)
    first = time_average(stats, t_star, mid, quantity)
    second = time_average(stats, mid, T, quantity)
    gap = abs(first.value - second.value)
    scale = np.hypot(first.error, second.error)
    if scale > 0 and gap > 2.0 * scale:
        return (
            f"{quantity} not stationary on [{t_star}, {T}]: window halves differ by "
            f"{gap:.4g} ({gap / scale:.1f} sigma)"
        )
    return None


def fit_tanh_log(points) -> TanhFit:
    """Weighted least squares of ``value = a tanh(lambda ln L)``.

    ``points`` is an iterable of ``(L, value, error)``.  The fit is seeded
    from the small-L slope; failure to converge within 500 evaluations is
    reported as ``lam = 0`` with ``converged = False`` (the subextensive
    verdict).
    """
    pts = sorted((int(L), float(v), float(e)) for L, v, e in points)
    if len(pts) < 3:
        raise ValueError(f"fit_tanh_log needs at least 3 sizes, got {len(pts)}")
    L = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts])
    err = np.array([p[2] for p in pts])
    if L.min() < 4:
        raise ValueError(f"fit_tanh_log requires L >= 4, got {L.min():.0f}")
    L_max = int(L.max())

    if np.abs(y).max() == 0.0:
        return TanhFit(lam=0.0, lam_err=0.0, amplitude=0.0, residual=0.0, L_max=L_max, converged=True)

    def model(size, a, lam):
        return a * np.tanh(lam * np.log(size))

    a0 = max(np.abs(y).max(), 1e-12)
    slope0 = (y[1] - y[0]) / (np.log(L[1]) - np.log(L[0]))
    lam0 = float(np.clip(slope0 / a0, 1e-2, 3.0)) if slope0 > 0 else 0.1
    sigma = err if np.all(err > 0) else None
    try:
        popt, pcov = scipy.optimize.curve_fit(
            model,
            L,
            y,
            p0=[a0, lam0],
            sigma=sigma,
            absolute_sigma=sigma is not None,
            bounds=([0.0, 0.0], [np.inf, np.inf]),
            maxfev=500,
        )
    except RuntimeError:
        return TanhFit(lam=0.0, lam_err=np.inf, amplitude=0.0, residual=np.inf, L_max=L_max, converged=False)
    resid = y - model(L, *popt)
    if sigma is not None:
        resid = resid / sigma
    lam_err = float(np.sqrt(pcov[1, 1])) if np.isfinite(pcov[1, 1]) else np.inf
    return TanhFit(
        lam=float(popt[1]),
        lam_err=lam_err,
        amplitude=float(popt[0]),
        residual=float((resid**2).sum()),
        L_max=L_max,
        converged=True,
    )


def crossover_field(fits_by_hf: dict[float, TanhFit], L_max: int) -> CrossoverEstimate:
    """Interpolated field where ``lambda(h_f) ln L_max`` crosses 1.

    Fits that failed to converge count as ``lambda = 0``.  With no crossing
    the verdict is the regime of the whole grid.  The uncertainty combines
    half the bracketing grid spacing with the fit errors mapped through the
    local slope.
    """
    if not fits_by_hf:
        raise ValueError("no fits supplied")
    hf = np.array(sorted(fits_by_hf))
    lnL = np.log(L_max)
    lam = np.array([fits_by_hf[h].lam if fits_by_hf[h].converged else 0.0 for h in hf])
    lam_err = np.array(
        [fits_by_hf[h].lam_err if fits_by_hf[h].converged else 0.0 for h in hf]
    )
    y = lam * lnL
    if np.all(y < 1.0):
        return CrossoverEstimate(hf_c=None, error=None, L_max=L_max, verdict="subextensive")
    if np.all(y >= 1.0):
        return CrossoverEstimate(hf_c=None, error=None, L_max=L_max, verdict="area-law")
    for i in range(len(hf) - 1):
        y0, y1 = y[i], y[i + 1]
        if (y0 - 1.0) * (y1 - 1.0) <= 0.0 and y0 != y1:
            frac = (1.0 - y0) / (y1 - y0)
            hf_c = hf[i] + frac * (hf[i + 1] - hf[i])
            slope = (y1 - y0) / (hf[i + 1] - hf[i])
            sigma_y = 0.5 * (lam_err[i] + lam_err[i + 1]) * lnL
            grid_term = 0.5 * (hf[i + 1] - hf[i])
            fit_term = sigma_y / abs(slope) if slope != 0 else 0.0
            return CrossoverEstimate(
                hf_c=float(hf_c),
                error=float(np.hypot(grid_term, fit_term)),
                L_max=L_max,
                verdict="crossover",
            )
    return CrossoverEstimate(hf_c=None, error=None, L_max=L_max, verdict="subextensive")


def asymptotic_correlation(stats: EnsembleStats, t_star: float, T: float):
    """Site- and time-averaged squared correlation profile ``C(r)``.

    The recorded per-trajectory profiles are already site-averaged, so the
    window average directly yields ``C(r)`` for ``r = 0 .. L/2``.
    """
    if stats.corr_mean is None:
        raise ValueError("correlation recording was not enabled for this ensemble")
    mask = _window(stats.times, t_star, T)
    profile = _window_mean(stats.times, stats.corr_mean.T, mask)
    if stats.corr_samples is not None and stats.corr_samples.shape[0] > 1:
        per_traj = _window_mean(stats.times, np.moveaxis(stats.corr_samples, 1, 2), mask)
        err = per_traj.std(axis=0, ddof=1) / np.sqrt(per_traj.shape[0])
    else:
        err = np.array(
            [_blocked_error(stats.times, stats.corr_err[:, r], mask) for r in range(profile.size)]
        )
    r = np.arange(profile.size)
    return r, profile, err


def loglinear_slope(points):
    """Weighted LSQ slope of ``value`` against ``ln L``: (slope, stderr).

    Zero errors fall back to equal weights; the returned stderr is the
    standard parameter error of the weighted fit.
    """
    pts = sorted((float(L), float(v), float(e)) for L, v, e in points)
    if len(pts) < 2:
        raise ValueError("need at least two sizes for a slope")
    x = np.log(np.array([p[0] for p in pts]))
    y = np.array([p[1] for p in pts])
    e = np.array([p[2] for p in pts])
    w = 1.0 / e**2 if np.all(e > 0) else np.ones_like(e)
    sw, swx, swy = w.sum(), (w * x).sum(), (w * y).sum()
    swxx, swxy = (w * x * x).sum(), (w * x * y).sum()
    denom = sw * swxx - swx**2
    slope = (sw * swxy - swx * swy) / denom
    slope_err = np.sqrt(sw / denom)
    return float(slope), float(slope_err)


def gamma_monotonicity_warnings(estimates_by_gamma: dict[float, AsymptoticEstimate]) -> list[str]:
    """Flag (not fail) violations of S̄ decreasing with the measurement rate."""
    gammas = sorted(estimates_by_gamma)
    warnings = []
    for g0, g1 in zip(gammas[:-1], gammas[1:]):
        a, b = estimates_by_gamma[g0], estimates_by_gamma[g1]
        excess = b.value - a.value
        scale = np.hypot(a.error, b.error)
        if scale > 0 and excess > 3.0 * scale:
            warnings.append(
                f"entropy increased from gamma={g0} to gamma={g1} by {excess:.4g} "
                f"({excess / scale:.1f} sigma)"
            )
    return warnings
