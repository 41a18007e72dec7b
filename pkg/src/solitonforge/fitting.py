"""Least-squares exponential decay fits shared by profiles, waveforms, gluing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WindowEmpty, WindowTooNoisy

__all__ = ["DecayFit", "fit_log_slope", "fit_tail_decay", "fit_time_decay"]


@dataclass
class DecayFit:
    rate: float          # decay rate (positive = decaying), 1/length or 1/time
    prefactor: float
    r_squared: float
    window: tuple
    n_points: int


def fit_log_slope(x, y, window=None) -> DecayFit:
    """Fit log y = log C - rate * x by least squares over an x-window."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(y) & (y > 0.0)
    if window is not None:
        lo, hi = window
        keep &= (x >= lo) & (x <= hi)
    if np.count_nonzero(keep) < 3:
        raise WindowEmpty(f"only {np.count_nonzero(keep)} usable points in window")
    xs, ys = x[keep], np.log(y[keep])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return DecayFit(
        rate=-float(slope),
        prefactor=float(np.exp(intercept)),
        r_squared=r2,
        window=(float(xs.min()), float(xs.max())),
        n_points=int(len(xs)),
    )


def fit_tail_decay(x, values, window, min_r2: float = 0.99) -> DecayFit:
    """Decay rate of a profile tail: slope of log|values| over the window.

    Raises WindowTooNoisy when the fit explains less than ``min_r2`` of the
    variance (profile not in its asymptotic regime, or window off the tail).
    """
    fit = fit_log_slope(x, np.abs(np.asarray(values, dtype=float)), window)
    if fit.r_squared < min_r2:
        raise WindowTooNoisy(
            f"tail fit R^2 = {fit.r_squared:.4f} < {min_r2} on window {fit.window}"
        )
    return fit


def fit_time_decay(t, norms, value_window=(1e-9, 1e-2)) -> DecayFit:
    """Exponential fit of a norm time series over a value-selected window.

    Points are kept where the norm lies inside ``value_window``; this trims
    both the early nonexponential transient and the late roundoff floor.
    """
    t = np.asarray(t, dtype=float)
    norms = np.asarray(norms, dtype=float)
    lo, hi = value_window
    keep = np.isfinite(norms) & (norms >= lo) & (norms <= hi)
    if np.count_nonzero(keep) < 5:
        raise WindowEmpty(
            f"norm series enters [{lo:g}, {hi:g}] at only "
            f"{np.count_nonzero(keep)} points"
        )
    return fit_log_slope(t[keep], norms[keep])
