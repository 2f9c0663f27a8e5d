"""Multifractal estimation over box-covering measures.

The partition function Z(q, eps) = sum_b mu_b^q is evaluated in log space
over a grid of moment orders q, and its power-law scaling in eps gives the
mass exponent tau(q) by ordinary least squares of log Z on log eps within a
fit window.  Derived quantities:

    H(q)   = (tau(q) + 1) / q          generalized Hurst exponent
    D(q)   = tau(q) / (q - 1)          generalized dimensions
    alpha  = d tau / d q               singularity strength
    f      = q * alpha - tau           singularity spectrum (Legendre)
    C(q)   = -d^2 tau / d q^2          thermodynamic specific heat

q = 0 and q = 1 are excluded from the estimation grid (removable
singularities of H and D); the table still carries check rows for both:
Z(0, eps) is the box count and Z(1, eps) must be 1 for a disjoint covering.
The information dimension D(1) has its own estimator (slope of
sum_b mu_b ln mu_b against ln eps).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import linregress

from .box_cover import BoxMeasures
from .errors import ScalingRangeError, SpecError

DEFAULT_Q_MIN = -10.0
DEFAULT_Q_MAX = 10.0
DEFAULT_Q_STEP = 0.25
DEFAULT_FIT_WINDOW = (0.10, 0.90)
R_SQUARED_WARN = 0.95
_Q_TOL = 1e-9


def regular_grid(q_min: float, q_max: float, q_step: float) -> np.ndarray:
    """Uniform grid from q_min to q_max inclusive (before any exclusions)."""
    if q_step <= 0:
        raise SpecError(f"q_step must be > 0, got {q_step}")
    if q_max <= q_min:
        raise SpecError(f"need q_min < q_max, got [{q_min}, {q_max}]")
    count = int(round((q_max - q_min) / q_step)) + 1
    return q_min + q_step * np.arange(count)


@dataclass(frozen=True)
class QGrid:
    """Ascending moment orders, excluding exactly 0 and 1."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or len(v) == 0:
            raise SpecError("q grid must be a non-empty 1-D array")
        if np.any(np.diff(v) <= 0):
            raise SpecError("q grid must be strictly ascending")
        if np.any(np.abs(v) < _Q_TOL) or np.any(np.abs(v - 1.0) < _Q_TOL):
            raise SpecError("q grid must not contain 0 or 1")
        object.__setattr__(self, "values", v)

    @classmethod
    def regular(
        cls,
        q_min: float = DEFAULT_Q_MIN,
        q_max: float = DEFAULT_Q_MAX,
        q_step: float = DEFAULT_Q_STEP,
    ) -> "QGrid":
        """Uniform grid with 0 and 1 removed (default -10..10 step 0.25)."""
        full = regular_grid(q_min, q_max, q_step)
        keep = (np.abs(full) >= _Q_TOL) & (np.abs(full - 1.0) >= _Q_TOL)
        return cls(values=full[keep])

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PartitionTable:
    """log Z(q, eps) over all radii, plus the q = 0 and q = 1 check rows."""

    radii: np.ndarray        # (R,) ascending
    log_eps: np.ndarray      # (R,)
    q: np.ndarray            # (Q,) estimation grid
    log_z: np.ndarray        # (R, Q)
    box_counts: np.ndarray   # (R,) int: Z(0, eps), exact
    log_z1: np.ndarray       # (R,): log Z(1, eps), ~0 for a disjoint covering
    info_sum: np.ndarray     # (R,): sum_b mu_b ln mu_b (information estimator)
    n: int                   # total nodes


def partition_function(measures: Sequence[BoxMeasures], qgrid: QGrid) -> PartitionTable:
    """Evaluate Z(q, eps) = sum_b mu_b^q in log space for every radius.

    Requires at least 4 radii with positive measures; raises
    ScalingRangeError otherwise.
    """
    if len(measures) < 4:
        raise ScalingRangeError(
            f"need at least 4 radii to estimate scaling, got {len(measures)}"
        )
    q = qgrid.values
    radii = np.array([m.radius for m in measures], dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise SpecError("radii must be strictly ascending")
    n = measures[0].n
    n_r = len(measures)
    log_z = np.empty((n_r, len(q)))
    log_z1 = np.empty(n_r)
    box_counts = np.empty(n_r, dtype=np.int64)
    info_sum = np.empty(n_r)
    log_n = np.log(float(n))
    for r, meas in enumerate(measures):
        if meas.n != n:
            raise SpecError("all measures must share the same node count")
        sizes = np.asarray(meas.sizes, dtype=float)
        if np.any(sizes <= 0):
            raise SpecError("box measures must be positive")
        log_mu = np.log(sizes) - log_n
        log_z[r] = logsumexp(q[:, None] * log_mu[None, :], axis=1)
        log_z1[r] = logsumexp(log_mu)
        box_counts[r] = len(sizes)
        mu = sizes / float(n)
        info_sum[r] = float(np.sum(mu * log_mu))
    return PartitionTable(
        radii=radii,
        log_eps=np.log(radii),
        q=q,
        log_z=log_z,
        box_counts=box_counts,
        log_z1=log_z1,
        info_sum=info_sum,
        n=n,
    )


@dataclass
class MassExponentFit:
    """Fitted mass exponents with per-q diagnostics and check values."""

    q: np.ndarray
    tau: np.ndarray
    stderr: np.ndarray
    r_squared: np.ndarray
    tau_q0: float           # slope of log(box count) ~ log eps; equals -D(0)
    tau_q1_check: float     # slope of the Z(1) check row; ~0 for a partition
    d1: float               # information dimension (dedicated estimator)
    d1_r_squared: float
    window: dict
    warnings: list = field(default_factory=list)


def _select_window(table: PartitionTable, fit_window) -> np.ndarray:
    """Radii between the lo and hi quantiles of log eps whose box count is
    strictly between 1 and n (saturated scales carry no scaling signal)."""
    lo, hi = fit_window
    if not (0.0 <= lo < hi <= 1.0):
        raise SpecError(f"fit window quantiles must satisfy 0 <= lo < hi <= 1, got {fit_window}")
    lo_edge, hi_edge = np.quantile(table.log_eps, [lo, hi])
    mask = (
        (table.log_eps >= lo_edge)
        & (table.log_eps <= hi_edge)
        & (table.box_counts > 1)
        & (table.box_counts < table.n)
    )
    return mask


def fit_mass_exponents(
    table: PartitionTable, fit_window=DEFAULT_FIT_WINDOW
) -> MassExponentFit:
    """Per-q OLS of log Z(q, eps) on log eps over the selected radius window.

    The window keeps radii whose log eps lies between the lo and hi quantile
    positions of the log-radius range and whose box count is strictly between
    1 and n (saturated scales destroy power-law scaling).  Requires >= 4
    surviving radii.  Low R^2 rows and tau shape violations are reported as
    warnings, not errors.
    """
    mask = _select_window(table, fit_window)
    n_used = int(mask.sum())
    if n_used < 4:
        raise ScalingRangeError(
            f"fit window keeps only {n_used} of {len(table.radii)} radii; "
            "need at least 4 for the scaling fit"
        )
    x = table.log_eps[mask]
    q = table.q
    tau = np.empty(len(q))
    stderr = np.empty(len(q))
    r_squared = np.empty(len(q))
    warnings = []
    for iq in range(len(q)):
        res = linregress(x, table.log_z[mask, iq])
        tau[iq] = res.slope
        stderr[iq] = res.stderr
        r_squared[iq] = res.rvalue**2
    low = np.flatnonzero(r_squared < R_SQUARED_WARN)
    if len(low):
        worst = low[np.argmin(r_squared[low])]
        warnings.append(
            f"R^2 < {R_SQUARED_WARN} on {len(low)} of {len(q)} q rows "
            f"(worst {r_squared[worst]:.3f} at q={q[worst]:g})"
        )
    res0 = linregress(x, np.log(table.box_counts[mask].astype(float)))
    res1 = linregress(x, table.log_z1[mask])
    res_info = linregress(x, table.info_sum[mask])

    if np.any(np.diff(tau) < -1e-6):
        warnings.append("fitted tau(q) is not non-decreasing (fit-quality warning)")
    slopes = np.diff(tau) / np.diff(q)
    if np.any(np.diff(slopes) > 1e-6):
        warnings.append("fitted tau(q) is not concave (fit-quality warning)")

    window = {
        "lo_quantile": float(fit_window[0]),
        "hi_quantile": float(fit_window[1]),
        "n_radii_used": n_used,
        "radius_min": float(table.radii[mask][0]),
        "radius_max": float(table.radii[mask][-1]),
    }
    return MassExponentFit(
        q=q,
        tau=tau,
        stderr=stderr,
        r_squared=r_squared,
        tau_q0=float(res0.slope),
        tau_q1_check=float(res1.slope),
        d1=float(res_info.slope),
        d1_r_squared=float(res_info.rvalue**2),
        window=window,
        warnings=warnings,
    )


def hurst_exponents(tau: np.ndarray, q: np.ndarray) -> np.ndarray:
    """H(q) = (tau(q) + 1) / q; q must not contain 0."""
    q = np.asarray(q, dtype=float)
    if np.any(np.abs(q) < _Q_TOL):
        raise SpecError("Hurst exponents are undefined at q = 0; exclude it from the grid")
    return (np.asarray(tau, dtype=float) + 1.0) / q


def generalized_dimensions(tau: np.ndarray, q: np.ndarray) -> np.ndarray:
    """D(q) = tau(q) / (q - 1); q must not contain 1 (D(1) has its own fit)."""
    q = np.asarray(q, dtype=float)
    if np.any(np.abs(q - 1.0) < _Q_TOL):
        raise SpecError("D(1) requires the information-dimension estimator; exclude q = 1")
    return np.asarray(tau, dtype=float) / (q - 1.0)


def legendre_spectrum(tau: np.ndarray, q: np.ndarray, sort: bool = True):
    """Singularity spectrum: alpha = dtau/dq (central differences), f = q*alpha - tau.

    With sort=True (default) the pair is returned ordered by ascending alpha;
    sort=False keeps alignment with the q grid.
    """
    q = np.asarray(q, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if len(q) < 3:
        raise SpecError(f"need at least 3 grid points for the spectrum, got {len(q)}")
    alpha = np.gradient(tau, q, edge_order=2)
    f = q * alpha - tau
    if sort:
        order = np.argsort(alpha, kind="stable")
        return alpha[order], f[order]
    return alpha, f


def specific_heat(tau: np.ndarray, q: np.ndarray) -> np.ndarray:
    """C(q) = -d^2 tau / dq^2 by central second differences on a uniform grid.

    Returns values at the interior points q[1:-1]; raises SpecError for a
    non-uniform grid.
    """
    q = np.asarray(q, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if len(q) < 3:
        raise SpecError(f"need at least 3 grid points for the specific heat, got {len(q)}")
    dq = np.diff(q)
    h = float(np.mean(dq))
    if np.any(np.abs(dq - h) > 1e-9 * max(1.0, abs(h))):
        raise SpecError("specific heat requires a uniformly spaced q grid")
    return -(tau[2:] - 2.0 * tau[1:-1] + tau[:-2]) / (h * h)


@dataclass(eq=False)
class MfaResult:
    """Full multifractal analysis of one network, with provenance."""

    q: np.ndarray
    tau: np.ndarray
    hurst: np.ndarray
    dims: np.ndarray
    alpha: np.ndarray
    f_alpha: np.ndarray
    d1: float
    heat_q: np.ndarray
    heat: np.ndarray
    radii: np.ndarray
    box_counts: np.ndarray
    log_eps: np.ndarray
    log_z: np.ndarray
    log_z1: np.ndarray
    fit: dict
    provenance: dict

    def d0(self) -> float:
        """Box-counting dimension read at the grid point nearest q = 0."""
        return float(self.dims[int(np.argmin(np.abs(self.q)))])

    def h_width(self) -> float:
        return float(np.max(self.hurst) - np.min(self.hurst))

    def alpha_width(self) -> float:
        return float(np.max(self.alpha) - np.min(self.alpha))

    def f_peak(self) -> float:
        return float(np.max(self.f_alpha))

    def to_dict(self) -> dict:
        return {
            "q": self.q.tolist(),
            "tau": self.tau.tolist(),
            "hurst": self.hurst.tolist(),
            "dims": self.dims.tolist(),
            "alpha": self.alpha.tolist(),
            "f_alpha": self.f_alpha.tolist(),
            "d1": self.d1,
            "heat_q": self.heat_q.tolist(),
            "heat": self.heat.tolist(),
            "radii": self.radii.tolist(),
            "box_counts": self.box_counts.tolist(),
            "log_eps": self.log_eps.tolist(),
            "log_z": self.log_z.tolist(),
            "log_z1": self.log_z1.tolist(),
            "fit": self.fit,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MfaResult":
        kwargs = {}
        array_fields = (
            "q", "tau", "hurst", "dims", "alpha", "f_alpha",
            "heat_q", "heat", "radii", "log_eps", "log_z", "log_z1",
        )
        for name in array_fields:
            kwargs[name] = np.asarray(data[name], dtype=float)
        kwargs["box_counts"] = np.asarray(data["box_counts"], dtype=np.int64)
        kwargs["d1"] = float(data["d1"])
        kwargs["fit"] = data["fit"]
        kwargs["provenance"] = data["provenance"]
        return cls(**kwargs)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_plot_csvs(result: MfaResult, directory) -> None:
    """Plot-ready CSV files: hurst, spectrum, heat, dims, scaling."""
    from pathlib import Path

    directory = Path(directory)

    with open(directory / "hurst.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q", "H"])
        for qv, hv in zip(result.q, result.hurst):
            w.writerow([_fmt(qv), _fmt(hv)])

    order = np.argsort(result.alpha, kind="stable")
    with open(directory / "spectrum.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "f"])
        for i in order:
            w.writerow([_fmt(result.alpha[i]), _fmt(result.f_alpha[i])])

    with open(directory / "heat.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q", "C"])
        for qv, cv in zip(result.heat_q, result.heat):
            w.writerow([_fmt(qv), _fmt(cv)])

    dim_rows = sorted(
        [(float(qv), float(dv)) for qv, dv in zip(result.q, result.dims)] + [(1.0, result.d1)]
    )
    with open(directory / "dims.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q", "D"])
        for qv, dv in dim_rows:
            w.writerow([_fmt(qv), _fmt(dv)])

    with open(directory / "scaling.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["log_eps"] + [f"q={qv:g}" for qv in result.q])
        for r in range(len(result.log_eps)):
            w.writerow([_fmt(result.log_eps[r])] + [_fmt(v) for v in result.log_z[r]])
