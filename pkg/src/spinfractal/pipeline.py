"""End-to-end analysis pipeline and batch sweeps.

analyze_network drives spec -> Hamiltonian -> distance matrix -> coverings
-> partition function -> fitted exponents and spectra, returning an
MfaResult whose provenance (spec + options + versions) is sufficient to
reproduce it byte-for-byte.  run_sweep applies one option set to a list of
named specs, isolating per-network failures in the summary rather than
aborting.

The specific heat needs a uniformly spaced tau(q); since the estimation grid
excludes q = 0 and q = 1, tau is re-assembled on the full uniform grid using
the box-count check row for tau(0) and the identity tau(1) = 0 before the
second difference is taken.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .box_cover import box_measures, greedy_cover, kernel_backend, radius_grid
from .errors import (
    ResultFormatError,
    SchemaVersionError,
    SpecError,
    SpinFractalError,
)
from .itf_metric import DistanceMatrix, distance_matrix, identify_zero_pairs
from .multifractal import (
    DEFAULT_FIT_WINDOW,
    DEFAULT_Q_MAX,
    DEFAULT_Q_MIN,
    DEFAULT_Q_STEP,
    MfaResult,
    QGrid,
    _Q_TOL,
    fit_mass_exponents,
    generalized_dimensions,
    hurst_exponents,
    legendre_spectrum,
    partition_function,
    regular_grid,
    specific_heat,
    write_plot_csvs,
)
from .spin_network import (
    HEISENBERG_DIAGONAL_CONVENTION,
    NetworkSpec,
    build_network,
)

SCHEMA_VERSION = 1
AUTO_SUBSAMPLE_ABOVE_N = 360
AUTO_MAX_RADII = 64


@dataclass(frozen=True)
class AnalysisOptions:
    """Tolerances, grids and parallelism for one analysis run."""

    degeneracy_tol: float = 1e-10
    identify: bool = False
    merge_tol: float = 1e-9
    max_radii: Optional[int] = None  # None = auto (64 radii when n > 360); 0 = no cap
    q_min: float = DEFAULT_Q_MIN
    q_max: float = DEFAULT_Q_MAX
    q_step: float = DEFAULT_Q_STEP
    fit_lo: float = DEFAULT_FIT_WINDOW[0]
    fit_hi: float = DEFAULT_FIT_WINDOW[1]
    workers: int = 1

    def __post_init__(self):
        if self.degeneracy_tol <= 0:
            raise SpecError(f"degeneracy_tol must be > 0, got {self.degeneracy_tol}")
        if self.merge_tol < 0:
            raise SpecError(f"merge_tol must be >= 0, got {self.merge_tol}")
        if self.max_radii is not None and self.max_radii != 0 and self.max_radii < 4:
            raise SpecError(f"max_radii must be 0 (no cap) or >= 4, got {self.max_radii}")
        if self.q_step <= 0 or self.q_max <= self.q_min:
            raise SpecError("q grid requires q_step > 0 and q_min < q_max")
        if not (0.0 <= self.fit_lo < self.fit_hi <= 1.0):
            raise SpecError(
                f"fit window quantiles must satisfy 0 <= lo < hi <= 1, "
                f"got ({self.fit_lo}, {self.fit_hi})"
            )
        if self.workers < 1:
            raise SpecError(f"workers must be >= 1, got {self.workers}")

    def resolved_max_radii(self, n: int) -> Optional[int]:
        if self.max_radii is not None:
            return None if self.max_radii == 0 else self.max_radii
        return AUTO_MAX_RADII if n > AUTO_SUBSAMPLE_ABOVE_N else None

    def qgrid(self) -> QGrid:
        return QGrid.regular(self.q_min, self.q_max, self.q_step)

    def to_dict(self) -> dict:
        return {
            "degeneracy_tol": self.degeneracy_tol,
            "identify": self.identify,
            "merge_tol": self.merge_tol,
            "max_radii": self.max_radii,
            "q_min": self.q_min,
            "q_max": self.q_max,
            "q_step": self.q_step,
            "fit_lo": self.fit_lo,
            "fit_hi": self.fit_hi,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisOptions":
        allowed = {
            "degeneracy_tol", "identify", "merge_tol", "max_radii",
            "q_min", "q_max", "q_step", "fit_lo", "fit_hi", "workers",
        }
        unknown = set(data) - allowed
        if unknown:
            raise SpecError(f"unknown analysis option fields: {sorted(unknown)}")
        return cls(**data)


def _tagged(stage: str, exc: SpinFractalError) -> SpinFractalError:
    return type(exc)(f"[{stage}] {exc}")


def _tau_on_full_grid(full_q: np.ndarray, q: np.ndarray, tau: np.ndarray,
                      tau_q0: float) -> np.ndarray:
    """Re-assemble tau on the uniform grid, filling q=0 and q=1 holes."""
    tau_full = np.empty(len(full_q))
    j = 0
    for i, qv in enumerate(full_q):
        if abs(qv) < _Q_TOL:
            tau_full[i] = tau_q0
        elif abs(qv - 1.0) < _Q_TOL:
            tau_full[i] = 0.0  # Z(1, eps) = 1 identically for a disjoint covering
        else:
            tau_full[i] = tau[j]
            j += 1
    if j != len(tau):
        raise SpecError("q grid does not match the uniform grid it was derived from")
    return tau_full


def compute_coverings(dist: DistanceMatrix, radii: np.ndarray, workers: int = 1):
    """Greedy coverings for each radius, in radius order.

    Radii are independent; with workers > 1 they are covered concurrently
    (the compiled kernel releases the GIL).  Output order and content do not
    depend on the worker count.
    """
    if workers <= 1:
        return [greedy_cover(dist, float(eps)) for eps in radii]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda eps: greedy_cover(dist, float(eps)), radii))


def analyze_distance_matrix(dist: DistanceMatrix, opts: AnalysisOptions,
                            provenance_spec: Optional[dict] = None) -> MfaResult:
    """Multifractal analysis of an existing distance matrix."""
    start = time.perf_counter()
    timings = {}

    try:
        grid = radius_grid(dist, opts.resolved_max_radii(dist.n))
    except SpinFractalError as exc:
        raise _tagged("radius-grid", exc) from exc
    timings["radius_grid"] = time.perf_counter() - start

    t0 = time.perf_counter()
    try:
        covers = compute_coverings(dist, grid.radii, opts.workers)
        measures = [box_measures(c, dist.n) for c in covers]
    except SpinFractalError as exc:
        raise _tagged("covering", exc) from exc
    timings["covering"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    qgrid = opts.qgrid()
    try:
        table = partition_function(measures, qgrid)
        fit = fit_mass_exponents(table, (opts.fit_lo, opts.fit_hi))
    except SpinFractalError as exc:
        raise _tagged("scaling-fit", exc) from exc
    timings["partition_fit"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        q = qgrid.values
        hurst = hurst_exponents(fit.tau, q)
        dims = generalized_dimensions(fit.tau, q)
        alpha, f_alpha = legendre_spectrum(fit.tau, q, sort=False)
        full_q = regular_grid(opts.q_min, opts.q_max, opts.q_step)
        tau_full = _tau_on_full_grid(full_q, q, fit.tau, fit.tau_q0)
        heat = specific_heat(tau_full, full_q)
        heat_q = full_q[1:-1]
    except SpinFractalError as exc:
        raise _tagged("spectra", exc) from exc
    timings["spectra"] = time.perf_counter() - t0

    fit_dict = {
        "stderr": fit.stderr.tolist(),
        "r_squared": fit.r_squared.tolist(),
        "tau_q0": fit.tau_q0,
        "tau_q1_check": fit.tau_q1_check,
        "d1_r_squared": fit.d1_r_squared,
        "window": fit.window,
        "warnings": list(fit.warnings),
    }
    provenance = {
        "schema": "spinfractal.mfa",
        "spec": provenance_spec,
        "options": opts.to_dict(),
        "version": __version__,
        "kernel": kernel_backend(),
        "radius_grid_source": grid.source,
        "conventions": {
            "log_base": "e",
            "indexing": "1-based",
            "heisenberg_diagonal": HEISENBERG_DIAGONAL_CONVENTION,
            "distance_metadata": {
                k: v for k, v in dist.metadata.items() if k != "spec"
            },
        },
    }
    result = MfaResult(
        q=q,
        tau=fit.tau,
        hurst=hurst,
        dims=dims,
        alpha=alpha,
        f_alpha=f_alpha,
        d1=fit.d1,
        heat_q=heat_q,
        heat=heat,
        radii=grid.radii,
        box_counts=table.box_counts,
        log_eps=table.log_eps,
        log_z=table.log_z,
        log_z1=table.log_z1,
        fit=fit_dict,
        provenance=provenance,
    )
    timings["total"] = time.perf_counter() - start
    result.timings = timings  # advisory; not persisted (results must be reproducible)
    return result


def analyze_network(spec: NetworkSpec, opts: AnalysisOptions = AnalysisOptions()) -> MfaResult:
    """Full pipeline: spec -> Hamiltonian -> distances -> multifractal result."""
    t0 = time.perf_counter()
    try:
        ham = build_network(spec)
    except SpinFractalError as exc:
        raise _tagged("build", exc) from exc
    try:
        dist = distance_matrix(ham, opts.degeneracy_tol)
        if opts.identify:
            dist = identify_zero_pairs(dist, opts.merge_tol)
    except SpinFractalError as exc:
        raise _tagged("distances", exc) from exc
    dist_seconds = time.perf_counter() - t0

    result = analyze_distance_matrix(dist, opts, provenance_spec=spec.to_dict())
    result.timings["distances"] = dist_seconds
    result.timings["total"] += dist_seconds
    return result


# ---------------------------------------------------------------------------
# persistence

RESULT_FIELDS = (
    "q", "tau", "hurst", "dims", "alpha", "f_alpha", "d1", "heat_q", "heat",
    "radii", "box_counts", "log_eps", "log_z", "log_z1", "fit", "provenance",
)


def result_to_json(result: MfaResult) -> str:
    """Canonical JSON text for a result (deterministic byte-for-byte)."""
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update(result.to_dict())
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def write_result(result: MfaResult, directory) -> Path:
    """Write result.json plus the plot CSVs into a directory; returns it."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "result.json").write_text(result_to_json(result), encoding="utf-8")
    write_plot_csvs(result, directory)
    return directory


def read_result(path) -> MfaResult:
    """Load a result from result.json (or from its directory)."""
    path = Path(path)
    if path.is_dir():
        path = path / "result.json"
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ResultFormatError(
            f"{path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if "schema_version" not in doc:
        raise ResultFormatError(f"{path}: missing field 'schema_version'")
    if doc["schema_version"] > SCHEMA_VERSION:
        raise SchemaVersionError(
            f"{path}: schema version {doc['schema_version']} is newer than "
            f"supported version {SCHEMA_VERSION}"
        )
    for name in RESULT_FIELDS:
        if name not in doc:
            raise ResultFormatError(f"{path}: missing field '{name}'")
    return MfaResult.from_dict(doc)


def reanalyze(result: MfaResult) -> MfaResult:
    """Re-run an analysis from a result's own provenance."""
    prov = result.provenance
    if not prov.get("spec"):
        raise SpecError("result provenance carries no network spec to re-run")
    spec = NetworkSpec.from_dict(prov["spec"])
    opts = AnalysisOptions.from_dict(prov["options"])
    return analyze_network(spec, opts)


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class SweepEntry:
    name: str
    spec: NetworkSpec


@dataclass(frozen=True)
class SweepSpec:
    """A batch of named network specs analyzed with shared options."""

    entries: tuple
    options: AnalysisOptions = field(default_factory=AnalysisOptions)
    out_dir: Path = Path("sweep-out")

    def __post_init__(self):
        if len(self.entries) == 0:
            raise SpecError("sweep needs at least one network spec")
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SpecError(f"sweep entry names must be distinct; repeated: {dupes}")
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "out_dir", Path(self.out_dir))

    def to_dict(self) -> dict:
        return {
            "entries": [
                {"name": e.name, "spec": e.spec.to_dict()} for e in self.entries
            ],
            "options": self.options.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict, out_dir) -> "SweepSpec":
        allowed = {"entries", "options"}
        unknown = set(data) - allowed
        if unknown:
            raise SpecError(f"unknown sweep fields: {sorted(unknown)}")
        if "entries" not in data or not isinstance(data["entries"], list):
            raise SpecError("sweep file needs an 'entries' list")
        entries = []
        for raw in data["entries"]:
            if not isinstance(raw, dict) or "spec" not in raw:
                raise SpecError("each sweep entry needs a 'spec' object")
            spec = NetworkSpec.from_dict(raw["spec"])
            entries.append(SweepEntry(name=raw.get("name", spec.name()), spec=spec))
        options = AnalysisOptions.from_dict(data.get("options", {}))
        return cls(entries=tuple(entries), options=options, out_dir=out_dir)


SUMMARY_COLUMNS = ("name", "n", "profile", "bias", "d0", "h_width", "alpha_width",
                   "f_peak", "error")


def _summary_row(entry: SweepEntry, result: Optional[MfaResult], error: str) -> dict:
    spec = entry.spec
    row = {
        "name": entry.name,
        "n": spec.n,
        "profile": spec.coupling_profile,
        "bias": spec.bias.magnitude if spec.bias is not None else "",
        "d0": "",
        "h_width": "",
        "alpha_width": "",
        "f_peak": "",
        "error": error,
    }
    if result is not None:
        row.update(
            d0=format(result.d0(), ".17g"),
            h_width=format(result.h_width(), ".17g"),
            alpha_width=format(result.alpha_width(), ".17g"),
            f_peak=format(result.f_peak(), ".17g"),
        )
    return row


def _run_sweep_entry(args) -> dict:
    name, spec_dict, opts_dict, out_dir = args
    entry = SweepEntry(name=name, spec=NetworkSpec.from_dict(spec_dict))
    opts = AnalysisOptions.from_dict(opts_dict)
    try:
        result = analyze_network(entry.spec, opts)
        write_result(result, Path(out_dir) / name)
        return _summary_row(entry, result, "")
    except SpinFractalError as exc:
        return _summary_row(entry, None, str(exc))


def run_sweep(sweep: SweepSpec) -> list:
    """Analyze every entry, write per-entry result dirs and summary.csv.

    Per-entry failures are recorded in their summary row; they never abort
    the sweep.  Returns the summary rows in entry order.
    """
    out_dir = Path(sweep.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    probe = out_dir / ".write-probe"
    probe.write_text("")  # fail fast (before any analysis) if unwritable
    probe.unlink()

    tasks = [
        (e.name, e.spec.to_dict(), sweep.options.to_dict(), str(out_dir))
        for e in sweep.entries
    ]
    if sweep.options.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=sweep.options.workers) as pool:
            rows = list(pool.map(_run_sweep_entry, tasks))
    else:
        rows = [_run_sweep_entry(t) for t in tasks]

    with open(out_dir / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return rows


# ---------------------------------------------------------------------------
# presets: the chain/ring families and bias scans used in the study

def _chains(sizes, profile="uniform"):
    return [NetworkSpec("chain", n, coupling_profile=profile) for n in sizes]


def _biased_rings(n, node, magnitudes):
    from .spin_network import Bias

    return [
        NetworkSpec("ring", n, bias=Bias(node=node, magnitude=float(b)))
        for b in magnitudes
    ]


def _preset_specs():
    presets = {
        "fig3a": ("uniform chains, n = 100..150",
                  _chains([100, 102, 106, 108, 112, 126, 130, 136, 138, 148, 150])),
        "fig3d": ("uniform chains, n = 700..796",
                  _chains([700, 708, 718, 726, 732, 738, 742, 750, 756, 760, 768, 772, 786, 796])),
        "fig4": ("uniform vs engineered chains at matched sizes",
                 _chains([105, 505, 506, 106, 508, 700, 545, 555, 581], "uniform")
                 + _chains([105, 505, 506, 106, 508, 700, 545, 555, 581], "engineered")),
        "fig5a": ("uniform chains with strongly nonlinear H(q), n = 105..149",
                  _chains([105, 115, 119, 129, 149])),
        "fig5c": ("uniform rings, n = 100..148",
                  [NetworkSpec("ring", n) for n in [100, 108, 112, 136, 148]]),
        "fig5e": ("uniform rings, n = 102..140",
                  [NetworkSpec("ring", n) for n in [102, 126, 130, 138, 140]]),
        "fig5f": ("uniform rings, n = 102..150",
                  [NetworkSpec("ring", n) for n in [102, 106, 126, 130, 138, 140, 150]]),
        "fig6a": ("ring n=102, bias 0..10 at node 100",
                  _biased_rings(102, 100, range(0, 11))),
        "fig6b": ("ring n=102, bias {0,2,3,4,6,8,10} at node 100",
                  _biased_rings(102, 100, [0, 2, 3, 4, 6, 8, 10])),
        "fig6c": ("ring n=102, bias {0,5,10,20,50,100} at node 100",
                  _biased_rings(102, 100, [0, 5, 10, 20, 50, 100])),
        "fig6e": ("ring n=500, bias {0,1,5,10,50,100} at node 100",
                  _biased_rings(500, 100, [0, 1, 5, 10, 50, 100])),
    }
    return presets


def preset_names() -> list:
    return sorted(_preset_specs())


def preset_description(name: str) -> str:
    presets = _preset_specs()
    if name not in presets:
        raise SpecError(f"unknown preset {name!r}; available: {', '.join(sorted(presets))}")
    return presets[name][0]


def preset_sweep(name: str, out_dir, options: Optional[AnalysisOptions] = None) -> SweepSpec:
    """SweepSpec for a bundled preset; raises SpecError for unknown names."""
    presets = _preset_specs()
    if name not in presets:
        raise SpecError(f"unknown preset {name!r}; available: {', '.join(sorted(presets))}")
    _, specs = presets[name]
    entries = tuple(SweepEntry(name=s.name(), spec=s) for s in specs)
    return SweepSpec(entries=entries, options=options or AnalysisOptions(), out_dir=out_dir)
