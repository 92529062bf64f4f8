"""Scans, derivative estimation, transition detection and contour grids.

Two kinds of non-analyticity appear in the Bell function of this model and
must be told apart:

  * a genuine critical point, where dB/dT diverges (logarithmically, since
    the backbone transition is of Onsager type) -- the local derivative peak
    keeps growing as the grid around it is refined;
  * a branch-crossing kink of the max function at N1 = N2, where dB/dT only
    jumps -- the peak saturates immediately under refinement.

detect_divergence operationalizes this with a sustained-growth test over
successive 2x refinements; detect_kink locates the crossing by root-finding
on N1 - N2 and labels it non-physical.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import decorated_model
from .bond_spectrum import ModelParams
from .decorated_model import Region
from .errors import NumericalFailure

AXIS_T = "T"
AXIS_J1 = "J1"

_MEASURE_FIELDS = {
    "b": lambda ms, cs: ms.b,
    "n1": lambda ms, cs: ms.n1,
    "n2": lambda ms, cs: ms.n2,
    "c": lambda ms, cs: ms.c,
    "q_xx": lambda ms, cs: cs.q_xx,
    "q_zz": lambda ms, cs: cs.q_zz,
    "q_mumu": lambda ms, cs: cs.q_mumu,
    "m_z": lambda ms, cs: cs.m_z,
    "ds_z": lambda ms, cs: cs.ds_z,
    "k_eff": lambda ms, cs: cs.k_eff,
}


def _field_getter(name: str):
    key = name.lower()
    key = {"dsz": "ds_z", "mz": "m_z", "qxx": "q_xx", "qzz": "q_zz",
           "qmumu": "q_mumu"}.get(key, key)
    try:
        return _MEASURE_FIELDS[key]
    except KeyError:
        raise ValueError(f"unknown field {name!r}; expected one of {sorted(_MEASURE_FIELDS)}") from None


@dataclass
class TransitionPoint:
    location: float
    uncertainty: float
    kind: str  # "CRITICAL" | "KINK" | "QPT-JUMP"


@dataclass
class ScanSeries:
    """Dense 1D evaluation along T or J1 with the other parameter fixed."""

    axis: str
    j: float
    delta: float
    fixed: float  # J1 when axis == "T", T when axis == "J1"
    x: np.ndarray
    measures: list
    correlators: list
    errors: list = field(default_factory=list)
    synthetic: Optional[dict] = None

    @classmethod
    def from_values(cls, x, **fields) -> "ScanSeries":
        """Wrap precomputed arrays (keyed by field name) as a series."""
        return cls(axis=AXIS_T, j=math.nan, delta=math.nan, fixed=math.nan,
                   x=np.asarray(x, dtype=float), measures=[], correlators=[],
                   synthetic={k.lower(): np.asarray(v, dtype=float)
                              for k, v in fields.items()})

    def field(self, name: str) -> np.ndarray:
        if self.synthetic is not None:
            try:
                return self.synthetic[name.lower()]
            except KeyError:
                raise ValueError(f"synthetic series has no field {name!r}") from None
        getter = _field_getter(name)
        out = np.full(len(self.x), np.nan)
        for i, (ms, cs) in enumerate(zip(self.measures, self.correlators)):
            if ms is not None:
                out[i] = getter(ms, cs)
        return out

    def evaluator(self, name: str) -> Callable[[float], float]:
        """Pointwise re-evaluation function for refinement passes."""
        if self.synthetic is not None:
            raise ValueError("synthetic series carry no evaluator; pass fn explicitly")
        getter = _field_getter(name)
        axis = self.axis
        j, delta, fixed = self.j, self.delta, self.fixed

        def fn(value: float) -> float:
            if axis == AXIS_T:
                p = ModelParams(j=j, delta=delta, j1=fixed)
                cs = decorated_model.correlators(p, value)
            else:
                p = ModelParams(j=j, delta=delta, j1=value)
                cs = decorated_model.correlators(p, fixed)
            return getter(decorated_model.measures_from_correlators(cs, p), cs)

        return fn


def scan(p: ModelParams, axis: str, lo: float, hi: float, step: float,
         t: Optional[float] = None) -> ScanSeries:
    """Evaluate measures and correlators on a uniform grid along one axis.

    For a T scan the fixed J1 is taken from `p`; for a J1 scan the fixed
    temperature must be passed as `t`.  Evaluation failures annotate the
    point and the scan continues.
    """
    if axis not in (AXIS_T, AXIS_J1):
        raise ValueError(f"axis must be {AXIS_T!r} or {AXIS_J1!r}")
    if not (lo < hi and step > 0):
        raise ValueError("need lo < hi and step > 0")
    if axis == AXIS_T and lo <= 0:
        raise ValueError("temperature scans require lo > 0")
    if axis == AXIS_J1:
        if t is None or not (math.isfinite(t) and t > 0):
            raise ValueError("J1 scans require a positive fixed temperature t")
        fixed = float(t)
    else:
        fixed = p.j1
    n = int(round((hi - lo) / step)) + 1
    x = lo + step * np.arange(n)
    series = ScanSeries(axis=axis, j=p.j, delta=p.delta, fixed=fixed,
                        x=x, measures=[], correlators=[])
    for xi in x:
        try:
            if axis == AXIS_T:
                pi, ti = p, float(xi)
            else:
                pi, ti = ModelParams(j=p.j, delta=p.delta, j1=float(xi)), fixed
            cs = decorated_model.correlators(pi, ti)
            ms = decorated_model.measures_from_correlators(cs, pi)
            series.measures.append(ms)
            series.correlators.append(cs)
        except (ValueError, NumericalFailure) as exc:
            series.measures.append(None)
            series.correlators.append(None)
            series.errors.append((len(series.measures) - 1, str(exc)))
    return series


def derivative(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Centered finite differences, one-sided at the ends."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValueError("need at least 3 points for a derivative estimate")
    out = np.empty_like(y)
    out[1:-1] = (y[2:] - y[:-2]) / (x[2:] - x[:-2])
    out[0] = (y[1] - y[0]) / (x[1] - x[0])
    out[-1] = (y[-1] - y[-2]) / (x[-1] - x[-2])
    return out


def series_derivative(series: ScanSeries, name: str) -> np.ndarray:
    return derivative(series.x, series.field(name))


def _clusters(indices):
    """Group sorted integer indices into maximal runs (gap <= 1)."""
    groups = []
    for i in indices:
        if groups and i - groups[-1][-1] <= 2:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def detect_divergence(series: ScanSeries, name: str, threshold_ratio: float = 8.0,
                      fn: Optional[Callable[[float], float]] = None,
                      refinements: int = 3, growth_min: float = 1.04):
    """Locate points where the derivative grows without bound under refinement.

    Candidates are grid points whose |derivative| exceeds threshold_ratio
    times the series median.  Each candidate is re-evaluated on 2x-refined
    local grids; it is confirmed only if the local derivative peak keeps
    growing by at least growth_min per refinement, which a bounded kink
    cannot do.  The peak statistic is the second-largest local |derivative|,
    which is insensitive to how close a grid point happens to land to the
    singularity.
    """
    x = series.x
    f = series.field(name)
    good = np.isfinite(f)
    if good.sum() < 5:
        return []
    d = derivative(x, f)
    ad = np.abs(d)
    med = float(np.nanmedian(ad))
    floor = 1e-9 * max(1.0, float(np.nanmax(np.abs(f))))
    cut = max(threshold_ratio * med, floor)
    flagged = [i for i in range(len(x)) if np.isfinite(ad[i]) and ad[i] > cut]
    if not flagged:
        return []
    if fn is None:
        fn = series.evaluator(name)

    results = []
    step0 = float(np.median(np.diff(x)))
    for group in _clusters(flagged):
        center = x[max(group, key=lambda i: ad[i])]
        peaks = [_local_peak(fn, float(center), step0)[0]]
        h = step0
        ok = True
        for _ in range(refinements):
            h *= 0.5
            peak, center = _local_peak(fn, float(center), h)
            if peak < peaks[-1] * 1.001:
                ok = False
                break
            peaks.append(peak)
        if ok and peaks[-1] >= peaks[0] * growth_min**refinements:
            results.append(TransitionPoint(location=float(center), uncertainty=h,
                                           kind="CRITICAL"))
    return results


def _local_peak(fn, center: float, h: float, half_window: int = 6):
    """Second-largest |centered derivative| on a window around center.

    Skips window points the evaluator rejects (e.g. nonpositive T)."""
    offsets = np.arange(-half_window, half_window + 1)
    xs, ys = [], []
    for off in offsets:
        xv = center + h * float(off)
        try:
            ys.append(fn(xv))
            xs.append(xv)
        except ValueError:
            continue
    xs = np.array(xs)
    ys = np.array(ys)
    if len(xs) < 4:
        raise NumericalFailure("refinement window collapsed")
    dd = np.abs(derivative(xs, ys)[1:-1])
    order = np.argsort(dd)
    peak = float(dd[order[-2]]) if len(dd) >= 2 else float(dd[order[-1]])
    new_center = float(xs[1:-1][order[-1]])
    return peak, new_center


def detect_sudden_change(series: ScanSeries, name: str, ratio: float = 10.0,
                         fn: Optional[Callable[[float], float]] = None,
                         window: int = 51, levels: int = 3):
    """Locate jumps of the field itself (first-order transitions).

    An interval is suspicious when its increment exceeds `ratio` times the
    local median increment.  Suspicious runs are refined by halving the step
    inside them; the jump is kept only if some refined increment still beats
    the original threshold (a smooth feature dilutes away).  The reported
    location is the point where half of the run's total variation has
    accumulated, which for an ideal step is the step interval itself.
    """
    x = series.x
    f = series.field(name)
    d = np.diff(f)
    ad = np.abs(d)
    n = len(ad)
    if n < 2:
        return []
    floor = 1e-12 * max(1.0, float(np.nanmax(np.abs(f))))
    half = max(2, window // 2)
    cuts = np.empty(n)
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        cuts[i] = max(ratio * float(np.nanmedian(ad[lo:hi])), floor)
    flagged = [i for i in range(n) if np.isfinite(ad[i]) and ad[i] > cuts[i]]
    if not flagged:
        return []
    if fn is None and (series.measures and any(m is not None for m in series.measures)):
        fn = series.evaluator(name)

    results = []
    for group in _clusters(flagged):
        lo_x, hi_x = float(x[group[0]]), float(x[group[-1] + 1])
        threshold = float(np.median([cuts[i] for i in group]))
        step = float(np.median(np.diff(x)))
        xs = x[group[0]:group[-1] + 2].astype(float)
        ys = f[group[0]:group[-1] + 2].copy()
        persists = True
        if fn is not None:
            for _ in range(levels):
                step *= 0.5
                xs = np.arange(lo_x, hi_x + 0.5 * step, step)
                ys = np.array([fn(float(v)) for v in xs])
                dd = np.abs(np.diff(ys))
                live = np.nonzero(dd > threshold)[0]
                if len(live) == 0:
                    persists = False
                    break
                lo_x, hi_x = float(xs[live[0]]), float(xs[live[-1] + 1])
        if not persists:
            continue
        dd = np.abs(np.diff(ys))
        mids = 0.5 * (xs[:-1] + xs[1:])
        cum = np.cumsum(dd)
        half_tv = 0.5 * cum[-1]
        loc = float(np.interp(half_tv, cum, mids))
        results.append(TransitionPoint(location=loc, uncertainty=step, kind="QPT-JUMP"))
    return results


def detect_kink(p: ModelParams, t_lo: float, t_hi: float, tol: float = 1e-6):
    """First crossing of the two Bell branches N1 = N2 on [t_lo, t_hi].

    The crossing produces a jump in dB/dT through the max function only; it
    is classified as non-physical (kind "KINK").  Returns None when the
    branch order never changes on the bracket.
    """
    if not (0 < t_lo < t_hi):
        raise ValueError("need 0 < t_lo < t_hi")

    def gap(t: float) -> float:
        ms = decorated_model.measures(p, t)
        return ms.n1 - ms.n2

    n_coarse = 129
    ts = np.linspace(t_lo, t_hi, n_coarse)
    vals = [gap(float(t)) for t in ts]
    bracket = None
    for i in range(n_coarse - 1):
        if vals[i] == 0.0:
            return TransitionPoint(float(ts[i]), tol, "KINK")
        if vals[i] * vals[i + 1] < 0:
            bracket = (float(ts[i]), float(ts[i + 1]))
            break
    if bracket is None:
        return None
    lo, hi = bracket
    flo = gap(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = gap(mid)
        if flo * fmid <= 0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return TransitionPoint(0.5 * (lo + hi), tol, "KINK")


def classify_region(p: ModelParams, t: float) -> Region:
    """Region label at a single point; see decorated_model.Region."""
    return decorated_model.measures(p, t).region


@dataclass
class ContourGrid:
    """Rectangular (T, J1) grid of measures.

    Cells are stored row-major with T as the row index: flat index
    i_t * len(j1_values) + i_j1."""

    t_values: np.ndarray
    j1_values: np.ndarray
    measures: list
    correlators: list
    errors: list = field(default_factory=list)

    def field(self, name: str) -> np.ndarray:
        getter = _field_getter(name)
        nt, nj = len(self.t_values), len(self.j1_values)
        out = np.full((nt, nj), np.nan)
        for it in range(nt):
            for ij in range(nj):
                ms = self.measures[it * nj + ij]
                cs = self.correlators[it * nj + ij]
                if ms is not None:
                    out[it, ij] = getter(ms, cs)
        return out

    def regions(self) -> np.ndarray:
        nt, nj = len(self.t_values), len(self.j1_values)
        out = np.empty((nt, nj), dtype=object)
        for it in range(nt):
            for ij in range(nj):
                ms = self.measures[it * nj + ij]
                out[it, ij] = None if ms is None else ms.region
        return out


def contour_grid(p: ModelParams, t_lo: float, t_hi: float, t_step: float,
                 j1_lo: float, j1_hi: float, j1_step: float) -> ContourGrid:
    """Evaluate the full measures set on a rectangular (T, J1) grid."""
    if not (0 < t_lo < t_hi and t_step > 0 and j1_lo < j1_hi and j1_step > 0):
        raise ValueError("invalid grid ranges")
    nt = int(round((t_hi - t_lo) / t_step)) + 1
    nj = int(round((j1_hi - j1_lo) / j1_step)) + 1
    t_values = t_lo + t_step * np.arange(nt)
    j1_values = j1_lo + j1_step * np.arange(nj)
    grid = ContourGrid(t_values=t_values, j1_values=j1_values,
                       measures=[], correlators=[])
    for t in t_values:
        for j1 in j1_values:
            pij = ModelParams(j=p.j, delta=p.delta, j1=float(j1))
            try:
                cs = decorated_model.correlators(pij, float(t))
                ms = decorated_model.measures_from_correlators(cs, pij)
                grid.measures.append(ms)
                grid.correlators.append(cs)
            except (ValueError, NumericalFailure) as exc:
                grid.measures.append(None)
                grid.correlators.append(None)
                grid.errors.append((len(grid.measures) - 1, str(exc)))
    return grid


# marching-squares case table: for each of the 16 corner signatures the edges
# crossed, as pairs; edges are 0: (00-01), 1: (01-11), 2: (11-10), 3: (10-00)
_MS_SEGMENTS = {
    0: [], 15: [],
    1: [(3, 0)], 14: [(3, 0)],
    2: [(0, 1)], 13: [(0, 1)],
    4: [(1, 2)], 11: [(1, 2)],
    8: [(2, 3)], 7: [(2, 3)],
    3: [(3, 1)], 12: [(3, 1)],
    6: [(0, 2)], 9: [(0, 2)],
    5: [(3, 0), (1, 2)],
    10: [(0, 1), (2, 3)],
}


def iso_lines(grid: ContourGrid, name: str, level: float):
    """Marching-squares iso-line segments of a grid field at a given level.

    Returns a list of ((t1, j1_1), (t2, j1_2)) segments.  The saddle cases
    are resolved by the cell-center average.
    """
    f = grid.field(name)
    ts, js = grid.t_values, grid.j1_values
    segments = []
    for it in range(len(ts) - 1):
        for ij in range(len(js) - 1):
            corners = (f[it, ij], f[it, ij + 1], f[it + 1, ij + 1], f[it + 1, ij])
            if any(not np.isfinite(c) for c in corners):
                continue
            code = sum(1 << k for k, c in enumerate(corners) if c > level)
            if code in (5, 10):
                center = sum(corners) / 4.0
                code = {5: (5 if center > level else 10),
                        10: (10 if center > level else 5)}[code]
            pts = {
                0: _interp_edge(ts[it], js[ij], ts[it], js[ij + 1], corners[0], corners[1], level),
                1: _interp_edge(ts[it], js[ij + 1], ts[it + 1], js[ij + 1], corners[1], corners[2], level),
                2: _interp_edge(ts[it + 1], js[ij + 1], ts[it + 1], js[ij], corners[2], corners[3], level),
                3: _interp_edge(ts[it + 1], js[ij], ts[it], js[ij], corners[3], corners[0], level),
            }
            for e1, e2 in _MS_SEGMENTS[code]:
                segments.append((pts[e1], pts[e2]))
    return segments


def _interp_edge(t1, j1, t2, j2, f1, f2, level):
    if f2 == f1:
        frac = 0.5
    else:
        frac = min(1.0, max(0.0, (level - f1) / (f2 - f1)))
    return (float(t1 + frac * (t2 - t1)), float(j1 + frac * (j2 - j1)))
