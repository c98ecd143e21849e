"""Critical exponents, phase boundaries and phase-diagram sweeps."""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import os

import numpy as np

from .errors import DickeFluxError, InvalidParameters, PoorFit
from .gaussian import build_quadratic, fluctuation_gap, observables, symplectic_diagonalize
from .meanfield import ConfigClass, classify, first_order_boundary, minimize
from .model import critical_mode, momentum_grid
from .npspectrum import bogoliubov_block, np_gap, np_spectrum_quartic_pair

__all__ = [
    "ScalingFit",
    "PhaseCell",
    "MulticriticalReport",
    "FirstOrderLine",
    "fit_exponent",
    "fit_log_divergence",
    "locate_gc",
    "critical_point",
    "offsets",
    "gap_series",
    "mode_gap_series",
    "observable_series",
    "trace_continuous_boundary",
    "boundary_kinks",
    "multicritical_report",
    "classify_cell",
    "phase_diagram",
    "first_order_lines",
]

DEFAULT_WINDOW = (1e-6, 1e-4)
DEFAULT_POINTS = 24
DEFAULT_DPS = 60


@dataclass(frozen=True)
class ScalingFit:
    """Power-law fit ``value ~ prefactor * |g - g_c|^(+-exponent)``.

    Attributes
    ----------
    exponent : float
        Fitted exponent; for divergent quantities the sign is flipped so the
        exponent is positive.  For logarithmic fits it is the coefficient of
        ``ln(1/|g - g_c|)``.
    prefactor : float
    window : (float, float)
        Range of ``|g - g_c|`` actually fitted.
    r_squared : float
    side : str
        ``"below"`` or ``"above"``.
    g_c : float
    n_points : int
    """

    exponent: float
    prefactor: float
    window: tuple
    r_squared: float
    side: str
    g_c: float
    n_points: int = 0

    def as_dict(self):
        """JSON-ready mapping."""
        return {"exponent": self.exponent, "prefactor": self.prefactor,
                "r2": self.r_squared, "window_lo": self.window[0],
                "window_hi": self.window[1], "side": self.side, "g_c": self.g_c}


def _prepare(series, g_c):
    pts = [(abs(g - g_c), v) for g, v in series if np.isfinite(v) and g != g_c]
    if len(pts) < 12:
        raise InvalidParameters(f"fit needs >= 12 finite points, got {len(pts)}")
    d = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.log10(d.max() / d.min()) < 2 - 1e-9:
        raise InvalidParameters("fit window must span at least two decades")
    return d, v


def _linfit(x, y):
    a = np.vstack([x, np.ones_like(x)]).T
    (slope, icept), *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - (slope * x + icept)
    tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / tot if tot > 0 else 1.0
    return slope, icept, r2


def fit_exponent(series, g_c, side, divergent=False, min_r2=0.999):
    """Least-squares slope of ``ln value`` against ``ln |g - g_c|``.

    Parameters
    ----------
    series : sequence of (g, value)
        Non-finite values (flagged divergences) are dropped.
    g_c : float
    side : {"below", "above"}
    divergent : bool
        Report ``-slope`` for quantities that grow towards ``g_c``.
    min_r2 : float

    Raises
    ------
    PoorFit
        If ``r^2 < min_r2``; the rejected fit is attached.
    """
    d, v = _prepare(series, g_c)
    if np.any(v <= 0):
        raise InvalidParameters("power-law fit needs positive values")
    slope, icept, r2 = _linfit(np.log(d), np.log(v))
    fit = ScalingFit(float(-slope if divergent else slope), float(np.exp(icept)),
                     (float(d.min()), float(d.max())), float(r2), side, float(g_c), len(d))
    if r2 < min_r2:
        raise PoorFit(f"r^2 = {r2:.6f} below {min_r2}", fit)
    return fit


def fit_log_divergence(series, g_c, side, min_r2=0.999):
    """Fit ``value = nu * ln(1/|g - g_c|) + c`` and report ``nu``.

    Suited to block entropies, which grow logarithmically where the photon
    number grows as a power law.

    Raises
    ------
    PoorFit
        If ``r^2 < min_r2``.
    """
    d, v = _prepare(series, g_c)
    slope, icept, r2 = _linfit(-np.log(d), v)
    fit = ScalingFit(float(slope), float(icept), (float(d.min()), float(d.max())),
                     float(r2), side, float(g_c), len(d))
    if r2 < min_r2:
        raise PoorFit(f"r^2 = {r2:.6f} below {min_r2}", fit)
    return fit


def _np_stable(params):
    grid = momentum_grid(params.n_sites)
    for j in grid.pair_indices():
        m = bogoliubov_block(params, grid.values[j]).matrix_m
        if np.linalg.eigvalsh(m)[0] <= 0:
            return False
    return True


def locate_gc(params, tol=1e-10):
    """Coupling at which the normal phase loses stability, by bisection.

    The normal phase is stable while every Bogoliubov matrix is positive
    definite, i.e. while every excitation energy is positive.
    """
    lo, hi = 0.0, 1.0
    while _np_stable(params.replace(g=hi)):
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _np_stable(params.replace(g=mid)):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_point(params, tol=1e-9):
    """Critical coupling checked against the bisected instability.

    Returns the closed-form value after verifying that it agrees with
    :func:`locate_gc` to ``tol``.

    Raises
    ------
    DickeFluxError
        If the two disagree.
    """
    gc = critical_mode(params).g_c
    gb = locate_gc(params)
    if abs(gc - gb) > tol:
        raise DickeFluxError(f"closed-form g_c={gc!r} but bisection gives {gb!r}")
    return gc


def offsets(window=DEFAULT_WINDOW, points=DEFAULT_POINTS):
    """Relative offsets ``|g - g_c| / g_c``, log-spaced and descending."""
    return np.logspace(np.log10(window[1]), np.log10(window[0]), points)


def _couplings(params, side, window, points):
    gc = critical_point(params)
    sgn = -1.0 if side == "below" else 1.0
    if side not in ("below", "above"):
        raise InvalidParameters(f"side must be 'below' or 'above', not {side!r}")
    return gc, [gc * (1 + sgn * d) for d in offsets(window, points)]


def _above_states(params, gc, gs, dps):
    """Continuation of the superradiant minimiser towards ``g_c``.

    Each point starts from the previous minimiser rescaled by the
    square-root law of the order parameter.
    """
    prev = None
    for g in gs:
        p = params.replace(g=g)
        if prev is None:
            st = minimize(p, restarts=8, seed=0, dps=dps)
        else:
            ratio = np.sqrt((g - gc) / (prev[0] - gc))
            start = [v * ratio for v in (prev[1].x_hp if dps else prev[1].x)]
            st = minimize(p, start=start, dps=dps) if dps else minimize(p, restarts=8)
        prev = (g, st)
        yield p, st



def gap_series(params, side, window=DEFAULT_WINDOW, points=DEFAULT_POINTS, dps=DEFAULT_DPS):
    """Excitation gap on a log-spaced approach to ``g_c``.

    Below ``g_c`` the gap is the smallest normal-phase energy.  Above it
    the minimiser is continued from the farthest point inwards and the
    fluctuation gap is evaluated at ``dps`` digits (``None`` for double
    precision).

    Returns
    -------
    g_c : float
    series : list of (float, float)
    """
    gc, gs = _couplings(params, side, window, points)
    if side == "below":
        return gc, [(g, np_gap(params.replace(g=g))) for g in gs]
    out = []
    for p, st in _above_states(params, gc, gs, dps):
        out.append((p.g, fluctuation_gap(build_quadratic(p, st, dps=dps))))
    return gc, out


def mode_gap_series(params, j, window=DEFAULT_WINDOW, points=DEFAULT_POINTS):
    """Smallest energy of the pair ``{k_j, -k_j}`` approaching ``g_c`` from below."""
    gc, gs = _couplings(params, "below", window, points)
    k = momentum_grid(params.n_sites).values[j]
    out = []
    for g in gs:
        e = np_spectrum_quartic_pair(params.replace(g=g), k)
        out.append((g, float(np.min(e))))
    return gc, out


def observable_series(params, side, window=DEFAULT_WINDOW, points=DEFAULT_POINTS,
                      dps=DEFAULT_DPS):
    """Per-site photon numbers and block entropies approaching ``g_c``.

    Returns
    -------
    g_c : float
    series : list of (float, SiteObservables)
    """
    gc, gs = _couplings(params, side, window, points)
    out = []
    if side == "below":
        for g in gs:
            p = params.replace(g=g)
            st = minimize(p, dps=dps)
            out.append((g, observables(symplectic_diagonalize(build_quadratic(p, st, dps)))))
        return gc, out
    for p, st in _above_states(params, gc, gs, dps):
        out.append((p.g, observables(symplectic_diagonalize(build_quadratic(p, st, dps)))))
    return gc, out


def trace_continuous_boundary(params, theta_grid):
    """Critical coupling and critical momentum index along a flux grid.

    Returns
    -------
    list of (float, float, int)
        ``(theta, g_c, j)``.
    """
    out = []
    for th in theta_grid:
        cm = critical_mode(params.replace(theta=float(th)))
        out.append((float(th), cm.g_c, cm.index))
    return out


def boundary_kinks(trace):
    """Flux intervals where the critical momentum index changes.

    Returns
    -------
    list of (float, float, int, int)
        ``(theta_left, theta_right, j_left, j_right)``.
    """
    return [(a[0], b[0], a[2], b[2]) for a, b in zip(trace[:-1], trace[1:]) if a[2] != b[2]]


@dataclass(frozen=True)
class MulticriticalReport:
    """Characterisation of a flux critical point.

    Attributes
    ----------
    theta_c, g_c : float
    kind : str
        ``"i"`` when the zero-momentum sector is involved, ``"ii"``
        otherwise.
    modes : tuple of int
        Momentum indices of the simultaneously critical sectors.
    fits : dict
        ``{j: ScalingFit}`` of each sector's gap below ``g_c``.
    expected : tuple of float
        Exponents anticipated for this kind, sorted.
    consistent : bool
        Fitted exponents within ``tol`` of ``expected``.
    boundary_offsets : tuple of float
        Distance from ``theta_c`` of the nearest first-order boundary at
        each probed coupling above ``g_c``.
    terminates : bool
        The first-order boundary approaches ``theta_c`` as ``g -> g_c``.
    """

    theta_c: float
    g_c: float
    kind: str
    modes: tuple
    fits: dict = field(repr=False)
    expected: tuple = ()
    consistent: bool = False
    boundary_offsets: tuple = ()
    terminates: bool = False

    @property
    def exponents(self):
        """Sorted fitted exponents."""
        return tuple(sorted(f.exponent for f in self.fits.values()))


def multicritical_report(params, theta_c, window=(1e-6, 1e-3), points=DEFAULT_POINTS,
                         tol=0.05, g_offsets=(0.05, 0.01), span=0.25):
    """Exponents of both critical sectors at a flux critical point.

    The two sectors whose critical couplings tie at ``theta_c`` are fitted
    separately; a zero-momentum sector closes as ``|g - g_c|^(1/2)``, any
    other sector linearly.  The first-order boundary is located at
    couplings ``g_c (1 + offset)`` within ``span`` of ``theta_c`` to check
    that it ends at the multicritical point.
    """
    p = params.replace(theta=float(theta_c))
    cm = critical_mode(p, tie_tol=1e-8)
    if not cm.degenerate:
        raise InvalidParameters(f"theta={theta_c} is not a flux critical point")
    modes = tuple(sorted(cm.tied))
    fits = {}
    for j in modes:
        gc, series = mode_gap_series(p, j, window, points)
        fits[j] = fit_exponent(series, gc, "below")
    kind = "i" if 0 in modes else "ii"
    expected = (0.5, 1.0) if kind == "i" else (1.0, 1.0)
    got = tuple(sorted(f.exponent for f in fits.values()))
    consistent = all(abs(a - b) <= tol for a, b in zip(got, expected))
    dists = []
    for off in g_offsets:
        bnd = first_order_boundary(p, cm.g_c * (1 + off),
                                   (max(theta_c - span, 1e-3), min(theta_c + span, np.pi - 1e-3)),
                                   steps=64)
        dists.append(min((abs(b[0] - theta_c) for b in bnd), default=np.inf))
    terminates = bool(np.isfinite(dists[-1]) and dists[-1] <= dists[0] + 1e-6
                      and dists[-1] < span / 4)
    return MulticriticalReport(float(theta_c), cm.g_c, kind, modes, fits, expected,
                               bool(consistent), tuple(dists), terminates)


@dataclass(frozen=True)
class PhaseCell:
    """Classified point of the phase diagram.

    Attributes
    ----------
    theta, g : float
    label : str
        ``NP``, ``ANP``, ``SP`` or ``FSP``.
    critical_k : int
        Index ``j`` of the critical momentum ``k_j``.
    gap : float
    energy : float
        Mean-field energy.
    config : ConfigClass
    observables : SiteObservables or None
    error : str or None
        Failure description; the other fields are then best effort.
    """

    theta: float
    g: float
    label: str
    critical_k: int
    gap: float
    energy: float
    config: ConfigClass
    observables: object = None
    error: str = None


def classify_cell(params, restarts=4, seed=0, with_observables=False):
    """Classify one point of the ``(theta, g)`` plane.

    Below ``g_c`` the normal-phase spectrum is used; above it the
    mean-field minimiser, its sign class and the fluctuation spectrum.
    Errors are captured in ``PhaseCell.error`` instead of propagating.
    """
    cm = critical_mode(params)
    n = params.n_sites
    normal_label = "NP" if cm.index == 0 else "ANP"
    zeros = (0,) * n
    normal_cfg = ConfigClass(zeros, 0, 1, False, zeros)
    try:
        if params.g < cm.g_c:
            gap = np_gap(params)
            obs = None
            if with_observables:
                st = minimize(params)
                obs = observables(symplectic_diagonalize(build_quadratic(params, st)))
            return PhaseCell(params.theta, params.g, normal_label, cm.index, gap,
                             -0.5 * n, normal_cfg, obs)
        st = minimize(params, restarts=restarts, seed=seed)
        cfg = classify(st)
        if st.is_normal:
            label = normal_label
        else:
            label = "FSP" if cfg.frustrated else "SP"
        form = build_quadratic(params, st)
        if with_observables:
            spec = symplectic_diagonalize(form)
            gap, obs = spec.gap, observables(spec)
        else:
            gap, obs = fluctuation_gap(form), None
        return PhaseCell(params.theta, params.g, label, cm.index, gap, st.energy, cfg, obs)
    except DickeFluxError as exc:
        label = normal_label if params.g < cm.g_c else "SP"
        return PhaseCell(params.theta, params.g, label, cm.index, np.nan, np.nan,
                         normal_cfg, None, f"{type(exc).__name__}: {exc}")


def _row(args):
    base, theta, g_values, restarts, seed, with_obs = args
    return [classify_cell(base.replace(theta=float(theta), g=float(g)), restarts, seed, with_obs)
            for g in g_values]


def phase_diagram(base, theta_grid, g_grid, threads=None, restarts=4, seed=0,
                  with_observables=False):
    """Classify every cell of a flux-coupling grid.

    Rows of constant flux are distributed over ``threads`` worker processes
    and reassembled in flux-major, then coupling, order, so the result does
    not depend on scheduling.

    Returns
    -------
    list of PhaseCell
    """
    threads = threads or os.cpu_count() or 1
    jobs = [(base, th, list(g_grid), restarts, seed, with_observables) for th in theta_grid]
    if threads == 1:
        rows = [_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_row, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    return [c for r in rows for c in r]


@dataclass(frozen=True)
class FirstOrderLine:
    """First-order line traced through a phase-diagram grid.

    Attributes
    ----------
    points : tuple of (float, float)
        ``(g, theta)`` boundary positions, ascending in ``g``.
    classes : tuple
        Canonical sign classes on the two sides at the lowest point.
    """

    points: tuple
    classes: tuple = ()

    @property
    def theta_span(self):
        """Spread of the boundary position in flux."""
        th = [p[1] for p in self.points]
        return max(th) - min(th)

    @property
    def end(self):
        """Lowest-coupling point ``(g, theta)``."""
        return self.points[0]


def first_order_lines(cells, link=3):
    """Group sign-class jumps between superradiant cells into lines.

    Within every row of constant ``g`` a boundary is recorded between
    flux neighbours whose canonical sign classes differ.  Boundaries in
    consecutive rows within ``link`` flux cells of each other are joined.
    """
    thetas = sorted({c.theta for c in cells})
    gs = sorted({c.g for c in cells})
    dth = (thetas[-1] - thetas[0]) / max(1, len(thetas) - 1)
    table = {(c.theta, c.g): c for c in cells}
    rows = []
    for g in gs:
        pts = []
        for ta, tb in zip(thetas[:-1], thetas[1:]):
            a, b = table[(ta, g)], table[(tb, g)]
            if a.error or b.error or a.label in ("NP", "ANP") or b.label in ("NP", "ANP"):
                continue
            if a.config.canonical != b.config.canonical:
                pts.append((0.5 * (ta + tb), (a.config.canonical, b.config.canonical)))
        rows.append((g, pts))
    lines = []
    open_lines = []
    for g, pts in rows:
        nxt = []
        for th, cls in pts:
            match = None
            for ln in open_lines:
                if abs(ln[-1][1] - th) <= link * dth + 1e-12:
                    match = ln
                    break
            if match is not None:
                open_lines.remove(match)
                match.append((g, th, cls))
                nxt.append(match)
            else:
                ln = [(g, th, cls)]
                lines.append(ln)
                nxt.append(ln)
        open_lines = nxt
    return [FirstOrderLine(tuple((p[0], p[1]) for p in ln), ln[0][2]) for ln in lines]
