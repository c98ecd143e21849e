"""Batch command-line front-end.

Usage::

    dickeflux COMMAND [--config FILE] [options]

Commands are ``spectrum``, ``phase-diagram``, ``meanfield``, ``exponent``,
``observables`` and ``boundary``.  Options may also be given in a flat
``key = value`` config file (``#`` starts a comment); flags override file
values.  Ranges use ``min:max:steps`` with both endpoints included.
"""
import argparse
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from .criticality import (DEFAULT_DPS, DEFAULT_POINTS, DEFAULT_WINDOW, fit_exponent,
                          fit_log_divergence, gap_series,
                          observable_series, phase_diagram, trace_continuous_boundary)
from .errors import DickeFluxError, InvalidParameters, PoorFit
from .gaussian import build_quadratic, observables, symplectic_diagonalize
from .meanfield import classify, first_order_boundary, minimize
from .model import ModelParams, critical_mode
from .npspectrum import np_energies

__all__ = ["RunConfig", "ConfigError", "parse_range", "load_config", "build_config", "run",
           "main"]

COMMANDS = ("spectrum", "phase-diagram", "meanfield", "exponent", "observables", "boundary")
EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2

_KEYS = {
    "n": int, "jbar": float, "omega": float, "omega_atom": float, "theta": str, "g": str,
    "out": str, "plot": str, "side": str, "window": str, "points": int, "dps": int,
    "quantity": str, "restarts": int, "seed": int, "threads": int,
}


class ConfigError(DickeFluxError, ValueError):
    """Invalid run configuration; ``problems`` lists every violated field."""

    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


def fmt(v):
    """Format a float with 12 significant digits."""
    return "%.12g" % v


def parse_range(text):
    """Parse ``min:max:steps`` (inclusive) or a single value.

    Returns
    -------
    ndarray
    """
    parts = str(text).split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"expected min:max:steps, got {text!r}")
    lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if steps < 2:
        raise ValueError(f"steps must be >= 2 in {text!r}")
    if not hi > lo:
        raise ValueError(f"empty range {text!r}")
    return np.linspace(lo, hi, steps)


def _parse_window(text):
    parts = str(text).split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"expected lo:hi[:points], got {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    if not 0 < lo < hi:
        raise ValueError(f"window needs 0 < lo < hi, got {text!r}")
    return (lo, hi), (int(parts[2]) if len(parts) == 3 else None)


@dataclass
class RunConfig:
    """Validated run configuration.

    Attributes
    ----------
    command : str
    model : ModelParams
        Parameters at the first grid point.
    theta, g : ndarray
        Flux and coupling grids (a single value is a one-point grid).
    out : str
        Output path.
    plot : str or None
        Optional SVG path.
    side : str
    window : (float, float)
        Relative distance window ``|g - g_c| / g_c`` for exponent fits.
    points : int
    dps : int or None
        Extended precision for the fluctuation spectrum; ``0`` disables.
    quantity : str
        ``gap``, ``photon_number`` or ``entanglement`` for ``exponent``.
    restarts, seed, threads : int
    """

    command: str
    model: ModelParams
    theta: np.ndarray
    g: np.ndarray
    out: str
    plot: str = None
    side: str = "above"
    window: tuple = DEFAULT_WINDOW
    points: int = DEFAULT_POINTS
    dps: int = DEFAULT_DPS
    quantity: str = "gap"
    restarts: int = 4
    seed: int = 0
    threads: int = None


def load_config(path):
    """Read a flat ``key = value`` file.

    Returns
    -------
    dict
        Raw string values keyed by normalised names.
    """
    out = {}
    with open(path) as fh:
        for num, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError([f"{path}:{num}: expected key = value"])
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def build_config(command, values):
    """Validate raw values and assemble a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        Listing every invalid field.
    """
    bad = []
    if command not in COMMANDS:
        bad.append(f"command: {command!r} not one of {', '.join(COMMANDS)}")
    for key in values:
        if key not in _KEYS:
            bad.append(f"{key}: unknown key")
    conv = {}
    for key, typ in _KEYS.items():
        if values.get(key) is None:
            continue
        try:
            conv[key] = typ(values[key])
        except (TypeError, ValueError):
            bad.append(f"{key}: cannot parse {values[key]!r} as {typ.__name__}")
    optional_g = command in ("boundary", "exponent")
    for key in ("n", "theta", "g", "out"):
        if key not in conv and not (key == "g" and optional_g):
            bad.append(f"{key}: required")
    grids = {}
    for key in ("theta", "g"):
        if key in conv:
            try:
                grids[key] = parse_range(conv[key])
            except ValueError as exc:
                bad.append(f"{key}: {exc}")
    if "theta" in grids and not np.all((grids["theta"] > 0) & (grids["theta"] < np.pi)):
        bad.append("theta: values must lie strictly inside (0, pi)")
    if "g" in grids and np.any(grids["g"] < 0):
        bad.append("g: values must be non-negative")
    window, points = DEFAULT_WINDOW, conv.get("points", DEFAULT_POINTS)
    if "window" in conv:
        try:
            window, wp = _parse_window(conv["window"])
            points = wp or points
        except ValueError as exc:
            bad.append(f"window: {exc}")
    if points < 12:
        bad.append("points: need at least 12")
    side = conv.get("side", "above")
    if side not in ("above", "below"):
        bad.append(f"side: {side!r} not 'above' or 'below'")
    quantity = conv.get("quantity", "gap")
    if quantity not in ("gap", "photon_number", "entanglement"):
        bad.append(f"quantity: {quantity!r} not gap, photon_number or entanglement")
    if conv.get("restarts", 4) < 1:
        bad.append("restarts: must be >= 1")
    if conv.get("threads", 1) < 1:
        bad.append("threads: must be >= 1")
    if conv.get("dps", 0) < 0:
        bad.append("dps: must be >= 0")
    single = command in ("spectrum", "observables", "exponent")
    if single and "theta" in grids and len(grids["theta"]) != 1:
        bad.append(f"theta: {command} takes a single flux value")
    model = None
    if "n" in conv and "theta" in grids:
        omega = conv.get("omega", 1.0)
        try:
            model = ModelParams(conv["n"], float(grids["theta"][0]),
                                float(grids.get("g", [0.0])[0]),
                                j_hop=conv.get("jbar", 0.1) * omega, omega=omega,
                                omega_atom=conv.get("omega_atom", 50.0))
        except InvalidParameters as exc:
            bad.extend(f"model: {p}" for p in str(exc).split("; "))
    if bad:
        raise ConfigError(bad)
    dps = conv.get("dps", DEFAULT_DPS)
    return RunConfig(command, model, grids["theta"], grids.get("g", np.array([])),
                     conv["out"], conv.get("plot"), side, window, points, dps or None,
                     quantity, conv.get("restarts", 4), conv.get("seed", 0),
                     conv.get("threads"))


def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows):
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(fmt(v) if isinstance(v, (float, np.floating)) else str(v)
                              for v in r))
    return "\n".join(lines) + "\n"


def _sign_string(signs):
    return "".join({1: "+", -1: "-", 0: "0"}[int(s)] for s in signs)


def _spectrum(cfg):
    n = cfg.model.n_sites
    gc = critical_mode(cfg.model).g_c
    rows, fails = [], 0
    for g in cfg.g:
        p = cfg.model.replace(g=float(g))
        try:
            if g <= gc:
                e = np_energies(p)
            else:
                st = minimize(p, restarts=cfg.restarts, seed=cfg.seed)
                e = symplectic_diagonalize(build_quadratic(p, st)).energies
        except DickeFluxError:
            e, fails = np.full(2 * n, np.nan), fails + 1
        rows.append([float(g)] + [float(v) for v in np.sort(e)])
    header = ["g"] + [f"eps_{i + 1}" for i in range(2 * n)]
    return _csv(header, rows), len(rows), fails, rows


def _phase(cfg):
    cells = phase_diagram(cfg.model, cfg.theta, cfg.g, threads=cfg.threads,
                          restarts=cfg.restarts, seed=cfg.seed)
    rows = [[float(c.theta), float(c.g), c.label, c.critical_k, float(c.gap), float(c.energy),
             _sign_string(c.config.signs), c.config.n_ferro_pairs, c.config.degeneracy]
            for c in cells]
    header = ["theta", "g", "label", "critical_k_index", "gap", "energy", "signs",
              "n_ferro_pairs", "degeneracy"]
    return _csv(header, rows), len(cells), sum(c.error is not None for c in cells), cells


def _meanfield(cfg):
    n = cfg.model.n_sites
    rows, fails = [], 0
    for th in cfg.theta:
        for g in cfg.g:
            p = cfg.model.replace(theta=float(th), g=float(g))
            try:
                st = minimize(p, restarts=cfg.restarts, seed=cfg.seed)
                c = classify(st)
                rows.append([float(th), float(g), float(st.energy), _sign_string(c.signs),
                             c.n_ferro_pairs, c.degeneracy, int(c.frustrated)]
                            + [float(v) for v in st.x] + [float(v) for v in st.y])
            except DickeFluxError:
                fails += 1
                rows.append([float(th), float(g), np.nan, "", 0, 0, 0]
                            + [np.nan] * (2 * n))
    header = (["theta", "g", "energy", "signs", "n_ferro_pairs", "degeneracy", "frustrated"]
              + [f"x_{i + 1}" for i in range(n)] + [f"y_{i + 1}" for i in range(n)])
    return _csv(header, rows), len(rows), fails, rows


def _exponent(cfg):
    p = cfg.model
    if cfg.quantity == "gap":
        gc, series = gap_series(p, cfg.side, cfg.window, cfg.points, cfg.dps)
        fitter = lambda: fit_exponent(series, gc, cfg.side)
    else:
        gc, obs = observable_series(p, cfg.side, cfg.window, cfg.points, cfg.dps)
        attr = cfg.quantity
        site = int(np.nanargmax(getattr(obs[-1][1], attr)))
        series = [(g, float(getattr(o, attr)[site])) for g, o in obs]
        if attr == "photon_number":
            fitter = lambda: fit_exponent(series, gc, cfg.side, divergent=True)
        else:
            fitter = lambda: fit_log_divergence(series, gc, cfg.side)
    try:
        fit, ok = fitter(), True
    except PoorFit as exc:
        fit, ok = exc.fit, False
    data = fit.as_dict()
    data.update(quantity=cfg.quantity, n_points=fit.n_points, accepted=ok)
    return json.dumps(data, indent=2, sort_keys=True) + "\n", 1, int(not ok), series


def _observables(cfg):
    n = cfg.model.n_sites
    rows, fails = [], 0
    for g in cfg.g:
        p = cfg.model.replace(g=float(g))
        try:
            st = minimize(p, restarts=cfg.restarts, seed=cfg.seed, dps=cfg.dps)
            o = observables(symplectic_diagonalize(build_quadratic(p, st, dps=cfg.dps)))
            for i in range(n):
                rows.append([float(g), i + 1, float(o.photon_number[i]),
                             float(o.entanglement[i]), int(o.diverged)])
        except DickeFluxError:
            fails += 1
            rows.extend([float(g), i + 1, np.nan, np.nan, 1] for i in range(n))
    header = ["g", "site", "photon_number", "entanglement", "diverged_flag"]
    return _csv(header, rows), len(cfg.g), fails, rows


def _boundary(cfg):
    rows = [["continuous", th, gc, j, "", ""]
            for th, gc, j in trace_continuous_boundary(cfg.model, cfg.theta)]
    fails = 0
    lo, hi = float(cfg.theta[0]), float(cfg.theta[-1])
    for g in cfg.g:
        try:
            for th, a, b in first_order_boundary(cfg.model, float(g), (lo, hi),
                                                 steps=len(cfg.theta),
                                                 restarts=cfg.restarts, seed=cfg.seed):
                rows.append(["first_order", float(th), float(g), -1, _sign_string(a),
                             _sign_string(b)])
        except DickeFluxError:
            fails += 1
    header = ["kind", "theta", "g", "critical_k_index", "class_left", "class_right"]
    return _csv(header, rows), len(cfg.theta) + len(cfg.g), fails, rows


_HANDLERS = {"spectrum": _spectrum, "phase-diagram": _phase, "meanfield": _meanfield,
             "exponent": _exponent, "observables": _observables, "boundary": _boundary}

_COLORS = {"NP": "#d9d9d9", "ANP": "#9ecae1", "SP": "#fdae6b", "FSP": "#e6550d"}


def svg_lines(xs, ys_list, xlabel, ylabel, width=480, height=320):
    """Minimal SVG line plot of several curves sharing ``xs``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys_list, dtype=float)
    finite = ys[np.isfinite(ys)]
    y0, y1 = (finite.min(), finite.max()) if finite.size else (0.0, 1.0)
    y1 = y1 if y1 > y0 else y0 + 1
    m = 40
    sx = lambda v: m + (v - xs[0]) / (xs[-1] - xs[0] or 1) * (width - 2 * m)
    sy = lambda v: height - m - (v - y0) / (y1 - y0) * (height - 2 * m)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<rect x="{m}" y="{m}" width="{width - 2 * m}" height="{height - 2 * m}" '
           'fill="none" stroke="black"/>',
           f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle">{xlabel}</text>',
           f'<text x="12" y="{height / 2}" transform="rotate(-90 12 {height / 2})" '
           f'text-anchor="middle">{ylabel}</text>']
    for curve in ys:
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, curve) if np.isfinite(y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="steelblue"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_phase_map(cells, width=480, height=480):
    """Minimal SVG heat map of phase labels over ``(theta, g)``."""
    ths = sorted({c.theta for c in cells})
    gs = sorted({c.g for c in cells})
    cw, ch = width / len(ths), height / len(gs)
    ti = {t: i for i, t in enumerate(ths)}
    gi = {g: i for i, g in enumerate(gs)}
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           'shape-rendering="crispEdges">']
    for c in cells:
        out.append(f'<rect x="{ti[c.theta] * cw:.3f}" y="{height - (gi[c.g] + 1) * ch:.3f}" '
                   f'width="{cw:.3f}" height="{ch:.3f}" fill="{_COLORS.get(c.label, "#000")}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _plot(cfg, payload):
    if cfg.command == "phase-diagram":
        return svg_phase_map(payload)
    if cfg.command == "spectrum":
        arr = np.array(payload, dtype=float)
        return svg_lines(arr[:, 0], arr[:, 1:].T, "g", "energy")
    if cfg.command == "exponent":
        arr = np.array(payload, dtype=float)
        return svg_lines(arr[:, 0], [arr[:, 1]], "g", cfg.quantity)
    return None


def run(cfg, stream=None):
    """Execute a validated configuration and write its artifacts.

    Returns
    -------
    int
        ``0`` on success, ``2`` when some cells failed.
    """
    t0 = time.perf_counter()
    text, cells, fails, payload = _HANDLERS[cfg.command](cfg)
    _atomic_write(cfg.out, text)
    if cfg.plot:
        svg = _plot(cfg, payload)
        if svg is not None:
            _atomic_write(cfg.plot, svg)
    wall = time.perf_counter() - t0
    print(f"{cfg.command}: {cells} cells, {fails} failures, {wall:.2f} s -> {cfg.out}",
          file=stream or sys.stdout)
    return EXIT_PARTIAL if fails else EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors, not argparse's exit status 2
    def error(self, message):
        raise ConfigError([message])


def _parser():
    ap = _Parser(prog="dickeflux", description=__doc__.split("\n")[0])
    ap.add_argument("command", help="one of " + ", ".join(COMMANDS))
    ap.add_argument("--config", help="flat key = value file")
    ap.add_argument("--n", help="number of sites")
    ap.add_argument("--jbar", help="hopping over cavity frequency (default 0.1)")
    ap.add_argument("--omega", help="cavity frequency (default 1)")
    ap.add_argument("--omega-atom", dest="omega_atom", help="atomic frequency (default 50)")
    ap.add_argument("--theta", help="flux value or min:max:steps")
    ap.add_argument("--g", help="coupling value or min:max:steps")
    ap.add_argument("--side", help="above or below g_c (exponent)")
    ap.add_argument("--window", help="relative distance lo:hi[:points] (exponent)")
    ap.add_argument("--points", help="points per fit window")
    ap.add_argument("--dps", help="decimal digits for extended precision, 0 disables")
    ap.add_argument("--quantity", help="gap, photon_number or entanglement (exponent)")
    ap.add_argument("--out", help="output file")
    ap.add_argument("--plot", help="optional SVG output")
    ap.add_argument("--restarts", help="random restarts of the minimiser")
    ap.add_argument("--seed", help="random seed")
    ap.add_argument("--threads", help="worker processes (default: all cores)")
    return ap


def main(argv=None):
    """Console entry point; returns the exit status."""
    values = {}
    try:
        args = _parser().parse_args(argv)
        if args.config:
            values.update(load_config(args.config))
        values.update({k: v for k, v in vars(args).items()
                       if v is not None and k not in ("command", "config")})
        cfg = build_config(args.command, values)
    except ConfigError as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
