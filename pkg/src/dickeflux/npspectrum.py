"""Normal-phase excitation spectra.

Three routes are provided: a dense Bogoliubov eigensolve per momentum pair,
the closed-form roots of the per-branch quartic, and the Rabi limit where
the atoms are adiabatically eliminated.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateResolvent, NormalPhaseUnstable, OverCritical
from .model import _sum_prod, delta_shift, dispersion, momentum_grid

__all__ = [
    "BogoliubovBlock",
    "QuarticSolution",
    "bogoliubov_block",
    "block_energies",
    "signed_block_energies",
    "np_spectrum_dense",
    "np_energies",
    "np_gap",
    "solve_cubic_real",
    "np_spectrum_quartic",
    "np_spectrum_quartic_pair",
    "rabi_limit_spectrum",
    "np_photon_number",
]

_UNSTABLE_TOL = 1e-10


@dataclass(frozen=True)
class BogoliubovBlock:
    """Quadratic form ``H = psi^dag M psi / 2`` of one momentum pair.

    The Nambu vector is ``(a_k, b_k, a_-k, b_-k, h.c.)``; for a
    self-conjugate momentum it shrinks to ``(a_k, b_k, h.c.)``.

    Attributes
    ----------
    k : float
        Momentum labelling the pair.
    matrix_m : ndarray
        Real symmetric ``8x8`` (or ``4x4``) matrix.
    metric : ndarray
        ``diag(I, -I)``.
    """

    k: float
    matrix_m: np.ndarray
    metric: np.ndarray

    @property
    def dynamical(self):
        """The non-symmetric matrix ``metric @ M``."""
        return self.metric @ self.matrix_m


def bogoliubov_block(params, k):
    """Assemble the Bogoliubov matrix of the pair ``{k, -k}``."""
    lam = params.lam
    om = params.omega_atom
    wk = float(dispersion(params, k))
    if np.isclose(np.sin(k), 0.0, atol=1e-14):
        m1 = np.array([[wk, lam], [lam, om]])
        m2 = np.array([[0.0, lam], [lam, 0.0]])
    else:
        wm = float(dispersion(params, -k))
        m1 = np.zeros((4, 4))
        m1[:2, :2] = [[wk, lam], [lam, om]]
        m1[2:, 2:] = [[wm, lam], [lam, om]]
        m2 = np.zeros((4, 4))
        m2[0, 3] = m2[3, 0] = m2[1, 2] = m2[2, 1] = lam
    m = np.block([[m1, m2], [m2, m1]])
    n = m1.shape[0]
    metric = np.diag(np.r_[np.ones(n), -np.ones(n)])
    return BogoliubovBlock(float(k), 0.5 * (m + m.T), metric)


def block_energies(params, k):
    """Non-negative excitation energies of the pair ``{k, -k}``, ascending.

    Raises
    ------
    NormalPhaseUnstable
        If ``M`` is not positive semidefinite or the spectrum of
        ``metric @ M`` is complex.
    """
    blk = bogoliubov_block(params, k)
    scale = max(1.0, np.abs(blk.matrix_m).max())
    mmin = np.linalg.eigvalsh(blk.matrix_m)[0]
    if mmin < -_UNSTABLE_TOL * scale:
        raise NormalPhaseUnstable(
            f"Bogoliubov matrix indefinite at k={k:.6g}, g={params.g:.12g}")
    ev = np.linalg.eigvals(blk.dynamical)
    if np.abs(ev.imag).max() > np.sqrt(_UNSTABLE_TOL) * scale:
        raise NormalPhaseUnstable(f"complex excitation energy at k={k:.6g}")
    ev = np.sort(ev.real)
    return np.abs(ev[ev.size // 2:])


def signed_block_energies(params, k):
    """Physical (positive-norm) energies of the pair, possibly negative.

    Past the softening of a ``k != 0`` branch the physical energy crosses
    zero while the spectrum stays real; this routine keeps its sign.
    """
    blk = bogoliubov_block(params, k)
    ev, vec = np.linalg.eig(blk.dynamical)
    scale = max(1.0, np.abs(blk.matrix_m).max())
    if np.abs(ev.imag).max() > np.sqrt(_UNSTABLE_TOL) * scale:
        raise NormalPhaseUnstable(f"complex excitation energy at k={k:.6g}")
    norm = np.einsum("ij,i,ij->j", vec.conj(), np.diag(blk.metric), vec).real
    return np.sort(ev.real[norm > 0])


def np_spectrum_dense(params):
    """Dense normal-phase spectrum per momentum pair.

    Returns
    -------
    list of (float, ndarray)
        ``(k_j, energies)`` for ``j = 0 .. N//2``; each pair carries four
        energies, a self-conjugate momentum two.
    """
    grid = momentum_grid(params.n_sites)
    return [(float(grid.values[j]), block_energies(params, grid.values[j]))
            for j in grid.pair_indices()]


def np_energies(params):
    """All ``2N`` normal-phase excitation energies, ascending."""
    return np.sort(np.concatenate([e for _, e in np_spectrum_dense(params)]))


def np_gap(params, near=1e-6):
    """Smallest normal-phase excitation energy.

    Below ``near`` the block minimum is recomputed from the quartic closed
    form, which keeps its relative accuracy as the gap closes.
    """
    best = np.inf
    for k, e in np_spectrum_dense(params):
        val = e[0]
        if val < near:
            try:
                val = float(np.min(np_spectrum_quartic_pair(params, k)))
            except DegenerateResolvent:
                pass
        best = min(best, val)
    return best


def solve_cubic_real(c3, c2, c1, c0):
    """Real roots of ``c3 v^3 + c2 v^2 + c1 v + c0``.

    Uses the trigonometric form when three real roots exist and Cardano's
    formula otherwise, followed by two Newton polishing steps.
    """
    a, b, c = c2 / c3, c1 / c3, c0 / c3
    p = b - a * a / 3
    q = 2 * a ** 3 / 27 - a * b / 3 + c
    disc = (q / 2) ** 2 + (p / 3) ** 3
    # a discriminant lost in rounding still means a repeated real root
    if p < 0 and disc <= 1e-12 * abs(p / 3) ** 3:
        r = 2 * np.sqrt(-p / 3)
        arg = np.clip(3 * q / (p * r), -1.0, 1.0)
        phi = np.arccos(arg) / 3
        t = r * np.cos(phi - 2 * np.pi * np.arange(3) / 3)
    else:
        s = np.sqrt(max(disc, 0.0))
        t = np.array([np.cbrt(-q / 2 + s) + np.cbrt(-q / 2 - s)])
    v = t - a / 3
    for _ in range(2):
        f = ((v + a) * v + b) * v + c
        df = (3 * v + 2 * a) * v + b
        ok = df != 0
        v = np.where(ok, v - np.where(ok, f / np.where(ok, df, 1), 0), v)
    return np.sort(v)


@dataclass(frozen=True)
class QuarticSolution:
    """Closed-form energies of the branch with momentum ``k``.

    Attributes
    ----------
    k : float
        Branch momentum.
    v_k : float
        Selected root of the resolvent cubic (``nan`` on the biquadratic
        path).
    x_k, y_k : float
        Auxiliary radicals ``X_k`` and ``Y_k``.
    eps1, eps2 : float
        Upper and lower energies of the branch.
    delta_k : float
        Constant shift ``(omega_k - omega_-k) / 4``.
    t : tuple of float
        Resolvent coefficients ``(t3, t2, t1, t0)``.
    method : str
        ``"resolvent"``, ``"biquadratic"`` or ``"dense"`` (fallback).
    fallback : bool
        True when the closed form was abandoned for the dense solve.
    """

    k: float
    v_k: float
    x_k: float
    y_k: float
    eps1: float
    eps2: float
    delta_k: float
    t: tuple
    method: str = "resolvent"
    fallback: bool = False

    @property
    def radicals(self):
        """Square-root parts ``eps - delta_k`` of the two energies."""
        return self.eps1 - self.delta_k, self.eps2 - self.delta_k


def _quartic_terms(params, k):
    wk = float(dispersion(params, k))
    wm = float(dispersion(params, -k))
    d = wk - wm
    p = wk * wm
    b = p - 0.5 * params.g ** 2 * params.omega * (wk + wm)
    return d, p, b


def _resolvent(d, p, b, om2):
    s = -om2 - p
    t3 = d ** 3 - 4 * d * s - 8 * d * om2
    t2 = d ** 2 * s - 4 * s ** 2 - 2 * d ** 2 * om2 + 16 * b * om2
    t1 = -d ** 3 * om2 + 4 * s * d * om2 + 8 * d * b * om2
    t0 = -d ** 2 * om2 ** 2 + d ** 2 * b * om2
    return t3, t2, t1, t0


def _dense_branch(params, k):
    # physical modes of the pair whose amplitude lives on (a_k, b_k, a_-k^+, b_-k^+)
    blk = bogoliubov_block(params, k)
    ev, vec = np.linalg.eig(blk.dynamical)
    norm = np.einsum("ij,i,ij->j", vec.conj(), np.diag(blk.metric), vec).real
    w = np.abs(vec) ** 2
    own = w[[0, 1, 6, 7]].sum(axis=0) / w.sum(axis=0)
    sel = (norm > 0) & (own > 0.5)
    return np.sort(ev.real[sel])[::-1]


def np_spectrum_quartic(params, k, degenerate_tol=1e-12):
    """Closed-form energies of the momentum-``k`` branch.

    The characteristic polynomial of the branch is a quartic whose roots
    are written through the resolvent cubic.  Among the cubic's real roots
    the one maximising ``|d + 4v|`` (``d = omega_k - omega_-k``) is used;
    it gives the positive radicand ``X^2`` of smallest size.

    When ``X^2`` is within ``degenerate_tol`` of zero the branch energies
    are taken from the dense eigensolve and ``fallback`` is set.

    Raises
    ------
    NormalPhaseUnstable
        If a radicand of the energies is negative (complex spectrum).
    DegenerateResolvent
        If the dense fallback cannot isolate the branch.
    """
    om2 = params.omega_atom ** 2
    d, p, b = _quartic_terms(params, k)
    delta = float(delta_shift(params, k))
    t = _resolvent(d, p, b, om2)
    scale = om2 + p
    if abs(d) <= degenerate_tol * max(1.0, abs(p)):
        disc = scale ** 2 - 4 * om2 * b
        if disc < 0 or b < -_UNSTABLE_TOL * scale:
            raise NormalPhaseUnstable(f"biquadratic roots complex at k={k:.6g}")
        root = np.sqrt(disc)
        hi = 0.5 * (scale + root)
        lo = 2 * om2 * b / (scale + root)
        return QuarticSolution(float(k), np.nan, 0.0, np.nan, np.sqrt(hi),
                               np.sqrt(max(lo, 0.0)), delta, t, "biquadratic")
    roots = solve_cubic_real(*t)
    v = roots[np.argmax(np.abs(d + 4 * roots))]
    u = d + 4 * v
    x2 = t[0] / u
    if abs(x2) < degenerate_tol:
        e = _dense_branch(params, k)
        if e.size != 2:
            raise DegenerateResolvent(f"X radicand {x2:.3g} at k={k:.6g}")
        return QuarticSolution(float(k), float(v), 0.0, np.nan, float(e[0]),
                               float(e[1]), delta, t, "dense", True)
    if x2 < 0:
        raise NormalPhaseUnstable(f"X radicand negative at k={k:.6g}")
    x = np.sqrt(x2)
    s = -om2 - p
    y = (d ** 3 + 4 * om2 * d - 2 * d * s + 6 * d ** 2 * v - 16 * s * v) / u
    r1 = y + x * u
    r2 = y - x * u
    tol = 1e-12 * max(1.0, abs(y))
    if r1 < -tol or r2 < -tol:
        raise NormalPhaseUnstable(f"energy radicand negative at k={k:.6g}")
    e1 = (np.sqrt(2 * max(r1, 0.0)) + x + d) / 4
    e2 = (np.sqrt(2 * max(r2, 0.0)) - x + d) / 4
    return QuarticSolution(float(k), float(v), float(x), float(y), float(e1),
                           float(e2), delta, t)


def np_spectrum_quartic_pair(params, k):
    """Energies of the pair ``{k, -k}`` from the closed form, ascending.

    Falls back to the dense solve when the resolvent degenerates.
    """
    if np.isclose(np.sin(k), 0.0, atol=1e-14):
        sol = np_spectrum_quartic(params, k)
        return np.sort([sol.eps1, sol.eps2])
    out = []
    for kk in (k, -k):
        try:
            sol = np_spectrum_quartic(params, kk)
            out += [sol.eps1, sol.eps2]
        except DegenerateResolvent:
            return np.sort(signed_block_energies(params, k))
    return np.sort(out)


def rabi_limit_spectrum(params, k):
    """Excitation energy and squeezing of branch ``k`` for ``Omega >> omega``.

    Returns
    -------
    energy : float
        ``sqrt(A_k) + 2 Delta_k`` with
        ``A_k = s^2/4 - s omega g^2 / 2`` and ``s = omega_k + omega_-k``.
    r_k : float
        Squeezing parameter ``ln[s / (s - 2 omega g^2)] / 8``.

    Raises
    ------
    OverCritical
        If ``A_k < 0``.
    """
    s, _ = _sum_prod(params, k)
    s = float(s)
    a = s * s / 4 - s * params.omega * params.g ** 2 / 2
    if a < 0 or s - 2 * params.omega * params.g ** 2 <= 0:
        raise OverCritical(f"A_k = {a:.6g} < 0 at k={k:.6g}, g={params.g:.6g}")
    energy = np.sqrt(a) + 2 * float(delta_shift(params, k))
    r = np.log(s / (s - 2 * params.omega * params.g ** 2)) / 8
    return float(energy), float(r)


def np_photon_number(params):
    """Photon number per cavity in the Rabi limit.

    Each momentum contributes ``[s/(2 sqrt A) + 2 sqrt A / s - 2] / 4``,
    the occupation of a squeezed vacuum with frequency ``sqrt(A_k)``; the
    result is averaged over the ``N`` momenta.
    """
    grid = momentum_grid(params.n_sites)
    total = 0.0
    for k in grid.values:
        s, _ = _sum_prod(params, k)
        a = s * s / 4 - s * params.omega * params.g ** 2 / 2
        if a <= 0:
            raise OverCritical(f"A_k = {a:.6g} <= 0 at k={k:.6g}")
        ra = np.sqrt(a)
        total += (s / (2 * ra) + 2 * ra / s - 2) / 4
    return float(total / params.n_sites)
