"""Gaussian fluctuations around a mean-field state.

The fluctuation Hamiltonian is quadratic in the quadratures
``r = (q_1, p_1, Q_1, P_1, ..., q_N, p_N, Q_N, P_N)`` of cavity and
collective spin at every site, ``H = r^T h r / 2 + offset``.  A symplectic
congruence brings ``h`` to normal modes; the ground-state covariance then
gives per-site photon numbers and the block entropy
``S_n = ln det(2 C_n) / 2``.
"""
from dataclasses import dataclass, field

import mpmath
import numpy as np
import scipy.linalg

from .errors import NotPositiveDefinite, UnconvergedState

__all__ = [
    "QuadraticForm",
    "SymplecticSpectrum",
    "CovarianceMatrix",
    "SiteObservables",
    "symplectic_form",
    "build_quadratic",
    "symplectic_diagonalize",
    "williamson_cholesky",
    "fluctuation_gap",
    "covariance",
    "symplectic_eigenvalues",
    "observables",
    "gap_floor",
]

PD_TOL = 1e-12
DEGENERACY_TOL = 1e-9


def symplectic_form(n_modes):
    """Canonical form ``Omega = diag([[0, 1], [-1, 0]], ...)``."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class QuadraticForm:
    """Real symmetric fluctuation matrix in quadrature order.

    Attributes
    ----------
    h : ndarray
        ``4N x 4N`` matrix.
    offset : float
        Zero-point shift so that ``r^T h r / 2 + offset`` is the
        normal-ordered fluctuation Hamiltonian.
    h_hp : mpmath.matrix or None
        Extended-precision copy built from a refined state.
    dps : int or None
        Decimal precision of ``h_hp``.
    """

    h: np.ndarray
    offset: float = 0.0
    h_hp: object = field(default=None, repr=False)
    dps: int = None


def _fill(h, n, jc, js, omega, wa, lam):
    for i in range(n):
        q, p, qa, pa = 4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3
        h[q, q] = h[p, p] = omega
        h[qa, qa] = h[pa, pa] = wa[i]
        h[q, qa] = h[qa, q] = 2 * lam[i]
        j = (i + 1) % n
        q2, p2 = 4 * j, 4 * j + 1
        h[q, q2] += jc
        h[q2, q] += jc
        h[p, p2] += jc
        h[p2, p] += jc
        h[q2, p] += js
        h[p, q2] += js
        h[q, p2] -= js
        h[p2, q] -= js
    return h


def build_quadratic(params, state, dps=None):
    """Fluctuation matrix around ``state``.

    Each spin is rotated to its mean-field direction; its effective
    splitting is ``Omega sqrt(1 + 4 g^2 x_n^2)`` and its coupling to the
    cavity position is ``lambda sign(x_n) / sqrt(1 + 4 g^2 x_n^2)``, with
    the sign taken as negative at ``x_n = 0``.  Spectra do not depend on
    these signs.

    Parameters
    ----------
    params : ModelParams
    state : MeanFieldState
    dps : int, optional
        Also build an extended-precision copy from ``state.x_hp``.

    Raises
    ------
    UnconvergedState
        If the state is flagged as not converged.
    """
    if not state.converged:
        raise UnconvergedState("fluctuations need a converged mean-field state")
    n = params.n_sites
    x = np.asarray(state.x, dtype=float)
    g = params.g
    r = np.sqrt(1 + 4 * g * g * x * x)
    sign = np.where(x > 0, 1.0, -1.0)
    wa = params.omega_atom * r
    lam = params.lam * sign / r
    jc = params.j_hop * np.cos(params.theta)
    js = params.j_hop * np.sin(params.theta)
    h = _fill(np.zeros((4 * n, 4 * n)), n, jc, js, params.omega, wa, lam)
    offset = -0.5 * float(np.sum(params.omega + wa))
    h_hp = None
    if dps is not None:
        src = state.x_hp if state.x_hp is not None else state.x
        with mpmath.workdps(dps):
            mp = mpmath.mpf
            gg = mp(params.g)
            xs = [mp(v) for v in src]
            rr = [mpmath.sqrt(1 + 4 * gg * gg * v * v) for v in xs]
            lam0 = gg * mpmath.sqrt(mp(params.omega) * mp(params.omega_atom)) / 2
            wa_hp = [mp(params.omega_atom) * v for v in rr]
            lam_hp = [lam0 * (1 if v > 0 else -1) / rv for v, rv in zip(xs, rr)]
            th = mp(params.theta)
            h_hp = _fill(mpmath.zeros(4 * n), n, mp(params.j_hop) * mpmath.cos(th),
                         mp(params.j_hop) * mpmath.sin(th), mp(params.omega), wa_hp, lam_hp)
    return QuadraticForm(h, offset, h_hp, dps)


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Normal-mode frequencies and the transform that produced them.

    Attributes
    ----------
    energies : ndarray
        ``2N`` non-negative frequencies, ascending.
    s : ndarray or None
        Symplectic matrix with ``S h S^T = diag(e_1, e_1, e_2, e_2, ...)``;
        ``None`` when not converged.
    converged : bool
        False for semidefinite input.
    gap : float
        Smallest frequency.
    cov : ndarray or None
        Ground-state covariance ``S^T S / 2`` (accumulated in extended
        precision when available).
    dps : int or None
        Decimal precision used, ``None`` for double precision.
    cov_hp : mpmath.matrix or None
        Extended-precision covariance.
    """

    energies: np.ndarray
    s: np.ndarray
    converged: bool
    gap: float
    cov: np.ndarray = field(default=None, repr=False)
    dps: int = None
    cov_hp: object = field(default=None, repr=False)


def _groups(values, tol):
    groups, cur = [], [0]
    for i in range(1, len(values)):
        if abs(values[i] - values[cur[-1]]) <= tol * max(1.0, abs(values[i])):
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    return groups


def _diagonalize_double(h):
    # real Schur form of the antisymmetric K = h^(1/2) Omega h^(1/2) has an
    # orthogonal Q whatever the degeneracy; s = E^(1/2) Q^T h^(-1/2)
    m = h.shape[0] // 2
    w, u = np.linalg.eigh(h)
    root = (u * np.sqrt(w)) @ u.T
    inv_root = (u / np.sqrt(w)) @ u.T
    k = root @ symplectic_form(m) @ root
    k = 0.5 * (k - k.T)
    t, q = scipy.linalg.schur(k, output="real")
    cols, eps = [], []
    i = 0
    while i < 2 * m:
        if i + 1 >= 2 * m or abs(t[i + 1, i]) == 0.0:
            raise NotPositiveDefinite("eigenvalues of Omega h are not purely imaginary pairs")
        b, c = t[i, i + 1], t[i + 1, i]
        if b * c >= 0:
            raise NotPositiveDefinite("eigenvalues of Omega h are not purely imaginary pairs")
        pair = [i, i + 1] if b > 0 else [i + 1, i]
        cols.append(q[:, pair])
        eps.append(np.sqrt(-b * c))
        i += 2
    order = np.argsort(eps)
    eps = np.asarray(eps)[order]
    qs = np.concatenate([cols[j] for j in order], axis=1)
    s = np.repeat(np.sqrt(eps), 2)[:, None] * (qs.T @ inv_root)
    return eps, s, 0.5 * s.T @ s


def _diagonalize_hp(h_hp, dps):
    with mpmath.workdps(dps):
        size = h_hp.rows
        m = size // 2
        om = mpmath.zeros(size)
        for i in range(m):
            om[2 * i, 2 * i + 1] = 1
            om[2 * i + 1, 2 * i] = -1
        ev, vec = mpmath.eig(om * h_hp)
        pos = [i for i in range(size) if mpmath.im(ev[i]) > 0]
        if len(pos) != m:
            raise NotPositiveDefinite("eigenvalues of Omega h are not purely imaginary pairs")
        pos.sort(key=lambda i: mpmath.im(ev[i]))
        eps = [mpmath.im(ev[i]) for i in pos]
        tol = mpmath.mpf(10) ** (-dps // 2)
        cols = []
        for grp in _groups([float(e) for e in eps], DEGENERACY_TOL):
            v = mpmath.matrix(size, len(grp))
            for a, i in enumerate(grp):
                for r in range(size):
                    v[r, a] = vec[r, pos[i]]
            gram = v.H * om * v / mpmath.mpc(0, 2)
            gram = (gram + gram.H) / 2
            if len(grp) == 1:
                nrm = mpmath.re(gram[0, 0])
                if nrm <= tol:
                    raise NotPositiveDefinite("symplectic norm not positive")
                v = v / mpmath.sqrt(nrm)
            else:
                chol = mpmath.cholesky(gram)
                v = v * mpmath.inverse(chol.H)
            for a in range(len(grp)):
                cols.append([mpmath.re(v[r, a]) for r in range(size)])
                cols.append([mpmath.im(v[r, a]) for r in range(size)])
        mmat = mpmath.matrix(size, size)
        for j, c in enumerate(cols):
            for r in range(size):
                mmat[r, j] = c[r]
        cov = mmat * mmat.T / 2
        s = np.array(mmat.T.tolist(), dtype=float)
        c = np.array(cov.tolist(), dtype=float)
        return np.array([float(e) for e in eps]), s, c, cov


def symplectic_diagonalize(form):
    """Normal modes of a positive-definite quadratic form.

    In double precision ``S = E^(1/2) Q^T h^(-1/2)`` where ``Q`` brings the
    antisymmetric ``h^(1/2) Omega h^(1/2)`` to real Schur form, which stays
    orthogonal inside degenerate groups.  The extended-precision path
    normalises eigenvectors of ``Omega h`` to unit symplectic norm with a
    Cholesky orthonormalisation inside degenerate groups.

    Returns
    -------
    SymplecticSpectrum
        With ``converged=False`` and ``s=None`` when the smallest eigenvalue
        of ``h`` lies in ``[0, 1e-12]``.

    Raises
    ------
    NotPositiveDefinite
        If ``h`` has a negative eigenvalue below ``-1e-12``.
    """
    if form.h_hp is not None:
        with mpmath.workdps(form.dps):
            hmin = min(mpmath.eigsy(form.h_hp, eigvals_only=True))
        if hmin <= 0:
            raise NotPositiveDefinite(f"smallest eigenvalue {mpmath.nstr(hmin, 5)}")
        eps, s, cov, cov_hp = _diagonalize_hp(form.h_hp, form.dps)
        return SymplecticSpectrum(eps, s, True, float(eps[0]), cov, form.dps, cov_hp)
    h = 0.5 * (form.h + form.h.T)
    hmin = np.linalg.eigvalsh(h)[0]
    if hmin < -PD_TOL:
        raise NotPositiveDefinite(f"smallest eigenvalue {hmin:.3g}")
    if hmin <= PD_TOL:
        ev = np.linalg.eigvals(symplectic_form(h.shape[0] // 2) @ h)
        eps = np.sort(np.abs(ev.imag))[::2]
        return SymplecticSpectrum(eps, None, False, float(eps[0]))
    eps, s, cov = _diagonalize_double(h)
    return SymplecticSpectrum(eps, s, True, float(eps[0]), cov)


def fluctuation_gap(form):
    """Smallest normal-mode frequency without building the transform.

    Uses the extended-precision copy of ``h`` when present.

    Raises
    ------
    NotPositiveDefinite
        If ``Omega h`` has eigenvalues off the imaginary axis.
    """
    if form.h_hp is not None:
        with mpmath.workdps(form.dps):
            size = form.h_hp.rows
            om = mpmath.zeros(size)
            for i in range(size // 2):
                om[2 * i, 2 * i + 1] = 1
                om[2 * i + 1, 2 * i] = -1
            ev = mpmath.eig(om * form.h_hp, left=False, right=False)
            scale = max(abs(e) for e in ev)
            if max(abs(mpmath.re(e)) for e in ev) > mpmath.mpf(10) ** (-form.dps // 2) * scale:
                raise NotPositiveDefinite("eigenvalues of Omega h are not purely imaginary")
            return float(min(abs(mpmath.im(e)) for e in ev))
    ev = np.linalg.eigvals(symplectic_form(form.h.shape[0] // 2) @ form.h)
    if np.abs(ev.real).max() > 1e-8 * max(1.0, np.abs(ev).max()):
        raise NotPositiveDefinite("eigenvalues of Omega h are not purely imaginary")
    return float(np.abs(ev.imag).min())


def williamson_cholesky(h):
    """Symplectic eigenvalues via the Cholesky route.

    For ``h = L L^T`` the matrix ``L^T Omega L`` is real antisymmetric with
    eigenvalues ``+-i e_j``.  Suitable only for well-conditioned input.
    """
    chol = np.linalg.cholesky(h)
    a = chol.T @ symplectic_form(h.shape[0] // 2) @ chol
    ev = np.linalg.eigvalsh(1j * a)
    return np.sort(ev[ev > 0])


@dataclass(frozen=True)
class CovarianceMatrix:
    """Ground-state covariance ``C = S^T S / 2``."""

    c: np.ndarray


def covariance(spec):
    """Ground-state covariance of a converged spectrum.

    Raises
    ------
    NotPositiveDefinite
        If the spectrum is not converged.
    """
    if not spec.converged:
        raise NotPositiveDefinite("spectrum not converged; covariance undefined")
    c = spec.cov if spec.cov is not None else 0.5 * spec.s.T @ spec.s
    return CovarianceMatrix(0.5 * (c + c.T))


def symplectic_eigenvalues(c):
    """Symplectic eigenvalues of a covariance matrix, ascending."""
    ev = np.linalg.eigvals(1j * symplectic_form(c.shape[0] // 2) @ c)
    ev = np.sort(ev.real)
    return ev[ev > 0]


@dataclass(frozen=True)
class SiteObservables:
    """Per-site fluctuation observables.

    Attributes
    ----------
    photon_number : ndarray
        Fluctuation photon number of every cavity.
    entanglement : ndarray
        Block entropy ``ln det(2 C_n) / 2`` of every site.
    diverged : bool
        True when the gap lies below the resolution floor; values are then
        ``nan``.
    gap : float
    """

    photon_number: np.ndarray
    entanglement: np.ndarray
    diverged: bool
    gap: float


def gap_floor(dps=None):
    """Smallest gap at which observables are reported as finite values.

    ``1e-6`` in double precision; ``10**(-dps/3)`` in extended precision.
    """
    return 1e-6 if dps is None else 10.0 ** (-dps / 3)


def observables(spec, floor=None):
    """Photon numbers and block entropies of the ground state.

    Parameters
    ----------
    spec : SymplecticSpectrum
    floor : float, optional
        Gap below which the result is flagged as diverged; defaults to
        :func:`gap_floor` for the precision of ``spec``.

    Raises
    ------
    NotPositiveDefinite
        If the spectrum is not converged.
    """
    c = covariance(spec).c
    n = c.shape[0] // 4
    floor = gap_floor(spec.dps) if floor is None else floor
    if spec.gap < floor:
        nan = np.full(n, np.nan)
        return SiteObservables(nan, nan.copy(), True, spec.gap)
    photons = np.empty(n)
    ent = np.empty(n)
    if spec.cov_hp is not None:
        with mpmath.workdps(spec.dps):
            ch = spec.cov_hp
            for i in range(n):
                b = ch[4 * i:4 * i + 4, 4 * i:4 * i + 4]
                photons[i] = float((b[0, 0] + b[1, 1] - 1) / 2)
                ent[i] = float(mpmath.log(mpmath.det(2 * b)) / 2)
        return SiteObservables(photons, ent, False, spec.gap)
    for i in range(n):
        b = c[4 * i:4 * i + 4, 4 * i:4 * i + 4]
        photons[i] = 0.5 * (b[0, 0] + b[1, 1] - 1)
        ent[i] = 0.5 * np.linalg.slogdet(2 * b)[1]
    return SiteObservables(photons, ent, False, spec.gap)
