"""Semiclassical energy landscape of the flux Dicke ring.

Quadratures are rescaled so that the energy is measured in units of
``N_a Omega`` and positions are dimensionless.  Eliminating the momentum
quadratures ``y`` leaves the position-only energy

    E(x) = x^T W x - 1/2 sum_n sqrt(1 + 4 g^2 x_n^2),

with a circulant ``W`` whose eigenvalues are ``g_c(q)^2``.  The order
parameters of a ring therefore interact through effective couplings of
every range, and competition between ranges produces frustrated sign
patterns.
"""
from dataclasses import dataclass, field
import itertools

import mpmath
import numpy as np

from .errors import (InvalidParameters, MixedMagnitudes, NonConvergence,
                     SingularCirculant, UnconvergedState)
from .model import critical_coupling

__all__ = [
    "MeanFieldState",
    "EffectiveCouplings",
    "ConfigClass",
    "circulant_spectrum",
    "effective_matrix",
    "mf_energy",
    "mf_gradient",
    "eliminate_y",
    "effective_couplings",
    "effective_energy",
    "reduced_energy",
    "symmetry_images",
    "canonical_signs",
    "local_minimum",
    "minimize",
    "refine",
    "classify",
    "first_order_boundary",
    "even_n_frustration_probe",
    "asymptotic_n3",
]

ZERO_TOL = 1e-8
ENERGY_TOL = 1e-10
GRAD_TOL = 1e-11


def _shift(n):
    # (P x)_n = x_{n+1}
    return np.roll(np.eye(n), 1, axis=1)


def _hopping_matrices(params):
    n = params.n_sites
    jb = params.jbar
    p = _shift(n)
    a = np.eye(n) + jb * np.cos(params.theta) * (p + p.T)
    k = p - p.T
    return a, k


def circulant_spectrum(params):
    """Fourier eigenvalues of the circulant blocks.

    Returns
    -------
    q : ndarray
        Momenta ``2 pi j / N``.
    a_hat : ndarray
        Eigenvalues ``1 + 2 Jbar cos(theta) cos q`` of the ``y``-``y`` block.
    w_hat : ndarray
        Eigenvalues of the eliminated form ``W``, equal to ``g_c(q)^2``.
    """
    n = params.n_sites
    jb = params.jbar
    q = 2 * np.pi * np.arange(n) / n
    a_hat = 1 + 2 * jb * np.cos(params.theta) * np.cos(q)
    if np.min(np.abs(a_hat)) < 1e-14:
        raise SingularCirculant("circulant y-block has a vanishing eigenvalue")
    s = 2 * jb * np.sin(params.theta) * np.sin(q)
    return q, a_hat, a_hat - s * s / a_hat


def effective_matrix(params):
    """Circulant matrix ``W`` of the position-only energy."""
    n = params.n_sites
    q, _, w_hat = circulant_spectrum(params)
    m = np.arange(n)
    row = (w_hat[None, :] * np.cos(np.outer(m, q))).sum(axis=1) / n
    idx = (m[None, :] - m[:, None]) % n
    return row[idx]


def mf_energy(params, x, y):
    """Rescaled mean-field energy of positions ``x`` and momenta ``y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    jb = params.jbar
    c, s = jb * np.cos(params.theta), jb * np.sin(params.theta)
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return float(np.sum(x * x + y * y - 0.5 * np.sqrt(1 + 4 * params.g ** 2 * x * x)
                        + 2 * c * (x * xn + y * yn) + 2 * s * (xn * y - x * yn)))


def mf_gradient(params, x, y):
    """Gradient of :func:`mf_energy` with respect to ``(x, y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a, k = _hopping_matrices(params)
    s = params.jbar * np.sin(params.theta)
    gx = 2 * a @ x - 2 * params.g ** 2 * x / np.sqrt(1 + 4 * params.g ** 2 * x * x) \
        + 2 * s * k.T @ y
    gy = 2 * a @ y + 2 * s * k @ x
    return gx, gy


def eliminate_y(params, x):
    """Momentum quadratures minimising the energy at fixed ``x``.

    Solves the circulant system ``A y = -Jbar sin(theta) (P - P^T) x`` in
    the Fourier basis.
    """
    x = np.asarray(x, dtype=float)
    q, a_hat, _ = circulant_spectrum(params)
    s = params.jbar * np.sin(params.theta)
    y_hat = -s * 2j * np.sin(q) / a_hat * np.fft.fft(x)
    return np.real(np.fft.ifft(y_hat))


@dataclass(frozen=True)
class EffectiveCouplings:
    """Couplings of the position-only energy.

    The energy reads ``sum_n [(1 + J_0) x_n^2 + sum_{m>=1} J_m x_n x_{n+m}]``
    minus the atomic square roots, with every unordered pair at distance
    ``m`` counted once per site.  For a ring without flux ``J_1 = 2 Jbar``.

    Attributes
    ----------
    j_eff : ndarray
        ``J_m`` for ``m = 0 .. N//2``.
    row : ndarray
        First row of the circulant ``W``.
    """

    j_eff: np.ndarray
    row: np.ndarray

    def __getitem__(self, m):
        return self.j_eff[m]


def effective_couplings(params):
    """Effective couplings from the eliminated circulant form."""
    n = params.n_sites
    row = effective_matrix(params)[0]
    jm = np.empty(n // 2 + 1)
    jm[0] = row[0] - 1.0
    jm[1:] = 2 * row[1:n // 2 + 1]
    if n % 2 == 0:
        jm[n // 2] = row[n // 2]
    return EffectiveCouplings(jm, row)


def effective_energy(params, x, couplings=None):
    """Position-only energy evaluated through the effective couplings."""
    x = np.asarray(x, dtype=float)
    c = couplings if couplings is not None else effective_couplings(params)
    e = np.sum((1 + c.j_eff[0]) * x * x - 0.5 * np.sqrt(1 + 4 * params.g ** 2 * x * x))
    for m in range(1, len(c.j_eff)):
        e += c.j_eff[m] * np.sum(x * np.roll(x, -m))
    return float(e)


def reduced_energy(params, x, w=None):
    """Position-only energy ``x^T W x - sum sqrt(1 + 4 g^2 x^2) / 2``."""
    x = np.asarray(x, dtype=float)
    w = effective_matrix(params) if w is None else w
    return float(x @ w @ x - 0.5 * np.sum(np.sqrt(1 + 4 * params.g ** 2 * x * x)))


def _image_index(n):
    base = np.arange(n)
    rows = [np.roll(b, s) for b in (base, (-base) % n) for s in range(n)]
    return np.array(rows)


def _x_images(x):
    # position images under the 4N group elements, shape (4N, N)
    xs = np.asarray(x, dtype=float)[_image_index(len(x))]
    return np.concatenate([xs, -xs])


def symmetry_images(x, y=None):
    """All images under rotations, the flux-compatible reflection and flip.

    The reflection maps ``x_n -> x_{-n}`` and ``y_n -> -y_{-n}``; combined
    with the ``N`` rotations and the global sign flip it generates a group
    of order ``4N``.

    Returns
    -------
    list of (ndarray, ndarray)
    """
    x = np.asarray(x, dtype=float)
    y = np.zeros_like(x) if y is None else np.asarray(y, dtype=float)
    n = len(x)
    idx = _image_index(n)
    ys = y[idx]
    ys[n:] *= -1
    xs = x[idx]
    return [(f * a, f * b) for f in (1.0, -1.0) for a, b in zip(xs, ys)]


def _signs(x):
    return tuple(int(v) for v in np.where(np.abs(x) < ZERO_TOL, 0, np.sign(x)))


def canonical_signs(x):
    """Lexicographically smallest sign pattern over the symmetry orbit."""
    xs = _x_images(x)
    sg = np.where(np.abs(xs) < ZERO_TOL, 0, np.sign(xs)).astype(int)
    return tuple(int(v) for v in sg[np.lexsort(sg.T[::-1])[0]])


def _n_ferro(signs):
    s = np.asarray(signs)
    return int(np.sum((s == np.roll(s, -1)) & (s != 0)))


@dataclass(frozen=True)
class MeanFieldState:
    """Converged (or best) stationary point of the mean-field energy.

    Attributes
    ----------
    params : ModelParams
    x, y : ndarray
        Rescaled position and momentum quadratures.
    energy : float
        Rescaled energy.
    converged : bool
        Stationarity tolerance met and Hessian positive semidefinite.
    grad_norm : float
        Max-norm of the gradient of the position-only energy.
    hess_min : float
        Smallest Hessian eigenvalue of the position-only energy.
    minima : tuple of ndarray
        Distinct minima found within the energy tolerance of the ground
        energy, including ``x``.
    x_hp : tuple or None
        Extended-precision positions (``mpmath.mpf``) when refined.
    dps : int or None
        Decimal precision of ``x_hp``.
    """

    params: object
    x: np.ndarray
    y: np.ndarray
    energy: float
    converged: bool = True
    grad_norm: float = 0.0
    hess_min: float = np.inf
    minima: tuple = field(default=(), repr=False)
    x_hp: tuple = field(default=None, repr=False)
    dps: int = None

    @property
    def is_normal(self):
        """True when every order parameter vanishes."""
        return bool(np.all(np.abs(self.x) < ZERO_TOL))

    @property
    def spin_angles(self):
        """Per-site ``(theta_n, phi_n)`` of the collective atomic spins.

        ``cos theta_n = -1/sqrt(1 + 4 g^2 x_n^2)`` and
        ``cos phi_n = -sign(x_n)``, with ``phi_n = 0`` at ``x_n = 0``.
        """
        g = self.params.g
        th = np.arccos(-1 / np.sqrt(1 + 4 * g * g * self.x ** 2))
        ph = np.where(self.x > 0, np.pi, 0.0)
        return np.column_stack([th, ph])


def _energies_batch(w, g2, xs):
    r = np.sqrt(1 + 4 * g2 * xs * xs)
    return np.einsum("ij,jk,ik->i", xs, w, xs) - 0.5 * r.sum(axis=1)


def _descend(w, g, xs, tol=GRAD_TOL, maxiter=10_000):
    """Batched modified-Newton descent on the position-only energy."""
    xs = np.array(xs, dtype=float, copy=True)
    g2 = g * g
    e = _energies_batch(w, g2, xs)
    for _ in range(maxiter):
        r = np.sqrt(1 + 4 * g2 * xs * xs)
        grad = 2 * xs @ w - 2 * g2 * xs / r
        active = np.abs(grad).max(axis=1) > tol
        if not active.any():
            break
        idx = np.flatnonzero(active)
        hess = 2 * w[None] - (2 * g2 / r[idx] ** 3)[:, :, None] * np.eye(len(w))
        lam, vec = np.linalg.eigh(hess)
        lam = np.maximum(np.abs(lam), 1e-10)
        gi = grad[idx]
        step = -np.einsum("bij,bj->bi", vec, np.einsum("bji,bj->bi", vec, gi) / lam)
        slope = np.einsum("bi,bi->b", gi, step)
        t = np.ones(len(idx))
        x0, e0 = xs[idx], e[idx]
        for _ in range(60):
            xn = x0 + t[:, None] * step
            en = _energies_batch(w, g2, xn)
            ok = en <= e0 + 1e-4 * t * slope + 1e-13 * np.maximum(1, np.abs(e0))
            if ok.all():
                break
            t = np.where(ok, t, 0.5 * t)
        xs[idx], e[idx] = xn, en
    r = np.sqrt(1 + 4 * g2 * xs * xs)
    grad = 2 * xs @ w - 2 * g2 * xs / r
    hess = 2 * w[None] - (2 * g2 / r ** 3)[:, :, None] * np.eye(len(w))
    hmin = np.linalg.eigvalsh(hess)[:, 0]
    return xs, _energies_batch(w, g2, xs), np.abs(grad).max(axis=1), hmin


def local_minimum(params, x0, w=None):
    """Local descent of the position-only energy from ``x0``.

    Returns
    -------
    x : ndarray
    energy : float
        Position-only energy at ``x``.
    grad_norm, hess_min : float
    """
    w = effective_matrix(params) if w is None else w
    xs, e, gn, hm = _descend(w, params.g, np.atleast_2d(x0))
    return xs[0], float(e[0]), float(gn[0]), float(hm[0])


def _uniform_amplitude(params, w_min):
    g = params.g
    if g == 0 or g * g <= w_min:
        return 0.0
    return np.sqrt((g * g / w_min) ** 2 - 1) / (2 * g)


def _starts(params, restarts, seed, w_min):
    n = params.n_sites
    amp = max(_uniform_amplitude(params, w_min), 1e-3)
    starts = []
    if n <= 12:
        starts += [amp * np.array(s) for s in itertools.product((1.0, -1.0), repeat=n)]
    for i in range(restarts):
        rng = np.random.default_rng([seed, i])
        signs = rng.choice((-1.0, 1.0), size=n)
        starts.append(amp * signs * (1 + 0.5 * rng.standard_normal(n)))
    if n == 3:
        ax = asymptotic_n3(params, params.g, strict=False)
        if ax is not None:
            starts += [ix for ix, _ in symmetry_images(ax)]
    return np.array(starts)


def _unique(xs, tol=1e-7):
    out = []
    for x in xs:
        if not out or np.abs(np.asarray(out) - x).max(axis=1).min() >= tol:
            out.append(x)
    return out


def _state(params, x, converged, grad_norm, hess_min, minima=(), x_hp=None, dps=None):
    y = eliminate_y(params, x)
    return MeanFieldState(params, x, y, mf_energy(params, x, y), converged,
                          grad_norm, hess_min, tuple(minima), x_hp, dps)


def minimize(params, restarts=8, seed=0, dps=None, start=None):
    """Global minimiser of the mean-field energy.

    Below the critical coupling the origin is returned directly: the
    energy is bounded below by ``x^T (W - g^2) x - N/2``, which is
    minimised at the origin when ``g^2`` does not exceed the smallest
    eigenvalue of ``W``.  Above it, a batched modified-Newton descent runs
    from every sign pattern at the uniform amplitude, from ``restarts``
    random perturbations, and for ``N = 3`` from the near-critical series.

    Parameters
    ----------
    params : ModelParams
    restarts : int
        Number of random starts (``>= 1``).
    seed : int
        Seed of the counter-based random stream.
    dps : int, optional
        When given, the selected minimiser is polished by Newton iteration
        at this decimal precision.
    start : array_like, optional
        Skip the global search and descend locally from this point.  With
        ``dps`` the descent runs directly in extended precision, so ``start``
        may hold ``mpmath.mpf`` entries (continuation along a series).

    Raises
    ------
    NonConvergence
        If no start reaches the stationarity tolerance; ``best`` holds the
        best candidate.
    """
    if restarts < 1:
        raise InvalidParameters("restarts must be >= 1")
    n = params.n_sites
    if start is not None and dps is not None:
        xf = np.array([float(v) for v in start])
        seed_state = MeanFieldState(params, xf, np.zeros(n), np.nan, x_hp=tuple(start))
        return refine(seed_state, dps)
    w = effective_matrix(params)
    w_min = float(np.linalg.eigvalsh(w)[0])
    if start is None and params.g ** 2 <= w_min:
        x = np.zeros(n)
        return _state(params, x, True, 0.0, float(2 * w_min - 2 * params.g ** 2))
    xs0 = _starts(params, restarts, seed, w_min) if start is None else np.atleast_2d(start)
    xs, e, gn, hm = _descend(w, params.g, xs0)
    ok = (gn < GRAD_TOL) & (hm > -1e-8)
    if not ok.any():
        i = int(np.argmin(np.where(hm > -1e-8, e, np.inf))) if (hm > -1e-8).any() \
            else int(np.argmin(e))
        best = _state(params, xs[i], False, float(gn[i]), float(hm[i]))
        raise NonConvergence(f"no start converged (best |grad| = {gn[i]:.3g})", best)
    e0 = e[ok].min()
    cand = [x for x, ei, oi in zip(xs, e, ok) if oi and ei <= e0 + ENERGY_TOL]
    minima = _unique(cand)
    images = _unique(np.concatenate([_x_images(x) for x in minima]))
    x = min(images, key=lambda v: (_signs(v), tuple(v)))
    _, _, gnx, hmx = _descend(w, params.g, x[None])
    state = _state(params, x, True, float(gnx[0]), float(hmx[0]), minima)
    if dps is not None:
        state = refine(state, dps)
    return state


def _hp_matrix(params):
    n = params.n_sites
    jb = mpmath.mpf(params.j_hop) / mpmath.mpf(params.omega)
    th = mpmath.mpf(params.theta)
    p = mpmath.zeros(n)
    for i in range(n):
        p[i, (i + 1) % n] = 1
    a = mpmath.eye(n) + jb * mpmath.cos(th) * (p + p.T)
    k = p - p.T
    return a + (jb * mpmath.sin(th)) ** 2 * k * mpmath.inverse(a) * k


def refine(state, dps=50, maxiter=200):
    """Polish a minimiser by Newton iteration in extended precision.

    The position-only energy is minimised with ``mpmath`` at ``dps``
    decimal digits starting from ``state.x_hp`` (if present) or
    ``state.x``.  Very close to a critical point the Hessian of a
    frustrated configuration has eigenvalues far below double-precision
    resolution, so this is required for asymptotic scaling studies.

    Raises
    ------
    NonConvergence
        If the Newton iteration stalls or ends on a non-minimum.
    """
    params = state.params
    n = params.n_sites
    with mpmath.workdps(dps):
        w = _hp_matrix(params)
        g2 = mpmath.mpf(params.g) ** 2
        src = state.x_hp if state.x_hp is not None else state.x
        x = mpmath.matrix([mpmath.mpf(v) for v in src])
        if all(abs(v) < ZERO_TOL for v in x):
            x_hp = tuple(mpmath.mpf(0) for _ in range(n))
            return MeanFieldState(params, state.x, state.y, state.energy,
                                  state.converged, state.grad_norm,
                                  state.hess_min, state.minima, x_hp, dps)
        tiny = mpmath.mpf(10) ** (-dps + 8)
        loose = mpmath.mpf(10) ** (-dps // 3)
        prev = mpmath.inf
        for _ in range(maxiter):
            r = [mpmath.sqrt(1 + 4 * g2 * x[i] ** 2) for i in range(n)]
            grad = 2 * w * x - mpmath.matrix([2 * g2 * x[i] / r[i] for i in range(n)])
            hess = 2 * w - mpmath.diag([2 * g2 / r[i] ** 3 for i in range(n)])
            dx = mpmath.lu_solve(hess, grad)
            x = x - dx
            step = mpmath.norm(dx, mpmath.inf) / (1 + mpmath.norm(x, mpmath.inf))
            # stop at full precision, or once the step stalls at the
            # conditioning limit of a soft mode
            if step < tiny or (step < loose and step >= prev / 2):
                break
            prev = step
        else:
            raise NonConvergence("extended-precision Newton did not converge", state)
        r = [mpmath.sqrt(1 + 4 * g2 * x[i] ** 2) for i in range(n)]
        hess = 2 * w - mpmath.diag([2 * g2 / r[i] ** 3 for i in range(n)])
        hmin = min(mpmath.eigsy(hess, eigvals_only=True))
        grad = 2 * w * x - mpmath.matrix([2 * g2 * x[i] / r[i] for i in range(n)])
        gnorm = float(mpmath.norm(grad, mpmath.inf))
        if hmin < 0:
            raise NonConvergence(
                f"extended-precision stationary point is a saddle ({float(hmin):.3g})", state)
        x_hp = tuple(x[i] for i in range(n))
    xf = np.array([float(v) for v in x_hp])
    out = _state(params, xf, True, gnorm, float(hmin), state.minima or (xf,), x_hp, dps)
    return out


@dataclass(frozen=True)
class ConfigClass:
    """Sign structure of a mean-field ground state.

    Attributes
    ----------
    signs : tuple of int
        Signs of ``x_n`` in the state's orientation (zeros in the normal
        phase).
    n_ferro_pairs : int
        Neighbouring pairs with equal nonzero sign.
    degeneracy : int
        Number of distinct ground states related by symmetry or exact
        degeneracy.
    frustrated : bool
        Neither the nearest- nor the next-nearest-neighbour effective
        coupling has all of its bonds satisfied.
    canonical : tuple of int
        Orbit representative of ``signs`` (lexicographically smallest).
    """

    signs: tuple
    n_ferro_pairs: int
    degeneracy: int
    frustrated: bool
    canonical: tuple = ()


def _satisfies(j, s, m):
    # every bond of range m has the sign favoured by the coupling j
    return abs(j) < 1e-12 or bool(np.all(j * s * np.roll(s, -m) <= 0))


def _frustrated(params, signs):
    # frustrated when the pattern is a perfect ground state of neither of the
    # two dominant ranges, nearest and next-nearest neighbour
    c = effective_couplings(params).j_eff
    s = np.asarray(signs)
    return not any(_satisfies(c[m], s, m) for m in range(1, min(3, len(c))))


def classify(state):
    """Sign pattern, ferromagnetic pairs, frustration and degeneracy.

    The degeneracy is counted by enumerating the symmetry orbits of every
    ground state found, descending again from each image, and keeping the
    distinct minima whose energy agrees with the ground energy to 1e-10.

    Raises
    ------
    UnconvergedState
        If the state did not converge.
    MixedMagnitudes
        If some order parameters vanish and others do not.
    """
    if not state.converged:
        raise UnconvergedState("cannot classify an unconverged state")
    params = state.params
    small = np.abs(state.x) < ZERO_TOL
    if small.all():
        zeros = (0,) * params.n_sites
        return ConfigClass(zeros, 0, 1, False, zeros)
    if small.any():
        raise MixedMagnitudes(f"order parameters {state.x} mix zero and nonzero")
    w = effective_matrix(params)
    e0 = reduced_energy(params, state.x, w)
    seeds = list(state.minima) or [state.x]
    images = _unique(np.concatenate([_x_images(x) for x in _unique(seeds + [state.x])]))
    xs, e, gn, hm = _descend(w, params.g, np.array(images))
    keep = [x for x, ei, gi, hi in zip(xs, e, gn, hm)
            if abs(ei - e0) <= ENERGY_TOL and gi < 1e-9 and hi > -1e-8]
    signs = _signs(state.x)
    return ConfigClass(signs, _n_ferro(signs), len(_unique(keep)),
                       _frustrated(params, signs), canonical_signs(state.x))


def _side(params, theta, xa, xb, w_cache=None):
    p = params.replace(theta=theta)
    w = effective_matrix(p)
    xs, e, gn, hm = _descend(w, p.g, np.array([xa, xb]))
    ca, cb = canonical_signs(xs[0]), canonical_signs(xs[1])
    if ca == cb:
        return ca, xs[0], xs[1]
    return (ca if e[0] <= e[1] else cb), xs[0], xs[1]


def first_order_boundary(params, g, theta_range=(1e-3, np.pi - 1e-3), steps=256,
                         tol=1e-6, restarts=4, seed=0):
    """Flux values where the ground-state sign class jumps at coupling ``g``.

    The flux range is scanned on a uniform grid; wherever two neighbouring
    superradiant points belong to different classes the crossing of the two
    competing local minima is bisected to ``tol``.

    Returns
    -------
    list of (float, tuple, tuple)
        ``(theta, class_left, class_right)`` for every boundary found.
    """
    thetas = np.linspace(*theta_range, steps)
    base = params.replace(g=g)
    rows = []
    for th in thetas:
        p = base.replace(theta=th)
        st = minimize(p, restarts=restarts, seed=seed)
        rows.append(None if st.is_normal else (canonical_signs(st.x), st.x))
    out = []
    for (ta, ra), (tb, rb) in zip(zip(thetas[:-1], rows[:-1]), zip(thetas[1:], rows[1:])):
        if ra is None or rb is None or ra[0] == rb[0]:
            continue
        lo, hi, xa, xb = ta, tb, ra[1], rb[1]
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            side, xa_new, xb_new = _side(base, mid, xa, xb)
            if side == ra[0]:
                lo, xa = mid, xa_new
            elif side == rb[0]:
                hi, xb = mid, xb_new
            else:
                break
        out.append((0.5 * (lo + hi), ra[0], rb[0]))
    return out


def even_n_frustration_probe(params, restarts=8, seed=0):
    """Classify the ground state of an even ring and check the parity rule.

    Frustration of an even ring is expected only when ``N/2`` is odd and
    the next-nearest coupling is antiferromagnetic (``J_2 > 0``), since only
    then can its bonds not all be satisfied.

    Raises
    ------
    AssertionError
        If a frustrated class appears outside that window.
    """
    if params.n_sites % 2:
        raise InvalidParameters("even_n_frustration_probe needs an even ring")
    cls = classify(minimize(params, restarts=restarts, seed=seed))
    if cls.frustrated:
        c = effective_couplings(params).j_eff
        if not ((params.n_sites // 2) % 2 == 1 and c[2] > 0):
            raise AssertionError(
                f"frustration outside the parity window: N={params.n_sites}, J={c}")
    return cls


def asymptotic_n3(params, g, strict=True):
    """Leading near-critical minimiser of a frustrated three-site ring.

    With ``w_0, w_1`` the entries of the circulant ``W`` and
    ``g_c^2 = w_0 - w_1`` (``w_1 > 0``), the minimiser for
    ``d = g - g_c > 0`` is, up to symmetry,

        x_1 = x_2 = d^(1/2) / (sqrt3 g_c^(3/2))
                    + (1 + 8 g_c^2 / w_1) d^(3/2) / (12 sqrt3 g_c^(5/2)),
        x_3 = -2 d^(1/2) / (sqrt3 g_c^(3/2)) - d^(3/2) / (6 sqrt3 g_c^(5/2)),

    with corrections of order ``d^(5/2)``.  Without flux ``w_0 = 1`` and
    ``w_1 = Jbar``, and the ``x_1`` coefficient becomes
    ``(8 - 7 Jbar) / Jbar``.

    Returns
    -------
    ndarray or None
        ``(x_1, x_2, x_3)``; ``None`` (or an error when ``strict``) outside
        the frustrated regime or below the critical coupling.
    """
    if params.n_sites != 3:
        if strict:
            raise InvalidParameters("asymptotic series is for N = 3")
        return None
    row = effective_matrix(params)[0]
    w1 = row[1]
    gc = float(critical_coupling(params, 2 * np.pi / 3))
    d = g - gc
    if w1 <= 0 or d <= 0:
        if strict:
            raise InvalidParameters("series needs w_1 > 0 and g > g_c")
        return None
    r3 = np.sqrt(3.0)
    lead = np.sqrt(d) / (r3 * gc ** 1.5)
    x1 = lead + (1 + 8 * gc * gc / w1) * d ** 1.5 / (12 * r3 * gc ** 2.5)
    x3 = -2 * lead - d ** 1.5 / (6 * r3 * gc ** 2.5)
    return np.array([x1, x1, x3])
