"""Model parameters, dispersion and critical couplings of the flux Dicke ring.

The lattice is a ring of ``N`` cavities, each coupled to an ensemble of
two-level atoms, with complex nearest-neighbour photon hopping
``J exp(i theta)``.  Momenta are ``k_j = -2 pi j / N`` folded into
``(-pi, pi]``.
"""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidParameters, NoRootInInterval

__all__ = [
    "ModelParams",
    "MomentumGrid",
    "CriticalMode",
    "momentum_grid",
    "fold_momentum",
    "omega_k",
    "dispersion",
    "delta_shift",
    "critical_coupling",
    "critical_coupling_sq",
    "critical_mode",
    "flux_critical_point",
    "flux_critical_points",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical couplings and lattice size.

    Parameters
    ----------
    n_sites : int
        Number of cavities ``N >= 3``.
    theta : float
        Flux per link in radians, ``0 <= theta <= pi``.  Flux-dependent
        operations require the open interval.
    g : float
        Dimensionless light-matter coupling ``2 lambda / sqrt(omega Omega)``.
    j_hop : float
        Hopping magnitude ``J`` in the same units as ``omega``.
    omega : float
        Cavity frequency, the unit of energy.
    omega_atom : float
        Atomic transition frequency ``Omega``.
    """

    n_sites: int
    theta: float
    g: float = 0.0
    j_hop: float = 0.1
    omega: float = 1.0
    omega_atom: float = 50.0

    def __post_init__(self):
        bad = []
        if int(self.n_sites) != self.n_sites or self.n_sites < 3:
            bad.append(f"n_sites={self.n_sites} must be an integer >= 3")
        if not self.omega > 0:
            bad.append(f"omega={self.omega} must be positive")
        if not self.omega_atom > 0:
            bad.append(f"omega_atom={self.omega_atom} must be positive")
        if not self.j_hop >= 0:
            bad.append(f"j_hop={self.j_hop} must be non-negative")
        elif not self.omega > 2 * self.j_hop:
            bad.append(f"omega={self.omega} must exceed 2*j_hop={2 * self.j_hop}")
        if not 0.0 <= self.theta <= np.pi:
            bad.append(f"theta={self.theta} must lie in [0, pi]")
        if not self.g >= 0:
            bad.append(f"g={self.g} must be non-negative")
        if bad:
            raise InvalidParameters("; ".join(bad))
        object.__setattr__(self, "n_sites", int(self.n_sites))

    @property
    def jbar(self):
        """Hopping in units of the cavity frequency."""
        return self.j_hop / self.omega

    @property
    def lam(self):
        """Light-matter coupling ``lambda = g sqrt(omega Omega) / 2``."""
        return 0.5 * self.g * np.sqrt(self.omega * self.omega_atom)

    def replace(self, **changes):
        """Return a copy with some fields replaced."""
        return replace(self, **changes)

    def require_open_flux(self):
        """Raise unless ``theta`` lies strictly inside ``(0, pi)``."""
        if not 0.0 < self.theta < np.pi:
            raise InvalidParameters(
                f"theta={self.theta} must lie strictly inside (0, pi) here")


def fold_momentum(k):
    """Fold momenta into ``(-pi, pi]``."""
    k = np.asarray(k, dtype=float)
    out = np.pi - np.mod(np.pi - k, 2 * np.pi)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MomentumGrid:
    """Allowed momenta ``k_j = -2 pi j / N`` for ``j = 0 .. N-1``.

    Attributes
    ----------
    n : int
        Lattice size.
    values : ndarray
        Folded momenta, indexed by ``j``.
    """

    n: int
    values: np.ndarray = field(repr=False)

    def pair_indices(self):
        """Indices ``j = 0 .. N//2`` labelling the pairs ``{k_j, -k_j}``."""
        return list(range(self.n // 2 + 1))

    def is_self_conjugate(self, j):
        """True when ``k_j = -k_j`` modulo ``2 pi``."""
        return (2 * j) % self.n == 0

    def partner(self, j):
        """Index of ``-k_j``."""
        return (-j) % self.n


def momentum_grid(n):
    """Build the momentum grid of an ``n``-site ring."""
    j = np.arange(n)
    k = fold_momentum(-2 * np.pi * j / n)
    k[0] = 0.0
    return MomentumGrid(n, k)


def omega_k(omega, j_hop, theta, k):
    """Cavity dispersion ``omega + 2 J cos(theta - k)``."""
    return omega + 2 * j_hop * np.cos(theta - np.asarray(k, dtype=float))


def dispersion(params, k):
    """Photon dispersion of the ring at momentum ``k``."""
    return omega_k(params.omega, params.j_hop, params.theta, k)


def delta_shift(params, k):
    """Half-difference ``(omega_k - omega_-k) / 4 = J sin(theta) sin(k)``."""
    return params.j_hop * np.sin(params.theta) * np.sin(np.asarray(k, dtype=float))


def _sum_prod(params, k):
    # omega_k + omega_-k and omega_k * omega_-k, written to be exactly even in k
    k = np.asarray(k, dtype=float)
    c = params.omega + 2 * params.j_hop * np.cos(params.theta) * np.cos(k)
    s = 2 * params.j_hop * np.sin(params.theta) * np.sin(k)
    return 2 * c, c * c - s * s


def critical_coupling_sq(params, k):
    """Square of the critical coupling ``g_c(k)``."""
    tot, prod = _sum_prod(params, k)
    return 2 * prod / (params.omega * tot)


def critical_coupling(params, k):
    """Coupling at which the ``{k, -k}`` normal-phase block goes soft.

    Returns
    -------
    float or ndarray
        ``sqrt(2 omega_k omega_-k / (omega (omega_k + omega_-k)))``.
    """
    return np.sqrt(critical_coupling_sq(params, k))


@dataclass(frozen=True)
class CriticalMode:
    """Softest momentum sector of the normal phase.

    Attributes
    ----------
    k : float
        Critical momentum ``k_j``.
    index : int
        Its index ``j``.
    g_c : float
        Critical coupling ``min_j g_c(k_j)``.
    degenerate : bool
        True when several sectors tie within the tolerance.
    tied : tuple of int
        Indices of all tied sectors (contains ``index``).
    """

    k: float
    index: int
    g_c: float
    degenerate: bool = False
    tied: tuple = ()


def critical_mode(params, tie_tol=1e-9):
    """Find the momentum sector that becomes critical first.

    The minimum runs over ``j = 0 .. N//2``, which covers every pair
    ``{k, -k}`` including ``k = pi`` for even ``N``.
    """
    params.require_open_flux()
    grid = momentum_grid(params.n_sites)
    idx = grid.pair_indices()
    gc = critical_coupling(params, grid.values[idx])
    best = int(np.argmin(gc))
    tied = tuple(j for j, v in zip(idx, gc) if abs(v - gc[best]) <= tie_tol)
    return CriticalMode(float(grid.values[best]), best, float(gc[best]),
                        len(tied) > 1, tied)


def _gc_difference(params, k_i, k_j):
    def f(theta):
        p = params.replace(theta=theta)
        return float(critical_coupling(p, k_i) - critical_coupling(p, k_j))
    return f


def _brackets(f, lo, hi, steps):
    grid = np.linspace(lo, hi, steps + 1)
    vals = np.array([f(t) for t in grid])
    if np.all(np.abs(vals) <= 1e-15):
        return []
    out = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            out.append((a, a))
        elif fa * fb < 0:
            out.append((a, b))
    return out


def flux_critical_point(params, k_i, k_j, tol=1e-12):
    """Flux at which sectors ``k_i`` and ``k_j`` share the same ``g_c``.

    Brackets are located on a grid of spacing ``pi/1024`` and refined with
    Brent's method.  When several roots exist the smallest is returned.

    Raises
    ------
    NoRootInInterval
        If no sign change is found or the residual exceeds ``tol``.
    """
    if np.isclose(fold_momentum(k_i), fold_momentum(k_j)):
        raise InvalidParameters("k_i and k_j must differ")
    f = _gc_difference(params, k_i, k_j)
    eps = 1e-9
    brackets = _brackets(f, eps, np.pi - eps, 1024)
    if not brackets:
        raise NoRootInInterval(
            f"g_c({k_i}) - g_c({k_j}) has no isolated sign change on (0, pi)")
    a, b = brackets[0]
    root = a if a == b else brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    if abs(f(root)) >= tol:
        raise NoRootInInterval(f"residual {abs(f(root)):.3g} above {tol}")
    return float(root)


def flux_critical_points(params):
    """Flux critical points between neighbouring sectors.

    Returns
    -------
    list of float
        ``[theta(k1,k0), theta(k2,k1), ...]`` for ``j = 0 .. (N-1)//2 - 1``,
        strictly decreasing.
    """
    grid = momentum_grid(params.n_sites)
    out = []
    for j in range((params.n_sites - 1) // 2):
        out.append(flux_critical_point(params, grid.values[j + 1], grid.values[j]))
    if any(b >= a for a, b in zip(out[:-1], out[1:])):
        raise NoRootInInterval(f"flux critical points not ordered: {out}")
    return out
