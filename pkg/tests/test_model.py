import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from dickeflux.errors import InvalidParameters, NoRootInInterval
from dickeflux.model import (ModelParams, critical_coupling, critical_mode, delta_shift,
                             dispersion, flux_critical_point, flux_critical_points,
                             fold_momentum, momentum_grid)

thetas = st.floats(1e-3, np.pi - 1e-3)
momenta = st.floats(-np.pi, np.pi)
hops = st.floats(0.0, 0.45)


def _gc_oracle(theta, k, j_hop=0.1, omega=1.0):
    # independent extended-precision evaluation straight from the dispersion
    wk = omega + 2 * j_hop * mpmath.cos(theta - k)
    wm = omega + 2 * j_hop * mpmath.cos(theta + k)
    return mpmath.sqrt(2 * wk * wm / (omega * (wk + wm)))


def _theta_c_oracle(n, j):
    ki, kj = -2 * mpmath.pi * (j + 1) / n, -2 * mpmath.pi * j / n
    with mpmath.workdps(40):
        f = lambda t: _gc_oracle(t, ki) - _gc_oracle(t, kj)
        grid = [mpmath.mpf(i) / 2000 * mpmath.pi for i in range(1, 2000)]
        for a, b in zip(grid[:-1], grid[1:]):
            if f(a) * f(b) < 0:
                return float(mpmath.findroot(f, (a, b), solver="anderson"))
    raise AssertionError("oracle found no root")


class TestParams:
    def test_defaults(self):
        p = ModelParams(3, 0.5)
        assert (p.omega, p.j_hop, p.omega_atom, p.g) == (1.0, 0.1, 50.0, 0.0)
        assert p.jbar == pytest.approx(0.1)

    def test_lambda(self):
        p = ModelParams(3, 0.5, g=1.0, omega_atom=4.0)
        assert p.lam == pytest.approx(1.0)

    def test_all_violations_listed(self):
        with pytest.raises(InvalidParameters) as exc:
            ModelParams(2, 4.0, g=-1.0, j_hop=0.6)
        msg = str(exc.value)
        for key in ("n_sites", "theta", "g=", "omega="):
            assert key in msg

    def test_open_flux_required(self):
        with pytest.raises(InvalidParameters):
            critical_mode(ModelParams(3, 0.0))


class TestDispersion:
    def test_examples(self):
        assert dispersion(ModelParams(3, np.pi / 2), 0.0) == pytest.approx(1.0, abs=1e-15)
        assert dispersion(ModelParams(3, 0.0), 0.0) == pytest.approx(1.2)
        ref = 1 + 0.2 * np.cos(11 * np.pi / 12)
        assert dispersion(ModelParams(3, np.pi / 4), -2 * np.pi / 3) == pytest.approx(ref, abs=1e-12)
        assert ref == pytest.approx(0.806815, abs=1e-6)

    def test_shift_examples(self):
        assert delta_shift(ModelParams(3, 1.0), 0.0) == 0.0
        val = delta_shift(ModelParams(3, np.pi / 2), 2 * np.pi / 3)
        assert val == pytest.approx(0.086603, abs=1e-6)
        assert abs(delta_shift(ModelParams(3, np.pi), 1.0)) < 1e-15

    @given(thetas, momenta, hops)
    def test_shift_is_half_difference(self, theta, k, j):
        p = ModelParams(3, theta, j_hop=j)
        diff = (dispersion(p, k) - dispersion(p, -k)) / 4
        assert delta_shift(p, k) == pytest.approx(diff, abs=1e-14)

    @given(thetas, momenta)
    def test_flux_reversal(self, theta, k):
        p = ModelParams(3, theta)
        mirrored = dispersion(p.replace(theta=np.pi - theta), k)
        assert mirrored == pytest.approx(2 * p.omega - dispersion(p, -k), abs=1e-13)

    def test_grid(self):
        grid = momentum_grid(4)
        assert np.allclose(grid.values, [0, -np.pi / 2, np.pi, np.pi / 2])
        assert grid.is_self_conjugate(2) and not grid.is_self_conjugate(1)
        assert grid.pair_indices() == [0, 1, 2]
        assert grid.partner(1) == 3
        assert fold_momentum(-np.pi) == pytest.approx(np.pi)


class TestCriticalCoupling:
    def test_examples(self):
        assert critical_coupling(ModelParams(3, 1.0, j_hop=0.0), 0.7) == pytest.approx(1.0)
        assert critical_coupling(ModelParams(3, 0.0), 0.0) == pytest.approx(np.sqrt(1.2))
        val = critical_coupling(ModelParams(3, np.pi / 2), -2 * np.pi / 3)
        assert val == pytest.approx(np.sqrt(0.97), abs=1e-12)
        assert val == pytest.approx(0.984886, abs=1e-6)

    @given(thetas, momenta, hops)
    def test_even_in_k(self, theta, k, j):
        p = ModelParams(3, theta, j_hop=j)
        assert critical_coupling(p, k) == critical_coupling(p, -k)

    @given(thetas, momenta)
    def test_matches_oracle(self, theta, k):
        p = ModelParams(3, theta)
        assert critical_coupling(p, k) == pytest.approx(float(_gc_oracle(theta, k)), abs=1e-14)

    def test_critical_mode_examples(self):
        assert critical_mode(ModelParams(3, 3 * np.pi / 4)).index == 0
        cm = critical_mode(ModelParams(3, np.pi / 4))
        assert cm.k == pytest.approx(-2 * np.pi / 3) and not cm.degenerate

    def test_critical_mode_n5_swap(self):
        p = ModelParams(5, 1.0)
        tc = flux_critical_points(p)[1]
        assert critical_mode(p.replace(theta=tc - 1e-3)).index == 2
        assert critical_mode(p.replace(theta=tc + 1e-3)).index == 1

    def test_even_ring_includes_pi(self):
        # k = pi is a pair of its own for even N and becomes critical at small flux
        cm = critical_mode(ModelParams(4, 0.05))
        assert cm.index == 2 and cm.k == pytest.approx(np.pi)

    def test_ties_reported(self):
        p = ModelParams(3, 1.0)
        tc = flux_critical_point(p, -2 * np.pi / 3, 0.0)
        cm = critical_mode(p.replace(theta=tc))
        assert cm.degenerate and set(cm.tied) == {0, 1}


class TestFluxCriticalPoints:
    # frozen from the 40-digit oracle above
    FROZEN = {3: [1.669030454236297], 5: [1.8228225194779253, 1.4735200264285657]}

    @pytest.mark.parametrize("n", [3, 5])
    def test_frozen(self, n):
        assert flux_critical_points(ModelParams(n, 1.0)) == pytest.approx(self.FROZEN[n], abs=1e-12)

    @pytest.mark.parametrize("n,j", [(3, 0), (5, 0), (5, 1), (7, 2)])
    def test_oracle(self, n, j):
        got = flux_critical_points(ModelParams(n, 1.0))[j]
        assert got == pytest.approx(_theta_c_oracle(n, j), abs=1e-12)

    @pytest.mark.parametrize("n", [3, 5, 7, 9])
    def test_decreasing(self, n):
        pts = flux_critical_points(ModelParams(n, 1.0))
        assert len(pts) == (n - 1) // 2
        assert all(b < a for a, b in zip(pts[:-1], pts[1:]))

    def test_ties_gc(self):
        p = ModelParams(3, 1.0)
        tc = flux_critical_points(p)[0]
        q = p.replace(theta=tc)
        assert critical_coupling(q, 0.0) == pytest.approx(critical_coupling(q, -2 * np.pi / 3), abs=1e-12)

    def test_no_hopping_fails(self):
        with pytest.raises(NoRootInInterval):
            flux_critical_point(ModelParams(3, 1.0, j_hop=0.0), -2 * np.pi / 3, 0.0)

    def test_same_momentum_rejected(self):
        with pytest.raises(InvalidParameters):
            flux_critical_point(ModelParams(3, 1.0), 0.5, 0.5)
