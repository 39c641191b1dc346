"""Band structure, quench angles and resonance roots.

Frozen values below are computed from the closed dispersion formulas by
hand (see the literal expressions in the comments), never read back from
the code under test.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quenchclock import (
    GaplessMode,
    ModelSpec,
    OutOfBand,
    QuenchSpec,
    VanHoveSingularity,
    band_edges,
    bogoliubov_angle,
    density_of_states,
    dispersion,
    energy_roots,
    group_velocity,
    mode_state,
)

SQRT2 = math.sqrt(2.0)


class TestDispersion:
    def test_chain_frozen_points(self):
        # eps = 2 sqrt((h-cos k)^2 + kappa^2 sin^2 k)
        m = ModelSpec.ising(h=2.0, kappa=1.0)
        assert dispersion(m, math.pi / 2) == pytest.approx(2.0 * math.sqrt(5.0), rel=1e-15)
        # u = 0.75: 2 sqrt((0.5-0.75)^2 + (1-0.75^2)) = sqrt(2)
        m2 = ModelSpec.ising(h=0.5, kappa=1.0)
        assert dispersion(m2, math.acos(0.75)) == pytest.approx(SQRT2, rel=1e-14)
        # and the post-quench value at the same momentum: exactly 2
        m3 = ModelSpec.ising(h=1.5, kappa=1.0)
        assert dispersion(m3, math.acos(0.75)) == pytest.approx(2.0, rel=1e-14)

    def test_ring_frozen_point(self):
        # eps = sqrt((2 t cos k)^2 + V^2) = sqrt(2) at k = pi/3, t = V = 1
        m = ModelSpec.xx_ring(t=1.0, V=1.0)
        assert dispersion(m, math.pi / 3) == pytest.approx(SQRT2, rel=1e-15)

    def test_vectorized(self):
        m = ModelSpec.ising(h=0.7, kappa=0.4)
        ks = np.linspace(0.0, math.pi, 7)
        eps = dispersion(m, ks)
        assert eps.shape == ks.shape
        assert eps[0] == pytest.approx(2.0 * abs(0.7 - 1.0))

    def test_group_velocity_matches_finite_difference(self):
        m = ModelSpec.ising(h=1.3, kappa=0.8)
        k = 1.1
        dk = 1e-6
        fd = (dispersion(m, k + dk) - dispersion(m, k - dk)) / (2 * dk)
        assert group_velocity(m, k) == pytest.approx(fd, abs=1e-8)

    def test_gapless_angle_raises(self):
        # critical chain: gap closes at k = 0 for h = 1
        m = ModelSpec.ising(h=1.0, kappa=1.0)
        assert dispersion(m, 0.0) == 0.0
        with pytest.raises(GaplessMode):
            bogoliubov_angle(m, 0.0)

    def test_angle_frozen(self):
        # 2 theta = atan2(kappa sin k, h - cos k)
        m = ModelSpec.ising(h=2.0, kappa=1.0)
        assert bogoliubov_angle(m, math.pi / 2) == pytest.approx(0.5 * math.atan2(1.0, 2.0), rel=1e-15)
        r = ModelSpec.xx_ring(t=1.0, V=1.0)
        assert bogoliubov_angle(r, math.pi / 3) == pytest.approx(math.pi / 8, rel=1e-14)


class TestBandEdges:
    def test_chain_edges(self):
        m = ModelSpec.ising(h=1.5, kappa=1.0)
        lo, hi = band_edges(m)
        assert lo == pytest.approx(1.0, rel=1e-15)  # 2|h-1| at u=1
        assert hi == pytest.approx(5.0, rel=1e-15)  # 2(h+1) at u=-1
        lo_r, hi_r = band_edges(m, reduced=True)
        assert lo_r == pytest.approx(1.0, rel=1e-15)
        assert hi_r == pytest.approx(2.0 * math.sqrt(3.25), rel=1e-15)  # u=0

    def test_chain_interior_extremum(self):
        # kappa < 1 pulls a band minimum inside the zone at u = h/(1-kappa^2)
        m = ModelSpec.ising(h=0.5, kappa=0.5)
        lo, hi = band_edges(m)
        u_star = 0.5 / 0.75
        eps_star = 2.0 * math.sqrt((0.5 - u_star) ** 2 + 0.25 * (1.0 - u_star**2))
        assert lo == pytest.approx(eps_star, rel=1e-14)
        assert hi == pytest.approx(3.0, rel=1e-15)
        ks = np.linspace(0.0, math.pi, 20001)
        eps = dispersion(m, ks)
        assert eps.min() >= lo - 1e-9
        assert eps.max() <= hi + 1e-12

    def test_ring_edges(self):
        m = ModelSpec.xx_ring(t=1.0, V=1.0)
        assert band_edges(m) == (1.0, math.sqrt(5.0))


class TestEnergyRoots:
    def test_single_root_exact_u(self):
        # kappa = 1 degenerates the root equation to a linear one:
        # u = (h^2 + 1 - eps^2/4) / (2h); eps = 2, h = 1.5 -> u = 0.75
        m = ModelSpec.ising(h=1.5, kappa=1.0)
        roots = energy_roots(m, 2.0)
        assert len(roots) == 1
        assert roots[0].u == pytest.approx(0.75, abs=1e-13)
        assert abs(dispersion(m, roots[0].k) - 2.0) <= 1e-12

    def test_two_roots_below_edge(self):
        # interior extremum splits the inverse image into two momenta
        m = ModelSpec.ising(h=0.5, kappa=0.5)
        roots = energy_roots(m, 0.9)
        assert len(roots) == 2
        for r in roots:
            assert abs(dispersion(m, r.k) - 0.9) <= 1e-12
        assert roots[0].u != pytest.approx(roots[1].u, abs=1e-6)

    def test_ring_root(self):
        # cos^2 k* = (eps^2 - V^2) / (2t)^2 -> k* = pi/3 at eps = sqrt(2)
        m = ModelSpec.xx_ring(t=1.0, V=1.0)
        roots = energy_roots(m, SQRT2)
        assert len(roots) == 1
        assert roots[0].k == pytest.approx(math.pi / 3, abs=1e-13)

    def test_out_of_band(self):
        m = ModelSpec.xx_ring(t=1.0, V=1.0)
        assert energy_roots(m, 0.5) == ()
        assert energy_roots(m, 3.0) == ()
        with pytest.raises(OutOfBand):
            density_of_states(m, 0.5)
        with pytest.raises(OutOfBand):
            density_of_states(m, 3.0)

    def test_cancellation_prone_quadratic(self):
        # Roots stay accurate when b^2 >> 4ac, the regime where the naive
        # quadratic formula loses half the digits.
        m = ModelSpec.ising(h=5.0, kappa=0.999)
        lo, hi = band_edges(m)
        eps = lo + 1e-6 * (hi - lo)
        for r in energy_roots(m, eps):
            assert abs(dispersion(m, r.k) - eps) <= 1e-12 * max(1.0, eps)


class TestDensityOfStates:
    def test_per_root_is_inverse_slope(self):
        m = ModelSpec.ising(h=1.5, kappa=1.0)
        dos = density_of_states(m, 2.0)
        assert dos.total == pytest.approx(sum(dos.per_root), rel=1e-15)
        for r, p in zip(dos.roots, dos.per_root):
            assert p == pytest.approx(1.0 / abs(r.velocity), rel=1e-15)
        # |v| at u = 0.75: 4 sin k * h / eps = 4*sqrt(1-0.5625)*1.5/2
        v = 4.0 * math.sqrt(1.0 - 0.75**2) * 1.5 / 2.0
        assert dos.total == pytest.approx(1.0 / v, rel=1e-12)

    def test_van_hove_at_band_edge(self):
        m = ModelSpec.xx_ring(t=1.0, V=1.0)
        with pytest.raises(VanHoveSingularity):
            density_of_states(m, math.sqrt(5.0))


class TestQuench:
    def test_null_quench_empty_occupation(self):
        q = QuenchSpec.ising(h_i=1.5, h_f=1.5, kappa=1.0)
        assert q.is_null
        for k in (0.3, 1.1, 2.5):
            ms = mode_state(q, k)
            assert ms.n_k == 0.0
            assert ms.dtheta == 0.0

    def test_frozen_occupation_chain(self):
        # h 0.5 -> 1.5 at u = 0.75: cos 2 dtheta = 1/(2 sqrt 2), so
        # n = (1 - 1/(2 sqrt 2))/2
        q = QuenchSpec.ising(h_i=0.5, h_f=1.5, kappa=1.0)
        ms = mode_state(q, math.acos(0.75))
        assert ms.n_k == pytest.approx(0.32322330470336313, rel=1e-13)
        assert ms.cos_two_dtheta == 1.0 - 2.0 * ms.n_k  # identity, exact
        assert not ms.inverted

    def test_frozen_occupation_ring(self):
        # V -1 -> 1 rotates 2 theta from -pi/4 to pi/4 at k = pi/3: n = 1/2
        q = QuenchSpec.xx_ring(V_i=-1.0, V_f=1.0, t=1.0)
        ms = mode_state(q, math.pi / 3)
        assert ms.n_k == pytest.approx(0.5, abs=1e-15)
        assert ms.eps_i == pytest.approx(SQRT2, rel=1e-15)
        assert ms.eps_f == pytest.approx(SQRT2, rel=1e-15)

    def test_invalid_pairs_rejected(self):
        ising = ModelSpec.ising(h=1.0, kappa=1.0)
        ring = ModelSpec.xx_ring(t=1.0, V=1.0)
        with pytest.raises(ValueError):
            QuenchSpec(initial=ising, final=ring)
        with pytest.raises(ValueError):
            QuenchSpec(initial=ModelSpec.ising(h=0.5, kappa=0.3),
                       final=ModelSpec.ising(h=1.5, kappa=0.8))
        with pytest.raises(ValueError):
            ModelSpec.xx_ring(t=-1.0, V=0.5)


@st.composite
def chain_and_energy(draw):
    h = draw(st.floats(0.05, 2.5))
    kappa = draw(st.floats(0.15, 1.5))
    m = ModelSpec.ising(h=h, kappa=kappa)
    lo, hi = band_edges(m)
    if hi - lo < 1e-3 or lo < 1e-3:
        # nearly flat or nearly gapless band: no stable target energy
        return None
    frac = draw(st.floats(0.05, 0.95))
    return m, lo + frac * (hi - lo)


@given(chain_and_energy())
@settings(max_examples=120, deadline=None)
def test_root_residuals_property(pair):
    if pair is None:
        return
    model, eps = pair
    try:
        roots = energy_roots(model, eps)
    except VanHoveSingularity:
        return
    assert roots
    for r in roots:
        assert abs(dispersion(model, r.k) - eps) <= 1e-12 * max(1.0, eps)
        assert 0.0 <= r.k <= math.pi
        assert r.u == pytest.approx(math.cos(r.k), abs=5e-16)
