import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from ssfkit import gaussian, piecewise_constant, poschl_teller, square_well, zero_potential
from ssfkit.errors import DomainError
from ssfkit.solve import (basis_samples, basis_solutions, jost_transmission,
                          scattering_phases, transfer_matrix, transmission)


def slab_product(slabs, z):
    """Analytic oracle: product of constant-coefficient slab propagators.

    ``slabs`` is a list of (v0, length) from left to right.
    """
    m = np.eye(2)
    for v0, d in slabs:
        m2 = z - v0
        if abs(m2) < 1e-300:
            s = np.array([[1.0, d], [0.0, 1.0]])
        elif m2 > 0:
            k = math.sqrt(m2)
            s = np.array([[math.cos(k * d), math.sin(k * d) / k],
                          [-k * math.sin(k * d), math.cos(k * d)]])
        else:
            k = math.sqrt(-m2)
            s = np.array([[math.cosh(k * d), math.sinh(k * d) / k],
                          [k * math.sinh(k * d), math.cosh(k * d)]])
        m = s @ m
    return m


def test_free_transfer_z_zero(zero_pot):
    tm = transfer_matrix(zero_pot, 0.0, 1.0)
    assert tm.entries == pytest.approx(np.array([[1.0, 2.0], [0.0, 1.0]]), abs=1e-10)
    assert tm.det == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("k,ell", [(1.0, 1.0), (2.0, 1.5), (3.0, 4.0)])
def test_free_transfer_hyperbolic(zero_pot, k, ell):
    tm = transfer_matrix(zero_pot, -k * k, ell)
    ref = np.array([[math.cosh(2 * k * ell), math.sinh(2 * k * ell) / k],
                    [k * math.sinh(2 * k * ell), math.cosh(2 * k * ell)]])
    assert np.max(np.abs(tm.entries - ref) / np.abs(ref)) < 1e-9


def test_square_well_transfer_vs_slab_oracle():
    # Three constant slabs: free, well bottom, free.
    pot = square_well(1.0, 1.0)
    z, ell = -1.0, 2.0
    tm = transfer_matrix(pot, z, ell)
    ref = slab_product([(0.0, 1.0), (-1.0, 2.0), (0.0, 1.0)], z)
    assert np.max(np.abs(tm.entries - ref)) < 1e-8 * np.max(np.abs(ref))
    assert tm.det == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("z", [-7.3, -1.0, 0.4, 5.0, 31.0])
def test_piecewise_transfer_vs_slab_oracle(z):
    pot = piecewise_constant((-2.0, -0.5, 0.5, 1.5), (2.0, -3.0, 1.0))
    ell = 3.0
    tm = transfer_matrix(pot, z, ell)
    ref = slab_product(
        [(0.0, 1.0), (2.0, 1.5), (-3.0, 1.0), (1.0, 1.0), (0.0, 1.5)], z
    )
    scale = np.max(np.abs(ref))
    assert np.max(np.abs(tm.entries - ref)) < 1e-8 * scale


def test_gaussian_transfer_vs_solve_ivp():
    pot = gaussian(-2.0, 0.8, 4.0)
    z, ell = -3.0, 4.0

    def rhs(x, y):
        v = pot(x)
        return [y[1], (v - z) * y[0], y[3], (v - z) * y[2]]

    sol = solve_ivp(rhs, (-ell, ell), [1.0, 0.0, 0.0, 1.0],
                    rtol=1e-12, atol=1e-14, method="DOP853")
    ref = np.array([[sol.y[0, -1], sol.y[2, -1]], [sol.y[1, -1], sol.y[3, -1]]])
    tm = transfer_matrix(pot, z, ell)
    assert np.max(np.abs(tm.entries - ref) / np.max(np.abs(ref))) < 1e-8


@pytest.mark.parametrize("pot", [
    zero_potential(),
    square_well(1.0, 1.0),
    gaussian(-1.0, 1.0, 5.0),
    poschl_teller(1.0, 1.0, 6.0),
    piecewise_constant((-1.0, 0.0, 1.0), (-2.0, 1.0)),
])
@pytest.mark.parametrize("z", [-100.0, -7.0, 0.0, 13.7, 100.0])
@pytest.mark.parametrize("ell", [1.0, 8.0, 64.0])
def test_certified_determinant(pot, z, ell):
    tm = transfer_matrix(pot, z, ell)
    assert abs(tm.det - 1.0) < 1e-9
    # When the overall scale is modest the assembled entries agree too.
    if tm.log_scale < 15.0:
        ent = tm.entries
        det_direct = ent[0, 0] * ent[1, 1] - ent[0, 1] * ent[1, 0]
        assert det_direct == pytest.approx(1.0, abs=1e-7)


def test_entries_overflow_guard(zero_pot):
    tm = transfer_matrix(zero_pot, -100.0, 64.0)
    assert tm.log_scale > 700.0
    with pytest.raises(OverflowError):
        tm.entries


@pytest.mark.parametrize("k,ell", [(0.7, 1.0), (2.0, 1.5), (5.0, 3.0)])
def test_free_basis_closed_forms(zero_pot, k, ell):
    # psi_1 vanishes on the left and is 1 on the right; for V = 0 its
    # derivative traces and squared norm have hyperbolic closed forms.
    bv = basis_solutions(zero_pot, -k * k, ell)
    u = k * ell
    assert bv.dpsi1_right == pytest.approx(0.5 * k * (math.tanh(u) + 1.0 / math.tanh(u)),
                                           abs=1e-10)
    assert bv.dpsi1_left == pytest.approx(k / math.sinh(2 * u), abs=1e-10)
    assert bv.dpsi2_left == pytest.approx(-0.5 * k * (math.tanh(u) + 1.0 / math.tanh(u)),
                                          abs=1e-10)
    assert bv.dpsi2_right == pytest.approx(-k / math.sinh(2 * u), abs=1e-10)
    norm_sq = (math.tanh(u) + 1.0 / math.tanh(u)) / (4.0 * k) \
        + (ell / 4.0) * (1.0 / math.cosh(u) ** 2 - 1.0 / math.sinh(u) ** 2)
    assert bv.norms[0] ** 2 == pytest.approx(norm_sq, abs=1e-10)
    assert bv.norms[1] ** 2 == pytest.approx(norm_sq, abs=1e-10)


def test_well_basis_norm_vs_quadrature_oracle():
    pot = square_well(1.0, 1.0)
    z, ell = -4.0, 3.0
    bv = basis_solutions(pot, z, ell)

    def rhs(x, y):
        return [y[1], (pot(x) - z) * y[0]]

    sol = solve_ivp(rhs, (-ell, ell), [0.0, bv.dpsi1_left], rtol=1e-12, atol=1e-14,
                    method="DOP853", dense_output=True)
    val, _ = quad(lambda x: sol.sol(x)[0] ** 2, -ell, ell, limit=200,
                  epsabs=1e-12, epsrel=1e-12)
    assert bv.norms[0] ** 2 == pytest.approx(val, abs=1e-9)


def test_basis_wronskian_constant():
    pot = square_well(1.0, 1.0)
    z, ell = -4.0, 3.0
    xs = np.linspace(-ell, ell, 41)
    p1, d1, p2, d2 = basis_samples(pot, z, ell, xs)
    w = p1 * d2 - d1 * p2
    assert np.max(np.abs(w - w[0])) < 1e-9 * max(1.0, abs(w[0]))


def test_free_transmission(zero_pot):
    for k in (0.5, 2.0, 10.0):
        t, r = transmission(zero_pot, k)
        assert t == pytest.approx(1.0, abs=1e-10)
        assert abs(r) < 1e-10


@pytest.mark.parametrize("v0,a", [(1.0, 1.0), (4.0, 0.5)])
def test_square_well_transmission_closed_form(v0, a):
    # Textbook closed form with k' = sqrt(k^2 + V0):
    # 1/t = e^{2ika} [cos(2k'a) - i (k^2 + k'^2)/(2kk') sin(2k'a)].
    pot = square_well(v0, a)
    for k in (0.3, 1.0, 2.7, 8.0):
        t, r = transmission(pot, k)
        kp = math.sqrt(k * k + v0)
        inv_t = cmath.exp(2j * k * a) * (
            math.cos(2 * kp * a) - 1j * (k * k + kp * kp) / (2 * k * kp) * math.sin(2 * kp * a)
        )
        assert t == pytest.approx(1.0 / inv_t, abs=1e-10)
        assert abs(t) ** 2 + abs(r) ** 2 == pytest.approx(1.0, abs=1e-8)


def test_unitarity_on_grid(acc_potential):
    ks = np.geomspace(0.05, 40.0, 60)
    for datum in scattering_phases(acc_potential, ks):
        assert abs(datum.t) <= 1.0 + 1e-9
        assert abs(datum.t) ** 2 + abs(datum.r) ** 2 == pytest.approx(1.0, abs=1e-8)


def test_phase_continuous_and_vanishing_at_top(acc_potential):
    ks = np.geomspace(1e-3, 125.0, 400)
    data = scattering_phases(acc_potential, ks)
    phases = np.array([d.phase for d in data])
    assert np.max(np.abs(np.diff(phases))) < 0.5 * math.pi
    assert abs(phases[-1]) < 0.05
    # Well with one bound state, no threshold resonance: arg t(0+) -> pi/2.
    assert phases[0] == pytest.approx(math.pi / 2.0, abs=5e-3)


def test_jost_transmission_single_point(acc_potential):
    datum = jost_transmission(acc_potential, 2.0)
    t, _ = transmission(acc_potential, 2.0)
    assert datum.t == pytest.approx(t, rel=1e-10)
    assert -math.pi < datum.phase < math.pi


def test_transmission_rejects_nonpositive_k(acc_potential):
    with pytest.raises(DomainError):
        transmission(acc_potential, 0.0)
