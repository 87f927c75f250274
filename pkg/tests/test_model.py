import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssfkit import (BoundaryData, bc_constants, factorize, gaussian,
                    negative_part_mass, piecewise_constant, poschl_teller,
                    square_well)
from ssfkit.errors import DomainError

# Independent high-order quadrature oracle (mpmath, 30 digits), frozen:
# integral of exp(-x^2/2) over [-5, 5].
GAUSSIAN_MASS = 2.5066268375731304


def test_square_well_mass_exact():
    # V = -1 on [-1, 1]: the negative part integrates to the constant area.
    assert negative_part_mass(square_well(1.0, 1.0)) == pytest.approx(2.0, abs=1e-12)


def test_barrier_has_no_negative_part():
    barrier = piecewise_constant((-1.0, 1.0), (1.0,))
    assert negative_part_mass(barrier) == 0.0


def test_gaussian_mass_against_quadrature_oracle():
    pot = gaussian(-1.0, 1.0, 5.0)
    assert negative_part_mass(pot) == pytest.approx(GAUSSIAN_MASS, abs=1e-10)


def test_mass_invariant_under_nonnegative_bump():
    base = piecewise_constant((-1.0, 0.0, 1.0), (-2.0, 0.0))
    bumped = piecewise_constant((-1.0, 0.0, 0.5, 1.0), (-2.0, 3.0, 1.5))
    assert negative_part_mass(base) == pytest.approx(negative_part_mass(bumped), abs=1e-10)


def test_sign_changing_potential_mass():
    pot = piecewise_constant((-2.0, -1.0, 1.0), (0.5, -0.25))
    assert negative_part_mass(pot) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 2.5])
def test_rotation_family_constants(alpha):
    # R_alpha = [[0, alpha], [-1/alpha, 0]]: largest root 1/|alpha|,
    # N_R = 2/|alpha|.
    bc = BoundaryData(phi=0.5, r=((0.0, alpha), (-1.0 / alpha, 0.0)))
    cc = bc_constants(square_well(1.0, 1.0), bc)
    assert cc.k_r0 == pytest.approx(1.0 / abs(alpha), rel=1e-14)
    assert cc.n_r == pytest.approx(2.0 / abs(alpha), rel=1e-14)


def test_shear_constants(acc_bc, acc_potential):
    cc = bc_constants(acc_potential, acc_bc)
    assert cc.n_r == pytest.approx(4.0)
    assert cc.m_v == pytest.approx(2.0, abs=1e-10)
    assert cc.lower_bound_interval == pytest.approx(-7.0, abs=1e-9)
    assert cc.lower_bound_line == pytest.approx(-6.0, abs=1e-9)


def test_largest_root_annihilates_polynomial(acc_bc, acc_potential):
    cc = bc_constants(acc_potential, acc_bc)
    assert abs(cc.p_r0(cc.k_r0)) < 1e-10
    ks = np.linspace(cc.k_r0 + 1e-6, cc.k_r0 + 50.0, 200)
    assert np.all(cc.p_r0(ks) > 0.0)


@pytest.mark.parametrize("r", [
    ((0.0, 2.0), (-0.5, 0.0)),
    ((1.0, 0.5), (0.0, 1.0)),
    ((2.0, -1.0), (1.0, 0.0)),
])
def test_k_r_max_dominates(r):
    bc = BoundaryData(phi=1.0, r=r)
    cc = bc_constants(square_well(1.0, 1.0), bc)
    assert cc.k_r_max >= math.sqrt(1.0 + cc.n_r) > 1.0
    assert cc.k_r_max >= cc.k_r0


def test_boundary_data_rejects_bad_matrices():
    with pytest.raises(DomainError):
        BoundaryData(phi=0.0, r=((1.0, 1.0), (0.0, 1.0 + 1e-9)))  # det != 1
    with pytest.raises(DomainError):
        BoundaryData(phi=0.0, r=((1.0, 0.0), (1.0, 1.0)))  # R12 == 0
    with pytest.raises(DomainError):
        BoundaryData(phi=math.pi, r=((1.0, 1.0), (0.0, 1.0)))  # phi = pi excluded
    with pytest.raises(DomainError):
        BoundaryData(phi=-0.1, r=((1.0, 1.0), (0.0, 1.0)))


def test_boundary_data_accepts_half_open_phi():
    BoundaryData(phi=0.0, r=((1.0, 1.0), (0.0, 1.0)))
    BoundaryData(phi=math.pi - 1e-12, r=((1.0, 1.0), (0.0, 1.0)))


_presets = st.sampled_from([
    square_well(1.0, 1.0),
    square_well(3.5, 0.4),
    gaussian(-2.0, 0.7, 4.0),
    gaussian(1.5, 1.0, 5.0),
    poschl_teller(1.0, 1.0, 6.0),
    piecewise_constant((-2.0, -0.5, 1.0), (1.0, -3.0)),
])


@settings(max_examples=60, deadline=None)
@given(pot=_presets, x=st.floats(-8.0, 8.0, allow_nan=False))
def test_factorize_reconstructs_potential(pot, x):
    u, v = factorize(pot, x)
    val = pot(x)
    assert v >= 0.0
    assert u * v == pytest.approx(val, rel=1e-14, abs=1e-300)
    assert abs(u) == pytest.approx(math.sqrt(abs(val)), rel=1e-14)
    assert abs(v) == pytest.approx(math.sqrt(abs(val)), rel=1e-14)


@settings(max_examples=20, deadline=None)
@given(x=st.floats(-20.0, 20.0, allow_nan=False))
def test_compact_support(x, acc_potential):
    if abs(x) > acc_potential.support_halfwidth:
        assert acc_potential(x) == 0.0


def test_preset_validation():
    with pytest.raises(DomainError):
        square_well(1.0, 0.0)
    with pytest.raises(DomainError):
        gaussian(1.0, -1.0, 2.0)
    with pytest.raises(DomainError):
        piecewise_constant((1.0, 0.0), (1.0,))
    with pytest.raises(DomainError):
        piecewise_constant((0.0, 1.0), ())
