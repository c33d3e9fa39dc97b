import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dkg_lab import (
    Field,
    Params,
    PhysicalState,
    charge,
    load_state,
    make_grid,
    random_sobolev_field,
    save_state,
    sobolev_norm,
    to_diagonal,
    to_physical,
)
from dkg_lab.state import project_spinor, random_physical_state

from helpers import smooth_physical_state


def test_params_c0():
    assert Params(m=1.0).c0 == 0.0
    assert Params(m=2.0).c0 == -3.0
    with pytest.raises(ValueError):
        Params(m=0.0)


def test_static_data_split(grid32, params):
    phi = Field.from_physical(grid32, np.cos(grid32.x), real=True)
    zero = Field(grid32, np.zeros(32), real=True)
    psi = Field(grid32, np.zeros((2, 32)))
    d = to_diagonal(PhysicalState(psi, phi, zero), params)
    assert np.max(np.abs(d.phi_p.coef - phi.coef)) == 0.0
    assert np.max(np.abs(d.phi_m.coef - phi.coef)) == 0.0


def test_plus_eigenvector_mode(grid32, params):
    # (1, i)^T is fixed by the plus projection at positive frequency
    vals = np.stack([np.exp(1j * grid32.x), 1j * np.exp(1j * grid32.x)])
    psi = Field.from_physical(grid32, vals)
    zero = Field(grid32, np.zeros(32), real=True)
    d = to_diagonal(PhysicalState(psi, zero, zero), params)
    assert np.max(np.abs(d.psi_m.coef)) <= 1e-15
    assert np.max(np.abs(d.psi_p.coef - psi.coef)) <= 1e-15


def test_conjugate_pairing_from_real_data(grid64, params):
    p = random_physical_state(grid64, 0.2, 0.25, seed=5)
    d = to_diagonal(p, params)
    assert d.conjugation_residue() <= 1e-13


def test_projection_persistence_of_containers(grid64, params):
    d = to_diagonal(random_physical_state(grid64, 0.2, 0.25, seed=8), params)
    assert d.projection_residue() <= 1e-12


def test_round_trip(grid64, params):
    for seed in range(10):
        p = random_physical_state(grid64, 0.2, 0.25, seed=seed)
        back = to_physical(to_diagonal(p, params), params)
        for a, b in ((p.psi, back.psi), (p.phi, back.phi), (p.phi_t, back.phi_t)):
            assert np.max(np.abs(a.coef - b.coef)) <= 1e-12


def test_constant_diagonal_state(grid32, params):
    from dkg_lab import DiagonalState

    one = Field(grid32, np.r_[1.0, np.zeros(31)].astype(complex))
    zero_spinor = Field(grid32, np.zeros((2, 32)))
    d = DiagonalState(zero_spinor, zero_spinor.copy(), one, one.copy())
    p = to_physical(d, params)
    assert np.max(np.abs(p.phi.physical() - 1.0)) <= 1e-14
    assert np.max(np.abs(p.phi_t.physical())) <= 1e-14
    assert np.max(np.abs(p.psi.coef)) == 0.0


def test_half_wave_reconstruction_coefficient(grid32, params):
    # phi+ = e^{ix}, phi- = e^{-ix}: phi = cos x and phi_t = sqrt(2) sin x,
    # pinned by phi_t = A^(1/2)(phi+ - phi-)/(2i) with <1> = sqrt(2)
    from dkg_lab import DiagonalState

    e_plus = Field.from_physical(grid32, np.exp(1j * grid32.x))
    e_minus = Field.from_physical(grid32, np.exp(-1j * grid32.x))
    zero_spinor = Field(grid32, np.zeros((2, 32)))
    d = DiagonalState(zero_spinor, zero_spinor.copy(), e_plus, e_minus)
    p = to_physical(d, params)
    assert np.max(np.abs(p.phi.physical() - np.cos(grid32.x))) <= 1e-13
    assert np.max(np.abs(p.phi_t.physical() - np.sqrt(2) * np.sin(grid32.x))) <= 1e-13


def test_to_physical_reports_imaginary_residue(grid32, params):
    from dkg_lab import DiagonalState

    bad = Field(grid32, np.full(32, 0.1 + 0.0j))  # phi- != conj(phi+)
    good = Field(grid32, np.zeros(32))
    zero_spinor = Field(grid32, np.zeros((2, 32)))
    d = DiagonalState(zero_spinor, zero_spinor.copy(), bad, good)
    with pytest.warns(UserWarning):
        p = to_physical(d, params)
    assert p.reality_residue > 1e-10


def test_charge_constant_spinor(grid32):
    psi = Field.from_physical(grid32, np.stack([np.ones(32), np.zeros(32)]))
    assert abs(charge(psi) - 2 * np.pi) < 1e-14


def test_charge_quadratic_scaling(grid32):
    psi = Field(grid32, random_sobolev_field(grid32, 0.0, 3, components=2).coef)
    assert abs(charge(Field(grid32, 2.0 * psi.coef)) - 4.0 * charge(psi)) <= 1e-12 * charge(psi)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_charge_pythagoras(seed):
    grid = make_grid(32)
    psi = random_sobolev_field(grid, 0.0, seed, components=2)
    plus = Field(grid, project_spinor(grid, psi.coef, 1))
    minus = Field(grid, project_spinor(grid, psi.coef, -1))
    # direct summation oracle for the total charge
    direct = float(grid.L * np.sum(np.abs(psi.coef) ** 2))
    assert abs(charge(plus) + charge(minus) - direct) <= 1e-12 * max(direct, 1.0)


def test_random_field_deterministic(grid64):
    a = random_sobolev_field(grid64, 0.25, seed=42, components=2)
    b = random_sobolev_field(grid64, 0.25, seed=42, components=2)
    assert np.array_equal(a.coef, b.coef)
    c = random_sobolev_field(grid64, 0.25, seed=43, components=2)
    assert not np.array_equal(a.coef, c.coef)


def test_random_field_norm_growth():
    # coefficient law <xi>^(-s-0.51): H^0 stays bounded while H^(1/2) grows
    h0, h_half = [], []
    for n in (64, 128, 256, 512):
        f = random_sobolev_field(make_grid(n), 0.0, seed=7)
        h0.append(sobolev_norm(f, 0.0))
        h_half.append(sobolev_norm(f, 0.5))
    assert h_half[-1] > 1.5 * h_half[0]
    assert max(h0) <= 1.25 * min(h0)


def test_random_field_reality(grid64):
    f = random_sobolev_field(grid64, 0.25, seed=11, real=True)
    assert np.max(np.abs(f.physical().imag)) <= 1e-13


def test_random_field_band_limited(grid64):
    f = random_sobolev_field(grid64, 0.25, seed=11, components=2)
    outside = np.abs(grid64.k_int) > grid64.dealias_cut
    assert np.max(np.abs(f.coef[:, outside])) == 0.0


def test_charge_invariant_under_round_trip(grid64, params):
    p = random_physical_state(grid64, 0.2, 0.25, seed=21)
    d = to_diagonal(p, params)
    back = to_physical(d, params)
    assert abs(charge(back.psi) - charge(p.psi)) <= 1e-12 * charge(p.psi)


def test_snapshot_round_trip(tmp_path, grid32, params):
    p = smooth_physical_state(grid32)
    path = tmp_path / "snap.json"
    save_state(p, params, path)
    loaded, loaded_params = load_state(path)
    assert loaded_params == params
    assert np.array_equal(loaded.psi.coef, p.psi.coef)
    assert np.array_equal(loaded.phi.coef, p.phi.coef)

    d = to_diagonal(p, params)
    save_state(d, params, path)
    loaded_d, _ = load_state(path)
    assert np.array_equal(loaded_d.phi_p.coef, d.phi_p.coef)
    assert loaded_d.t == d.t
