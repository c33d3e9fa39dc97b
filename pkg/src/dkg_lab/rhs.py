"""Right-hand sides of the diagonalized system and the null form.

Two evaluation paths exist for the projected null form: the fast
pseudospectral one (project, multiply pointwise in physical space, dealias)
and the quadratic-cost sign-table convolution, kept as the independent
correctness oracle.  Both use sgn(0) = +1 and the grid's dealias rule so
they agree to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import SignPair, gamma
from .grid import Field, GridError, SpectralGrid
from .state import DiagonalState, Params, beta_swap, project_spinor


def _require_shared_grid(a: Field, b: Field):
    if a.grid != b.grid:
        raise GridError("fields live on different grids")


def nullform_coef(grid: SpectralGrid, psi_coef, psi2_coef):
    """Dealiased spectral coefficients of <beta psi(x), psi2(x)>.

    Conjugation sits in the second slot; for the canonical beta the
    pointwise value is psi_2 conj(psi2_1) + psi_1 conj(psi2_2).
    """
    p = grid.to_physical(psi_coef)
    q = grid.to_physical(psi2_coef)
    values = p[1] * np.conj(q[0]) + p[0] * np.conj(q[1])
    return grid.dealias(grid.to_spectral(values))


def nullform(psi: Field, psi2: Field) -> Field:
    """<beta psi, psi2> as a scalar field; real-valued when psi2 is psi."""
    _require_shared_grid(psi, psi2)
    return Field(psi.grid, nullform_coef(psi.grid, psi.coef, psi2.coef))


def nullform_projected(psi: Field, psi2: Field, pair: SignPair) -> Field:
    """Direct path for <beta proj_{s1} psi, proj_{s2} psi2>."""
    _require_shared_grid(psi, psi2)
    grid = psi.grid
    a = project_spinor(grid, psi.coef, pair.s1)
    b = project_spinor(grid, psi2.coef, pair.s2)
    return Field(grid, nullform_coef(grid, a, b))


def nullform_projected_spectral(psi: Field, psi2: Field, pair: SignPair) -> Field:
    """Sign-table path for the projected null form.

    Output mode xi collects sum_{xi1 + xi2 = xi} <gamma(pair, sgn xi1, sgn xi2)
    psihat(xi1), conj-datum of psi2 at -xi2>, with the same circular index
    arithmetic and output truncation as the pseudospectral product.
    """
    _require_shared_grid(psi, psi2)
    grid = psi.grid
    n = grid.n
    u = psi.coef
    # w_i(k2) = conj(psi2hat_i(-k2)): the conjugate datum entering the sum
    w = np.conj(psi2.coef[:, grid.reflect])
    # the table's second index is the sign at the mode where psi2 is
    # actually projected: -sgn(-xi2).  It equals sgn(xi2) except at the
    # zero and Nyquist modes, where the sgn(0) = +1 convention must be
    # applied on the psi2 side to match the direct path.
    sgn2_eff = -grid.sgn[grid.reflect]
    out = np.zeros(n, dtype=complex)
    k = np.arange(n)
    wrap = (k[:, None] + k[None, :]) % n
    for sgn1 in (1, -1):
        m1 = grid.sgn == sgn1
        if not np.any(m1):
            continue
        for sgn2 in (1, -1):
            m2 = sgn2_eff == sgn2
            g = gamma(pair, sgn1, sgn2)
            if not np.any(g) or not np.any(m2):
                continue
            # scalar contribution sum_ij g_ij u_j(k1) w_i(k2) on the block
            block = np.zeros((int(m1.sum()), int(m2.sum())), dtype=complex)
            for i in range(2):
                for j in range(2):
                    if g[i, j] != 0:
                        block += g[i, j] * np.outer(u[j][m1], w[i][m2])
            np.add.at(out, wrap[np.ix_(m1, m2)].ravel(), block.ravel())
    return Field(grid, grid.dealias(out))


@dataclass
class RhsBundle:
    """The four source terms driving one evolution step."""

    f_psi_p: Field
    f_psi_m: Field
    g_phi_p: Field
    g_phi_m: Field


def dirac_rhs_coef(grid: SpectralGrid, psi_p, psi_m, phi_p, phi_m, params: Params):
    """F_+- = -M beta psi_-+ + g proj_+-((phi_+ + phi_-)/2 * beta psi)."""
    psi = psi_p + psi_m
    if params.g != 0.0:
        phi_mid = grid.to_physical(0.5 * (phi_p + phi_m))
        beta_psi = grid.to_physical(beta_swap(psi))
        s = grid.dealias(grid.to_spectral(phi_mid * beta_psi))
        coupling_p = params.g * project_spinor(grid, s, +1)
        coupling_m = params.g * project_spinor(grid, s, -1)
    else:
        coupling_p = coupling_m = np.zeros_like(psi)
    f_p = -params.M * beta_swap(psi_m) + coupling_p
    f_m = -params.M * beta_swap(psi_p) + coupling_m
    return f_p, f_m


def kg_rhs_coef(grid: SpectralGrid, psi_p, psi_m, phi_p, phi_m, params: Params):
    """G_+- = -+ A^(-1/2) (<beta psi, psi> + c0 (phi_+ + phi_-))."""
    bracket_term = nullform_coef(grid, psi_p + psi_m, psi_p + psi_m)
    if params.c0 != 0.0:
        bracket_term = bracket_term + params.c0 * (phi_p + phi_m)
    g_p = -bracket_term / grid.bracket
    return g_p, -g_p


def dirac_rhs(d: DiagonalState, params: Params):
    f_p, f_m = dirac_rhs_coef(
        d.grid, d.psi_p.coef, d.psi_m.coef, d.phi_p.coef, d.phi_m.coef, params
    )
    return Field(d.grid, f_p), Field(d.grid, f_m)


def kg_rhs(d: DiagonalState, params: Params):
    g_p, g_m = kg_rhs_coef(
        d.grid, d.psi_p.coef, d.psi_m.coef, d.phi_p.coef, d.phi_m.coef, params
    )
    return Field(d.grid, g_p), Field(d.grid, g_m)


def full_rhs(d: DiagonalState, params: Params) -> RhsBundle:
    fp, fm = dirac_rhs(d, params)
    gp, gm = kg_rhs(d, params)
    return RhsBundle(fp, fm, gp, gm)
