import numpy as np

from dkg_lab import Field, PhysicalState


def smooth_physical_state(grid, amp=0.5, unit_charge=False):
    """Deterministic analytic data: Gaussian spectra, real scalar pair."""
    env = np.exp(-0.25 * grid.k_int.astype(float) ** 2)
    psi = Field(grid, amp * np.stack([env * (0.8 + 0.4j), env * (0.3 - 0.6j)]))
    phi = Field.from_physical(
        grid, amp * (np.cos(grid.x) + 0.4 * np.sin(2 * grid.x)), real=True
    )
    phi_t = Field.from_physical(grid, amp * 0.3 * np.sin(grid.x), real=True)
    if unit_charge:
        from dkg_lab import charge

        psi = Field(grid, psi.coef / np.sqrt(charge(psi)))
    return PhysicalState(psi, phi, phi_t)


def exact_dirac_mode_flow(grid, psi_coef, params, t):
    """Closed-form flow of psihat' = -i(xi*alpha + M*beta) psihat per mode.

    Independent oracle: H^2 = (xi^2 + M^2) I gives
    exp(-i t H) = cos(w t) I - i sin(w t)/w H with w = sqrt(xi^2 + M^2).
    """
    xi = grid.xi
    w = np.sqrt(xi**2 + params.M**2)
    cos = np.cos(w * t)
    sinc = np.where(w > 0, np.sin(w * t) / np.where(w > 0, w, 1.0), t)
    # H psi = ((M - i xi) psi2, (M + i xi) psi1) for the canonical matrices
    out = np.empty_like(psi_coef)
    out[0] = cos * psi_coef[0] - 1j * sinc * (params.M - 1j * xi) * psi_coef[1]
    out[1] = cos * psi_coef[1] - 1j * sinc * (params.M + 1j * xi) * psi_coef[0]
    return out


def linear_picard_oracle(d0, params, T_p, n_dense, iters):
    """Successive-difference ratios of the Picard iteration for g = 0,
    computed per mode on a dense time grid with cumulative-trapezoid
    interaction-picture integrals; independent of the production quadrature.
    """
    grid = d0.grid
    t = np.linspace(0.0, T_p, n_dense)
    phase_p = np.exp(-1j * np.outer(t, grid.abs_xi))  # (nt, n)
    phase_m = np.conj(phase_p)
    wp = np.broadcast_to(d0.psi_p.coef, (n_dense, 2, grid.n)).copy()
    wp *= phase_p[:, None, :]
    wm = np.broadcast_to(d0.psi_m.coef, (n_dense, 2, grid.n)).copy()
    wm *= phase_m[:, None, :]
    h = t[1] - t[0]

    def duhamel(src, phase):
        integrand = np.conj(phase[:, None, :]) * src
        acc = np.zeros_like(integrand)
        acc[1:] = np.cumsum(0.5 * h * (integrand[1:] + integrand[:-1]), axis=0)
        return phase[:, None, :] * acc

    diffs = []
    for _ in range(iters):
        bp = -1j * params.M * wm[:, ::-1, :]  # i * (-M beta w_minus)
        bm = -1j * params.M * wp[:, ::-1, :]
        wp_new = duhamel(bp, phase_p)
        wm_new = duhamel(bm, phase_m)
        sup = 0.0
        for j in range(n_dense):
            total = np.sum(np.abs(wp_new[j]) ** 2) + np.sum(np.abs(wm_new[j]) ** 2)
            sup = max(sup, np.sqrt(grid.L * total))
        diffs.append(sup)
        wp, wm = wp_new, wm_new
    return [diffs[i + 1] / diffs[i] for i in range(len(diffs) - 1)]
