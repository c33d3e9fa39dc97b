"""Space-time norms and numerical probes of the bilinear machinery.

The continuum objects live on R^2; the desk-scale surrogate is a doubly
periodic box [0, L) x [0, T_box) whose 2D lattice discretizes (xi, tau).
Norms carry the weights <xi>^s <tau + sign*|xi|>^b; the modulation variable
tau has spacing 2*pi/T_box, so refining the box refines the weight.

Probes report ratio statistics and refinement growth, never pass/fail
against the unknown continuum constants: only refinement stability is ever
asserted, and only for exponents satisfying the hypotheses.  Products of
space-time fields are always computed on a zero-padded lattice, so the
retained output modes are the exact convolution (truncated, never aliased).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np

from .algebra import SignPair
from .grid import SpectralGrid, TWO_PI
from .state import complex_gauss, key_hash


class SpaceTimeGrid:
    """n x n_t lattice on [0, L) x [0, T_box) with 2D average-normalized DFT."""

    def __init__(self, n: int, n_t: int, L: float = TWO_PI, T_box: float = TWO_PI):
        if n % 2 or n < 8 or n_t % 2 or n_t < 8:
            raise ValueError(f"grid sizes must be even and >= 8, got {n} x {n_t}")
        if L <= 0 or T_box <= 0:
            raise ValueError("box dimensions must be positive")
        self.n = int(n)
        self.n_t = int(n_t)
        self.L = float(L)
        self.T_box = float(T_box)
        self.kx_int = np.rint(np.fft.fftfreq(self.n) * self.n).astype(np.int64)
        self.kt_int = np.rint(np.fft.fftfreq(self.n_t) * self.n_t).astype(np.int64)
        self.xi = self.kx_int * (TWO_PI / self.L)
        self.tau = self.kt_int * (TWO_PI / self.T_box)
        self.abs_xi = np.abs(self.xi)
        self.bracket_xi = np.sqrt(1.0 + self.xi**2)
        self.sgn = np.where(self.xi < 0.0, -1, 1).astype(np.int64)

    def to_spectral(self, values):
        return np.fft.fft2(values, axes=(-2, -1)) / (self.n * self.n_t)

    def to_physical(self, coef):
        return np.fft.ifft2(coef, axes=(-2, -1)) * (self.n * self.n_t)

    def doubled(self) -> "SpaceTimeGrid":
        return SpaceTimeGrid(2 * self.n, 2 * self.n_t, self.L, self.T_box)

    def __eq__(self, other):
        return isinstance(other, SpaceTimeGrid) and (
            self.n, self.n_t, self.L, self.T_box
        ) == (other.n, other.n_t, other.L, other.T_box)

    def __hash__(self):
        return hash((self.n, self.n_t, self.L, self.T_box))


@dataclass
class SpaceTimeField:
    """Spectral coefficients on the (xi, tau) lattice; (n, n_t) or (2, n, n_t)."""

    grid: SpaceTimeGrid
    coef: np.ndarray

    def __post_init__(self):
        self.coef = np.asarray(self.coef, dtype=complex)
        if self.coef.shape[-2:] != (self.grid.n, self.grid.n_t):
            raise ValueError("coefficient shape does not match the lattice")

    @property
    def ncomp(self) -> int:
        return 1 if self.coef.ndim == 2 else self.coef.shape[0]

    @classmethod
    def from_physical(cls, grid, values) -> "SpaceTimeField":
        return cls(grid, grid.to_spectral(np.asarray(values)))

    def physical(self):
        return self.grid.to_physical(self.coef)


@dataclass(frozen=True)
class XsbParams:
    """Weight exponents of one X^{s,b}_sign (or Y^{s,b}_sign) norm."""

    s: float
    b: float
    sign: int
    eps: float = 0.01

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not 0.0 < self.eps <= 0.1:
            raise ValueError("eps must lie in (0, 0.1]")


def _modulation_weight(grid: SpaceTimeGrid, sign: int, power: float):
    mod = grid.tau[None, :] + sign * grid.abs_xi[:, None]
    return (1.0 + mod**2) ** (0.5 * power)


def xsb_norm(u: SpaceTimeField, p: XsbParams) -> float:
    """Weighted space-time l2 sum with the grid's Parseval constant."""
    g = u.grid
    w = (g.bracket_xi ** (2.0 * p.s))[:, None] * _modulation_weight(g, p.sign, 2.0 * p.b)
    total = np.sum(w * np.abs(u.coef) ** 2)
    return float(np.sqrt(g.L * g.T_box * total))


def project_spinor_xt(grid: SpaceTimeGrid, coef, sign: int):
    """Eigenspace projection acting on the spatial frequency only."""
    s = (sign * grid.sgn)[:, None]
    c1, c2 = coef[0], coef[1]
    return np.stack([0.5 * (c1 - 1j * s * c2), 0.5 * (c2 + 1j * s * c1)])


# --------------------------------------------------------------------------
# padded (alias-free) products


def _centered(coef):
    return np.fft.fftshift(coef, axes=(-2, -1))


def _uncentered(coef):
    return np.fft.ifftshift(coef, axes=(-2, -1))


def _pad_double(grid: SpaceTimeGrid, coef):
    c = _centered(coef)
    shape = coef.shape[:-2] + (2 * grid.n, 2 * grid.n_t)
    out = np.zeros(shape, dtype=complex)
    out[..., grid.n // 2 : 3 * grid.n // 2, grid.n_t // 2 : 3 * grid.n_t // 2] = c
    return _uncentered(out)


def _extract_half(grid: SpaceTimeGrid, coef):
    c = _centered(coef)
    block = c[..., grid.n // 2 : 3 * grid.n // 2, grid.n_t // 2 : 3 * grid.n_t // 2]
    return _uncentered(block)


def nullform_xt(grid: SpaceTimeGrid, psi_coef, psi2_coef):
    """<beta psi, psi2> pointwise in (x, t), computed without aliasing.

    Both factors are zero-padded to the doubled lattice before the pointwise
    product; output modes beyond the original lattice are truncated.
    """
    scale = 4.0 * grid.n * grid.n_t
    p = np.fft.ifft2(_pad_double(grid, psi_coef), axes=(-2, -1)) * scale
    q = np.fft.ifft2(_pad_double(grid, psi2_coef), axes=(-2, -1)) * scale
    values = p[1] * np.conj(q[0]) + p[0] * np.conj(q[1])
    spec = np.fft.fft2(values, axes=(-2, -1)) / scale
    return _extract_half(grid, spec)


# --------------------------------------------------------------------------
# shaped random fields for the ratio probes


def random_xt_spinor(
    grid: SpaceTimeGrid,
    sign: int,
    s: float,
    b: float,
    seed: int,
    label: int,
    decay: float = 0.9,
    band=None,
):
    """Random spinor whose X^{s,b}_sign mass is spread over several bands.

    Coefficients <xi>^(-s) <tau + sign|xi|>^(-b) times a summable rolloff and
    unit complex Gaussians keyed by (seed, label, component, integer mode):
    a lattice that contains the same integer modes reproduces the same field.
    ``band`` = (bx, bt) caps the integer frequencies (default: a third of the
    lattice each way), keeping products on the doubled lattice exact.
    """
    bx, bt = band if band is not None else (grid.n // 3, grid.n_t // 3)
    mask = (np.abs(grid.kx_int) <= bx)[:, None] & (np.abs(grid.kt_int) <= bt)[None, :]
    mod2 = 1.0 + (grid.tau[None, :] + sign * grid.abs_xi[:, None]) ** 2
    shape = (
        (grid.bracket_xi ** (-s - decay))[:, None]
        * mod2 ** (0.5 * (-b - decay))
        * mask
    )
    rows = [
        shape * complex_gauss(seed, label, c, grid.kx_int[:, None], grid.kt_int[None, :])
        for c in range(2)
    ]
    return np.stack(rows)


# --------------------------------------------------------------------------
# bilinear estimate probes


@dataclass
class VariantStats:
    """Ratio statistics of one left-norm sign variant."""

    phi_sign: int
    max_ratio: float
    mean_ratio: float
    growth: float | None
    rows: list = dc_field(default_factory=list)
    skipped: int = 0


@dataclass
class ProbeResult:
    estimate: str
    l: float
    k: float
    eps: float
    pair: SignPair
    variants: dict  # phi_sign -> VariantStats

    def stats(self, phi_sign: int) -> VariantStats:
        return self.variants[phi_sign]


def _probe_weights(estimate: str, l: float, k: float, eps: float, pair: SignPair):
    """(LHS Y-params per phi_sign, RHS X-params for psi and psi')."""
    if estimate == "star2":
        lhs = {pm: XsbParams(k - 1.0, -0.5 + 2.0 * eps, pm, eps) for pm in (1, -1)}
        rhs1 = XsbParams(-l, 0.5 + eps, pair.s1, eps)
        rhs2 = XsbParams(-l, 0.5 + eps, pair.s2, eps)
    elif estimate == "star3":
        lhs = {pm: XsbParams(-k, -0.5 - eps, pm, eps) for pm in (1, -1)}
        rhs1 = XsbParams(-l, 0.5 + eps, pair.s1, eps)
        rhs2 = XsbParams(l, 0.5 - 2.0 * eps, pair.s2, eps)
    else:
        raise ValueError(f"unknown estimate {estimate!r}")
    return lhs, rhs1, rhs2


def _ratio_pass(estimate, l, k, eps, pair, trials, grid, seed, decay, band):
    """One grid level: per-trial LHS/RHS for both left-norm variants."""
    lhs_params, rhs1, rhs2 = _probe_weights(estimate, l, k, eps, pair)
    ratios = {1: [], -1: []}
    rows = {1: [], -1: []}
    skipped = 0
    for trial in range(trials):
        trial_seed = key_hash(seed, trial).item()
        psi = random_xt_spinor(grid, pair.s1, rhs1.s, rhs1.b, trial_seed, 1, decay, band)
        psi2 = random_xt_spinor(grid, pair.s2, rhs2.s, rhs2.b, trial_seed, 2, decay, band)
        rhs = xsb_norm(SpaceTimeField(grid, psi), rhs1) * xsb_norm(
            SpaceTimeField(grid, psi2), rhs2
        )
        if rhs == 0.0:
            skipped += 1
            continue
        nf = nullform_xt(
            grid,
            project_spinor_xt(grid, psi, pair.s1),
            project_spinor_xt(grid, psi2, pair.s2),
        )
        nf_field = SpaceTimeField(grid, nf)
        for pm in (1, -1):
            lhs = xsb_norm(nf_field, lhs_params[pm])
            ratios[pm].append(lhs / rhs)
            rows[pm].append(
                {
                    "l": l, "k": k, "eps": eps,
                    "pair": f"{'+' if pair.s1 > 0 else '-'}{'+' if pair.s2 > 0 else '-'}",
                    "phi_sign": pm,
                    "grid_n": grid.n, "grid_nt": grid.n_t,
                    "trial": trial, "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs,
                }
            )
    return ratios, rows, skipped


def probe_estimate(
    estimate: str,
    l: float,
    k: float,
    eps: float,
    pair: SignPair,
    trials: int,
    grid: SpaceTimeGrid,
    seed: int = 0,
    refine: bool = True,
    decay: float = 0.9,
) -> ProbeResult:
    """Ratio statistics for one bilinear estimate, both left-norm variants.

    The trial data are band-limited to the base lattice and keyed by integer
    mode, so with ``refine`` the doubled lattice re-evaluates the identical
    fields: the right-hand norms match exactly and the growth factor
    max_fine / max_coarse isolates how much null-form mass the base lattice
    truncates.  A converged discretization keeps it within [1, 1.1].
    """
    band = (grid.n // 3, grid.n_t // 3)
    ratios, rows, skipped = _ratio_pass(
        estimate, l, k, eps, pair, trials, grid, seed, decay, band
    )
    fine = None
    if refine:
        fine = _ratio_pass(
            estimate, l, k, eps, pair, trials, grid.doubled(), seed, decay, band
        )
    variants = {}
    for pm in (1, -1):
        arr = np.array(ratios[pm])
        all_rows = list(rows[pm])
        growth = None
        if fine is not None:
            fine_arr = np.array(fine[0][pm])
            growth = float(fine_arr.max() / arr.max()) if arr.size and fine_arr.size else None
            all_rows += fine[1][pm]
        variants[pm] = VariantStats(
            phi_sign=pm,
            max_ratio=float(arr.max()) if arr.size else 0.0,
            mean_ratio=float(arr.mean()) if arr.size else 0.0,
            growth=growth,
            rows=all_rows,
            skipped=skipped + (fine[2] if fine is not None else 0),
        )
    return ProbeResult(estimate, l, k, eps, pair, variants)


def probe_estimate_star2(l, k, eps, pair, phi_sign, trials, grid, seed=0, refine=True):
    return probe_estimate("star2", l, k, eps, pair, trials, grid, seed, refine)


def probe_estimate_star3(l, k, eps, pair, phi_sign, trials, grid, seed=0, refine=True):
    return probe_estimate("star3", l, k, eps, pair, trials, grid, seed, refine)


# --------------------------------------------------------------------------
# the algebraic inequalities


class ModulationTriple(NamedTuple):
    """Distances to the characteristics in one case of the proofs."""

    sigma1: np.ndarray
    sigma2: np.ndarray
    sigma: np.ndarray


def modulations(pair: SignPair, phi_sign: int, xi1, xi2, tau1, tau2) -> ModulationTriple:
    """sigma1 = tau1 + s1|xi1|, sigma2 = tau2 - s2|xi2|, sigma = tau +- |xi|.

    The sign on sigma2 is opposite to s2 because the second factor enters at
    the reflected frequency pair (-xi2, -tau2).
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    tau1 = np.asarray(tau1, dtype=float)
    tau2 = np.asarray(tau2, dtype=float)
    sigma1 = tau1 + pair.s1 * np.abs(xi1)
    sigma2 = tau2 - pair.s2 * np.abs(xi2)
    sigma = (tau1 + tau2) + phi_sign * np.abs(xi1 + xi2)
    return ModulationTriple(sigma1, sigma2, sigma)


def check_algebraic_inequality(pair: SignPair, phi_sign: int, xi1, xi2, tau1, tau2):
    """2 min(|xi1|, |xi2|) <= |sigma1| + |sigma2| + |sigma| on the case region.

    Mixed-sign pairs live on xi1*xi2 <= 0, equal-sign pairs on xi1*xi2 >= 0
    (zero frequencies belong to both closed regions).  Returns (holds, slack).
    """
    if phi_sign not in (1, -1):
        raise ValueError("phi_sign must be +1 or -1")
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    product = xi1 * xi2
    if pair.mixed:
        if np.any(product > 0.0):
            raise ValueError("mixed-sign pairs require xi1 * xi2 <= 0")
    elif np.any(product < 0.0):
        raise ValueError("equal-sign pairs require xi1 * xi2 >= 0")
    m = modulations(pair, phi_sign, xi1, xi2, tau1, tau2)
    lhs = 2.0 * np.minimum(np.abs(xi1), np.abs(xi2))
    slack = np.abs(m.sigma1) + np.abs(m.sigma2) + np.abs(m.sigma) - lhs
    return slack >= 0.0, slack


def _dyadic(words, magnitude):
    """Uniform dyadic rationals j/8 with |j| <= 8*magnitude: float-exact."""
    span = np.uint64(16 * 8 * magnitude + 1)
    j = (words % span).astype(np.int64) - 8 * 8 * magnitude
    return j / 8.0


def inequality_scan(samples: int, seed: int = 0, magnitude: int = 100):
    """Random sampling of all 8 case regions; every draw is a dyadic rational
    so the slack arithmetic is exact in binary floating point.

    Returns {(pair, phi_sign): {"violations": int, "min_slack": float}}.
    """
    results = {}
    case_idx = 0
    for pair in ((SignPair(1, 1), SignPair(1, -1), SignPair(-1, 1), SignPair(-1, -1))):
        for phi_sign in (1, -1):
            case_idx += 1
            idx = np.arange(samples, dtype=np.int64)
            mag = np.int64(8 * magnitude)
            u1 = (key_hash(seed, case_idx, 1, idx) % np.uint64(mag)).astype(np.int64) + 1
            u2 = (key_hash(seed, case_idx, 2, idx) % np.uint64(mag)).astype(np.int64) + 1
            orient = np.where(
                (key_hash(seed, case_idx, 3, idx) & np.uint64(1)).astype(bool), 1.0, -1.0
            )
            if pair.mixed:
                xi1 = orient * u1 / 8.0
                xi2 = -orient * u2 / 8.0
            else:
                xi1 = orient * u1 / 8.0
                xi2 = orient * u2 / 8.0
            tau1 = _dyadic(key_hash(seed, case_idx, 4, idx), magnitude)
            tau2 = _dyadic(key_hash(seed, case_idx, 5, idx), magnitude)
            ok, slack = check_algebraic_inequality(pair, phi_sign, xi1, xi2, tau1, tau2)
            results[(pair, phi_sign)] = {
                "violations": int(np.sum(~ok)),
                "min_slack": float(np.min(slack)),
            }
    return results


# --------------------------------------------------------------------------
# the product estimate with its grid-derived constant


def _pad_double_1d(grid: SpectralGrid, coef):
    c = np.fft.fftshift(coef, axes=-1)
    out = np.zeros(coef.shape[:-1] + (2 * grid.n,), dtype=complex)
    out[..., grid.n // 2 : 3 * grid.n // 2] = c
    return np.fft.ifftshift(out, axes=-1)


def product_constant(grid: SpectralGrid, k: float, allow_supercritical: bool = False) -> float:
    """C_k with C_k^2 = (1/L) sum <xi>^(2(k-1)) over the doubled lattice.

    Repeats the Cauchy-Schwarz derivation with sums in place of integrals, so
    ||u v||_{H^(k-1)} <= C_k ||u|| ||v|| is a hard bound for grid fields.  The
    mode sum converges as n grows only for k < 1/2; larger k needs the
    explicit supercritical flag.
    """
    if k >= 0.5 and not allow_supercritical:
        raise ValueError(
            f"k={k} >= 1/2: the constant diverges under refinement "
            "(pass allow_supercritical=True to evaluate at fixed n)"
        )
    pad = SpectralGrid(2 * grid.n, grid.L)
    return float(np.sqrt(np.sum(pad.bracket ** (2.0 * (k - 1.0))) / grid.L))


def product_estimate_check(u, v, k: float, allow_supercritical: bool = False):
    """(lhs, rhs_bound, ratio) for ||u v||_{H^(k-1)} <= C_k ||u|| ||v||.

    The product is evaluated alias-free on the doubled lattice and the norm
    summed over exactly the modes C_k counts, so ratio <= 1 by construction.
    """
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")
    grid = u.grid
    c_k = product_constant(grid, k, allow_supercritical)
    pad = SpectralGrid(2 * grid.n, grid.L)
    a = np.fft.ifft(_pad_double_1d(grid, u.coef)) * pad.n
    b = np.fft.ifft(_pad_double_1d(grid, v.coef)) * pad.n
    w = np.fft.fft(a * b) / pad.n
    lhs = float(np.sqrt(grid.L * np.sum(pad.bracket ** (2.0 * (k - 1.0)) * np.abs(w) ** 2)))
    norm_u = float(np.sqrt(grid.L * np.sum(np.abs(u.coef) ** 2)))
    norm_v = float(np.sqrt(grid.L * np.sum(np.abs(v.coef) ** 2)))
    rhs = c_k * norm_u * norm_v
    ratio = lhs / rhs if rhs > 0.0 else 0.0
    return lhs, rhs, ratio


# --------------------------------------------------------------------------
# a-priori bound monitor


@dataclass
class GronwallReport:
    times: np.ndarray
    values: np.ndarray
    bounds: np.ndarray
    c_k: float
    charge0: float
    data_norm: float
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def gronwall_monitor(traj, k: float, params, slack: float = 1.1, c_k=None) -> GronwallReport:
    """Check ||phi||_{H^k} + ||phi_t||_{H^(k-1)} against the a-priori bound

        slack * (2*(||phi0|| + ||phi1||) + 2*C_k*Q*t) * exp(|c0| t)

    with Q the initial charge.  The factor 2 comes from |cos|, |sin| <= 1 and
    the exact <xi>-multiplier identities of the mass-one wave operator.
    Violations are reported with their time stamps, never raised.
    """
    from .grid import sobolev_norm
    from .state import charge as charge_fn, to_physical

    if not traj.states:
        raise ValueError("trajectory has no snapshots")

    def physical(s):
        return to_physical(s, params, warn_tol=np.inf) if traj.kind == "diagonal" else s

    first = physical(traj.states[0])
    grid = first.grid
    if c_k is None:
        c_k = product_constant(grid, k)
    q0 = charge_fn(first.psi)
    data_norm = sobolev_norm(first.phi, k) + sobolev_norm(first.phi_t, k - 1.0)
    t0 = traj.times[0]
    times, values, bounds, violations = [], [], [], []
    for state in traj.states:
        p = physical(state)
        val = sobolev_norm(p.phi, k) + sobolev_norm(p.phi_t, k - 1.0)
        t = p.t - t0
        bound = slack * (2.0 * data_norm + 2.0 * c_k * q0 * t) * np.exp(abs(params.c0) * t)
        times.append(p.t)
        values.append(val)
        bounds.append(bound)
        if val > bound:
            violations.append((p.t, val, bound))
    return GronwallReport(
        np.array(times), np.array(values), np.array(bounds), c_k, q0, data_norm, violations
    )
