"""Time evolution of the diagonalized system and the physical cross-check.

The diagonal solver advances (psi+, psi-, phi+, phi-) whose linear flow is an
exact per-mode phase (e^{-+ i t |xi|} for the spinor halves, e^{-+ i t <xi>}
for the scalar halves).  Schemes:

  * lawson-rk4: classical RK4 on the integrating-factor-conjugated variables,
  * strang: half free flow, explicit-midpoint nonlinear substep, half flow,
  * picard: fixed-point iteration of the Duhamel integral equations with
    composite-trapezoid quadrature, exposing the per-iterate contraction.

An independent reference solver evolves the untransformed (psi, phi, phi_t):
the Dirac block by the exact per-mode flow of xi*alpha + M*beta under RK4
stages, the wave block by the exact cos/sin rotation of (phi, phi_t).  It
never touches the eigenspace projections, so agreement under dt refinement
cross-validates the whole diagonalization.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import Field, SpectralGrid, hermitian_part, sobolev_norm
from .rhs import dirac_rhs_coef, kg_rhs_coef, nullform_coef
from .state import (
    DiagonalState,
    Params,
    PhysicalState,
    beta_swap,
    charge,
    to_diagonal,
    to_physical,
)

SCHEMES = ("lawson-rk4", "strang", "picard")

TRAJECTORY_COLUMNS = (
    "time",
    "charge",
    "psi_h_minus_l",
    "phi_h_k",
    "phi_t_h_km1",
    "reality_residue",
    "projection_residue",
)


class NumericalBlowup(RuntimeError):
    """Raised when a step produces NaN or infinity; carries the last good state."""

    def __init__(self, t, last_good):
        super().__init__(f"non-finite values at t={t:.6g}")
        self.t = t
        self.last_good = last_good


@dataclass
class PicardConfig:
    T_p: float = 0.05
    nodes: int = 33
    max_iter: int = 30
    tol: float = 1e-12

    def __post_init__(self):
        if self.nodes < 2:
            raise ValueError(f"picard needs at least 2 nodes, got {self.nodes}")
        if self.T_p <= 0:
            raise ValueError("picard interval must be positive")


@dataclass
class SchemeConfig:
    scheme: str = "lawson-rk4"
    dt: float = 1e-2
    T: float = 1.0
    picard: PicardConfig | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, pick from {SCHEMES}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.T < self.dt:
            raise ValueError("final time must be at least one step")
        if self.scheme == "picard" and self.picard is None:
            self.picard = PicardConfig()


# --------------------------------------------------------------------------
# packed representation: rows (psi+_1, psi+_2, psi-_1, psi-_2, phi+, phi-)


def _pack(d: DiagonalState):
    return np.vstack(
        [d.psi_p.coef, d.psi_m.coef, d.phi_p.coef[None, :], d.phi_m.coef[None, :]]
    )


def _unpack(grid: SpectralGrid, y, t) -> DiagonalState:
    return DiagonalState(
        Field(grid, y[0:2].copy()),
        Field(grid, y[2:4].copy()),
        Field(grid, y[4].copy()),
        Field(grid, y[5].copy()),
        t=t,
    )


def _phases(grid: SpectralGrid, theta: float):
    """Free-flow phases for duration theta, one row per packed component."""
    wave = np.exp(-1j * theta * grid.abs_xi)
    kg = np.exp(-1j * theta * grid.bracket)
    return np.vstack([wave, wave, np.conj(wave), np.conj(wave), kg, np.conj(kg)])


def _nonlinear(grid: SpectralGrid, y, params: Params):
    """Duhamel sources: i F_+- for the spinor rows, -i G_+- for the scalars."""
    f_p, f_m = dirac_rhs_coef(grid, y[0:2], y[2:4], y[4], y[5], params)
    g_p, g_m = kg_rhs_coef(grid, y[0:2], y[2:4], y[4], y[5], params)
    return np.vstack([1j * f_p, 1j * f_m, -1j * g_p[None, :], -1j * g_m[None, :]])


def state_norm(grid: SpectralGrid, y) -> float:
    """L2 norm of a packed state across all four components."""
    return float(np.sqrt(grid.L * np.sum(np.abs(y) ** 2)))


def free_flow(d: DiagonalState, dt: float) -> DiagonalState:
    """Exact linear evolution by time dt (machine-precision phases)."""
    y = _pack(d) * _phases(d.grid, dt)
    return _unpack(d.grid, y, d.t + dt)


class LawsonRK4:
    """RK4 applied after conjugating out the exact free flow."""

    def __init__(self, grid: SpectralGrid, params: Params, dt: float):
        self.grid = grid
        self.params = params
        self.dt = dt
        self.e_half = _phases(grid, dt / 2.0)
        self.e_half_inv = np.conj(self.e_half)
        self.e_full = _phases(grid, dt)
        self.e_full_inv = np.conj(self.e_full)

    def __call__(self, y):
        g, p, h = self.grid, self.params, self.dt
        k1 = _nonlinear(g, y, p)
        k2 = self.e_half_inv * _nonlinear(g, self.e_half * (y + 0.5 * h * k1), p)
        k3 = self.e_half_inv * _nonlinear(g, self.e_half * (y + 0.5 * h * k2), p)
        k4 = self.e_full_inv * _nonlinear(g, self.e_full * (y + h * k3), p)
        return self.e_full * (y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


class Strang:
    """Half free flow, explicit midpoint on the bounded sources, half flow."""

    def __init__(self, grid: SpectralGrid, params: Params, dt: float):
        self.grid = grid
        self.params = params
        self.dt = dt
        self.e_half = _phases(grid, dt / 2.0)

    def __call__(self, y):
        g, p, h = self.grid, self.params, self.dt
        y = self.e_half * y
        mid = y + 0.5 * h * _nonlinear(g, y, p)
        y = y + h * _nonlinear(g, mid, p)
        return self.e_half * y


def _make_stepper(grid, params, cfg: SchemeConfig):
    if cfg.scheme == "lawson-rk4":
        return LawsonRK4(grid, params, cfg.dt)
    if cfg.scheme == "strang":
        return Strang(grid, params, cfg.dt)
    raise ValueError(f"{cfg.scheme!r} is not a one-step scheme")


def step(d: DiagonalState, params: Params, cfg: SchemeConfig) -> DiagonalState:
    """Advance one step of the configured one-step scheme."""
    y = _make_stepper(d.grid, params, cfg)(_pack(d))
    if not np.all(np.isfinite(y)):
        raise NumericalBlowup(d.t + cfg.dt, d)
    return _unpack(d.grid, y, d.t + cfg.dt)


# --------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Snapshots plus the per-snapshot diagnostics row of the CSV schema."""

    kind: str
    params: Params
    l: float = 0.0
    k: float = 0.25
    times: list = dc_field(default_factory=list)
    states: list = dc_field(default_factory=list)
    rows: list = dc_field(default_factory=list)

    def record(self, state):
        if self.times and state.t <= self.times[-1]:
            raise ValueError("snapshot times must be strictly increasing")
        if self.kind == "diagonal":
            phys = to_physical(state, self.params, warn_tol=np.inf)
            reality = state.conjugation_residue()
            projection = state.projection_residue()
        else:
            phys = state
            reality = max(
                float(np.max(np.abs(state.phi.coef - hermitian_part(state.grid, state.phi.coef)))),
                float(np.max(np.abs(state.phi_t.coef - hermitian_part(state.grid, state.phi_t.coef)))),
            )
            projection = 0.0
        self.times.append(state.t)
        self.states.append(state)
        self.rows.append(
            {
                "time": state.t,
                "charge": charge(phys.psi),
                "psi_h_minus_l": sobolev_norm(phys.psi, -self.l),
                "phi_h_k": sobolev_norm(phys.phi, self.k),
                "phi_t_h_km1": sobolev_norm(phys.phi_t, self.k - 1.0),
                "reality_residue": reality,
                "projection_residue": projection,
            }
        )

    def column(self, name):
        return np.array([row[name] for row in self.rows])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRAJECTORY_COLUMNS)
            for row in self.rows:
                writer.writerow(f"{row[c]:.16e}" for c in TRAJECTORY_COLUMNS)


def solve(
    d0: DiagonalState,
    params: Params,
    cfg: SchemeConfig,
    l: float = 0.0,
    k: float = 0.25,
    save_every: int = 1,
) -> Trajectory:
    """March the diagonal system to cfg.T, recording every save_every steps."""
    grid = d0.grid
    stepper = _make_stepper(grid, params, cfg)
    n_steps = int(round(cfg.T / cfg.dt))
    traj = Trajectory("diagonal", params, l=l, k=k)
    traj.record(d0)
    y = _pack(d0)
    last_good = d0
    for j in range(1, n_steps + 1):
        y = stepper(y)
        t = d0.t + j * cfg.dt
        if not np.all(np.isfinite(y)):
            raise NumericalBlowup(t, last_good)
        if j % save_every == 0 or j == n_steps:
            last_good = _unpack(grid, y, t)
            traj.record(last_good)
    return traj


# --------------------------------------------------------------------------
# Picard iteration of the integral equations


@dataclass
class PicardResult:
    node_times: np.ndarray
    diffs: list
    ratios: list
    converged: bool
    states: list  # last iterate, one DiagonalState per node
    iterate_count: int

    @property
    def final(self) -> DiagonalState:
        return self.states[-1]


def picard_solve(d0: DiagonalState, params: Params, cfg: SchemeConfig) -> PicardResult:
    """Iterate data + Duhamel quadrature until the sup-node update stalls.

    Divergence (persistent ratio > 1) is surfaced in the returned ratios,
    not raised: the contraction is only expected on short intervals.
    """
    pc = cfg.picard if cfg.picard is not None else PicardConfig()
    grid = d0.grid
    n_nodes = pc.nodes
    h = pc.T_p / (n_nodes - 1)
    t_nodes = d0.t + h * np.arange(n_nodes)
    # phases for every multiple of h used by the convolution sums
    e_pow = [_phases(grid, p * h) for p in range(n_nodes)]
    y0 = _pack(d0)
    current = [e_pow[j] * y0 for j in range(n_nodes)]
    diffs, ratios = [], []
    converged = False
    for _ in range(pc.max_iter):
        sources = [_nonlinear(grid, y, params) for y in current]
        new = [current[0]]
        for j in range(1, n_nodes):
            acc = e_pow[j] * y0
            # composite trapezoid over the first j intervals
            acc = acc + 0.5 * h * (e_pow[j] * sources[0] + sources[j])
            for i in range(1, j):
                acc = acc + h * (e_pow[j - i] * sources[i])
            new.append(acc)
        d_j = max(
            state_norm(grid, a - b) for a, b in zip(new[1:], current[1:])
        )
        diffs.append(d_j)
        if len(diffs) >= 2 and diffs[-2] > 0.0:
            ratios.append(diffs[-1] / diffs[-2])
        current = new
        if d_j <= pc.tol:
            converged = True
            break
    states = [_unpack(grid, y, t) for y, t in zip(current, t_nodes)]
    return PicardResult(t_nodes, diffs, ratios, converged, states, len(diffs))


# --------------------------------------------------------------------------
# Reference solver for the untransformed system


def _ref_pack(p: PhysicalState):
    return np.vstack([p.psi.coef, p.phi.coef[None, :], p.phi_t.coef[None, :]])


def _ref_unpack(grid, y, t) -> PhysicalState:
    # keep the raw coefficients so the recorded reality residue is honest
    return PhysicalState(
        Field(grid, y[0:2].copy()),
        Field(grid, y[2].copy(), real=True),
        Field(grid, y[3].copy(), real=True),
        t=t,
    )


class _ReferenceFlow:
    """Exact linear propagator of the physical variables for a fixed duration.

    Dirac block: exp(-i theta (xi alpha + M beta)) in closed form per mode.
    Wave block: rotation by cos/sin of theta * sqrt(xi^2 + m^2).
    """

    def __init__(self, grid: SpectralGrid, params: Params, theta: float):
        omega = np.sqrt(grid.xi**2 + params.M**2)
        self.cos_d = np.cos(theta * omega)
        # sin(theta w)/w with the w -> 0 limit theta
        self.sinc_d = np.where(
            omega > 0.0, np.sin(theta * omega) / np.where(omega > 0.0, omega, 1.0), theta
        )
        self.m_plus = params.M + 1j * grid.xi
        self.m_minus = params.M - 1j * grid.xi
        big_omega = np.sqrt(grid.xi**2 + params.m**2)
        self.cos_w = np.cos(theta * big_omega)
        self.sin_w = np.sin(theta * big_omega)
        self.omega_w = big_omega

    def __call__(self, y):
        out = np.empty_like(y)
        # H psi = ((M - i xi) psi_2, (M + i xi) psi_1)
        out[0] = self.cos_d * y[0] - 1j * self.sinc_d * (self.m_minus * y[1])
        out[1] = self.cos_d * y[1] - 1j * self.sinc_d * (self.m_plus * y[0])
        out[2] = self.cos_w * y[2] + (self.sin_w / self.omega_w) * y[3]
        out[3] = -self.omega_w * self.sin_w * y[2] + self.cos_w * y[3]
        return out


def _ref_nonlinear(grid: SpectralGrid, y, params: Params):
    out = np.zeros_like(y)
    if params.g != 0.0:
        phi = grid.to_physical(y[2])
        beta_psi = grid.to_physical(beta_swap(y[0:2]))
        out[0:2] = 1j * params.g * grid.dealias(grid.to_spectral(phi * beta_psi))
    out[3] = nullform_coef(grid, y[0:2], y[0:2])
    return out


def reference_solve(
    p0: PhysicalState,
    params: Params,
    dt: float,
    T: float,
    l: float = 0.0,
    k: float = 0.25,
    save_every: int = 1,
) -> Trajectory:
    """Integrate the original system; used only to cross-validate."""
    grid = p0.grid
    e_half = _ReferenceFlow(grid, params, dt / 2.0)
    e_half_inv = _ReferenceFlow(grid, params, -dt / 2.0)
    e_full = _ReferenceFlow(grid, params, dt)
    e_full_inv = _ReferenceFlow(grid, params, -dt)
    n_steps = int(round(T / dt))
    traj = Trajectory("physical", params, l=l, k=k)
    traj.record(p0)
    y = _ref_pack(p0)
    last_good = p0
    for j in range(1, n_steps + 1):
        k1 = _ref_nonlinear(grid, y, params)
        k2 = e_half_inv(_ref_nonlinear(grid, e_half(y + 0.5 * dt * k1), params))
        k3 = e_half_inv(_ref_nonlinear(grid, e_half(y + 0.5 * dt * k2), params))
        k4 = e_full_inv(_ref_nonlinear(grid, e_full(y + dt * k3), params))
        y = e_full(y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        t = p0.t + j * dt
        if not np.all(np.isfinite(y)):
            raise NumericalBlowup(t, last_good)
        if j % save_every == 0 or j == n_steps:
            last_good = _ref_unpack(grid, y, t)
            traj.record(last_good)
    return traj


def diagonal_l2_difference(a: DiagonalState, b) -> float:
    """L2 distance between two states, converting physical ones as needed."""
    if isinstance(b, PhysicalState):
        b = to_diagonal(b, Params())
    return state_norm(a.grid, _pack(a) - _pack(b))
