"""State containers for the coupled spinor/scalar system and conversions.

PhysicalState carries (psi, phi, phi_t); DiagonalState carries the four
half-wave variables (psi+, psi-, phi+, phi-).  The diagonalization uses the
mass-one wave operator A = -d^2/dx^2 + 1 throughout, so A^(s/2) is exactly the
<xi>^s multiplier; a physical mass m != 1 only contributes the linear source
coefficient c0 = 1 - m^2 handled by the right-hand sides.

Random rough data and all seeded draws use the splitmix64 counter generator,
so every example is bit-reproducible across platforms.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .grid import Field, GridError, SpectralGrid, hermitian_part

# ---------------------------------------------------------------------------
# splitmix64: counter-based 64-bit generator with published constants.

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64


def _mix64(z):
    with np.errstate(over="ignore"):  # modular uint64 wraparound is intended
        z = np.asarray(z, dtype=np.uint64) + _GOLDEN
        z = (z ^ (z >> _U64(30))) * _MIX1
        z = (z ^ (z >> _U64(27))) * _MIX2
        return z ^ (z >> _U64(31))


def key_hash(seed: int, *keys):
    """Hash (seed, k1, k2, ...) to uint64 words; keys may be integer arrays."""
    h = _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    for k in keys:
        k64 = np.asarray(k, dtype=np.int64).astype(np.uint64)
        h = _mix64(h ^ (k64 + _GOLDEN))
    return h


def _uniform01(words):
    return (words >> _U64(11)).astype(np.float64) * (2.0**-53)


def complex_gauss(seed: int, *keys):
    """Standard complex Gaussian draws keyed by (seed, keys): E|z|^2 = 1."""
    h = key_hash(seed, *keys)
    u1 = _uniform01(_mix64(h))
    u2 = _uniform01(_mix64(h ^ _GOLDEN))
    r = np.sqrt(-np.log1p(-u1))
    return r * np.exp(2j * np.pi * u2)


# ---------------------------------------------------------------------------


@dataclass
class Params:
    """Physical constants: Dirac mass M, scalar mass m > 0, coupling g."""

    M: float = 1.0
    m: float = 1.0
    g: float = 1.0

    def __post_init__(self):
        if self.m <= 0:
            raise ValueError(f"scalar mass must be positive, got m={self.m}")

    @property
    def c0(self) -> float:
        return 1.0 - self.m**2


def project_spinor(grid: SpectralGrid, coef, sign: int):
    """Apply the eigenspace projection mode-by-mode to spinor coefficients.

    For the canonical alpha, (alpha psi) = (-i psi2, i psi1), so
    proj(sign, xi) psi = (psi + sign*sgn(xi)*alpha psi) / 2.
    """
    s = sign * grid.sgn
    c1, c2 = coef[0], coef[1]
    return np.stack([0.5 * (c1 - 1j * s * c2), 0.5 * (c2 + 1j * s * c1)])


def beta_swap(coef):
    """beta psi for the canonical beta: swap the two components."""
    return coef[::-1]


@dataclass
class PhysicalState:
    """(psi, phi, phi_t) at a fixed time; phi and phi_t are real fields."""

    psi: Field
    phi: Field
    phi_t: Field
    t: float = 0.0
    reality_residue: float = 0.0

    def __post_init__(self):
        if not (self.psi.grid == self.phi.grid == self.phi_t.grid):
            raise GridError("state components live on different grids")
        if self.psi.ncomp != 2:
            raise GridError("psi must have two components")

    @property
    def grid(self) -> SpectralGrid:
        return self.psi.grid


@dataclass
class DiagonalState:
    """Half-wave variables (psi+, psi-, phi+, phi-) at a fixed time."""

    psi_p: Field
    psi_m: Field
    phi_p: Field
    phi_m: Field
    t: float = 0.0

    def __post_init__(self):
        grids = {f.grid for f in (self.psi_p, self.psi_m, self.phi_p, self.phi_m)}
        if len(grids) != 1:
            raise GridError("state components live on different grids")

    @property
    def grid(self) -> SpectralGrid:
        return self.psi_p.grid

    def copy(self) -> "DiagonalState":
        return DiagonalState(
            self.psi_p.copy(), self.psi_m.copy(),
            self.phi_p.copy(), self.phi_m.copy(), t=self.t,
        )

    def projection_residue(self) -> float:
        """Max relative deviation of psi+- from their projection ranges."""
        out = 0.0
        for f, sign in ((self.psi_p, 1), (self.psi_m, -1)):
            norm = np.sqrt(np.sum(np.abs(f.coef) ** 2))
            if norm == 0.0:
                continue
            residue = project_spinor(self.grid, f.coef, sign) - f.coef
            out = max(out, float(np.sqrt(np.sum(np.abs(residue) ** 2)) / norm))
        return out

    def conjugation_residue(self) -> float:
        """Max deviation from phi- = conj(phi+) (holds for real physical data)."""
        refl = np.conj(self.phi_p.coef[self.grid.reflect])
        scale = max(1.0, float(np.max(np.abs(self.phi_p.coef))))
        return float(np.max(np.abs(self.phi_m.coef - refl)) / scale)


def to_diagonal(p: PhysicalState, params: Params) -> DiagonalState:
    """Split psi into the projection ranges and phi into half waves.

    phi+- = phi +- i A^(-1/2) phi_t with the mass-one A, i.e. the <xi>^(-1)
    multiplier on the spectral side.
    """
    grid = p.grid
    psi_p = Field(grid, project_spinor(grid, p.psi.coef, +1))
    psi_m = Field(grid, project_spinor(grid, p.psi.coef, -1))
    shift = 1j * p.phi_t.coef / grid.bracket
    phi_p = Field(grid, p.phi.coef + shift)
    phi_m = Field(grid, p.phi.coef - shift)
    return DiagonalState(psi_p, psi_m, phi_p, phi_m, t=p.t)


def to_physical(d: DiagonalState, params: Params, warn_tol: float = 1e-10) -> PhysicalState:
    """Invert to_diagonal: psi = psi+ + psi-, phi = (phi+ + phi-)/2,
    phi_t = A^(1/2)(phi+ - phi-)/(2i).

    Reality of phi, phi_t is enforced by Hermitian symmetrization; the
    discarded residue is reported on the returned state (and warned about
    above ``warn_tol``), never silently grown.
    """
    grid = d.grid
    psi = Field(grid, d.psi_p.coef + d.psi_m.coef)
    phi_coef = 0.5 * (d.phi_p.coef + d.phi_m.coef)
    phi_t_coef = grid.bracket * (d.phi_p.coef - d.phi_m.coef) / 2j
    residue = 0.0
    sym = []
    for coef in (phi_coef, phi_t_coef):
        herm = hermitian_part(grid, coef)
        residue = max(residue, float(np.max(np.abs(coef - herm))))
        sym.append(herm)
    if residue > warn_tol:
        warnings.warn(
            f"imaginary residue {residue:.3e} discarded when reconstructing "
            "the real scalar pair",
            stacklevel=2,
        )
    return PhysicalState(
        psi,
        Field(grid, sym[0], real=True),
        Field(grid, sym[1], real=True),
        t=d.t,
        reality_residue=residue,
    )


def charge(psi: Field) -> float:
    """Conserved charge: the discrete integral of |psi|^2 over the period."""
    return float(psi.grid.L * np.sum(np.abs(psi.coef) ** 2))


def _smooth_cutoff(grid: SpectralGrid):
    # 1 on the lower half of the retained band, cos^2 rolloff on the upper
    # half, exactly 0 beyond the dealias cut, so data stay product-safe.
    a = np.abs(grid.k_int) / grid.dealias_cut
    ramp = np.cos(0.5 * np.pi * np.clip(2.0 * a - 1.0, 0.0, 1.0)) ** 2
    return np.where(a <= 1.0, ramp, 0.0)


def random_sobolev_field(
    grid: SpectralGrid,
    s: float,
    seed: int,
    components: int = 1,
    real: bool = False,
) -> Field:
    """Band-limited random data marginally in H^s.

    Coefficients are <xi>^(-s - 0.51) * cutoff * z with independent standard
    complex Gaussian z keyed by (seed, component, integer frequency), so the
    draw is deterministic for a fixed seed.  The 0.51 offset makes the H^s
    norm marginally convergent under refinement while every rougher norm
    diverges.
    """
    decay = grid.bracket ** (-(s + 0.51)) * _smooth_cutoff(grid)
    rows = [
        decay * complex_gauss(seed, c, grid.k_int) for c in range(components)
    ]
    coef = rows[0] if components == 1 else np.stack(rows)
    if real:
        coef = hermitian_part(grid, coef)
    return Field(grid, coef, real=real)


def random_physical_state(
    grid: SpectralGrid, l: float, k: float, seed: int, amplitude: float = 1.0
) -> PhysicalState:
    """Data in the classes H^(-l) x H^k x H^(k-1) from one seed."""
    psi = random_sobolev_field(grid, -l, key_hash(seed, 1).item(), components=2)
    phi = random_sobolev_field(grid, k, key_hash(seed, 2).item(), real=True)
    phi_t = random_sobolev_field(grid, k - 1.0, key_hash(seed, 3).item(), real=True)
    scale = lambda f: Field(grid, amplitude * f.coef, real=f.real)
    return PhysicalState(scale(psi), scale(phi), scale(phi_t))


# ---------------------------------------------------------------------------
# Snapshot files: a versioned JSON spectral dump (FFT-ordered coefficients).

SNAPSHOT_FORMAT = "dkg-lab-snapshot"
SNAPSHOT_VERSION = 1


def _pack(coef):
    arr = np.atleast_2d(coef)
    return {
        "re": [row.real.tolist() for row in arr],
        "im": [row.imag.tolist() for row in arr],
    }


def _unpack(blob, ncomp):
    coef = np.array(blob["re"], dtype=float) + 1j * np.array(blob["im"], dtype=float)
    return coef if ncomp > 1 else coef[0]


def save_state(state, params: Params, path):
    if isinstance(state, DiagonalState):
        kind = "diagonal"
        fields = {
            "psi_plus": state.psi_p.coef,
            "psi_minus": state.psi_m.coef,
            "phi_plus": state.phi_p.coef,
            "phi_minus": state.phi_m.coef,
        }
    elif isinstance(state, PhysicalState):
        kind = "physical"
        fields = {
            "psi": state.psi.coef,
            "phi": state.phi.coef,
            "phi_t": state.phi_t.coef,
        }
    else:
        raise TypeError(f"cannot snapshot {type(state).__name__}")
    doc = {
        "format": SNAPSHOT_FORMAT,
        "version": SNAPSHOT_VERSION,
        "kind": kind,
        "n": state.grid.n,
        "L": state.grid.L,
        "time": state.t,
        "params": {"M": params.M, "m": params.m, "g": params.g},
        "fields": {name: _pack(coef) for name, coef in fields.items()},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_state(path):
    """Read a snapshot; returns (state, params)."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != SNAPSHOT_FORMAT or doc.get("version") != SNAPSHOT_VERSION:
        raise ValueError(f"unrecognized snapshot header in {path}")
    grid = SpectralGrid(doc["n"], doc["L"])
    params = Params(**doc["params"])
    f = doc["fields"]
    if doc["kind"] == "diagonal":
        state = DiagonalState(
            Field(grid, _unpack(f["psi_plus"], 2)),
            Field(grid, _unpack(f["psi_minus"], 2)),
            Field(grid, _unpack(f["phi_plus"], 1)),
            Field(grid, _unpack(f["phi_minus"], 1)),
            t=doc["time"],
        )
    else:
        state = PhysicalState(
            Field(grid, _unpack(f["psi"], 2)),
            Field(grid, _unpack(f["phi"], 1), real=True),
            Field(grid, _unpack(f["phi_t"], 1), real=True),
            t=doc["time"],
        )
    return state, params
