"""Periodic spectral grid, fields, Fourier multipliers, and Sobolev norms.

Every operator downstream is a function of the frequency variable, so this
module owns the transform convention once and for all:

    fhat(xi) = (1/n) * sum_j f(x_j) exp(-i xi x_j)        (forward, average)
    f(x_j)   = sum_xi fhat(xi) exp(i xi x_j)              (inverse)
    ||f||_{L2}^2 = L * sum_xi |fhat(xi)|^2 = (L/n) * sum_j |f(x_j)|^2

Frequencies are the integer lattice {-n/2, ..., n/2 - 1} scaled by 2*pi/L,
stored in FFT order.  Quadratic products are dealiased by the 2/3 rule:
after every physical-space product the modes with |k| > n//3 are zeroed.
For power-of-two n >= 8 this cutoff is alias-safe (the aliased image of any
retained-mode product falls outside the retained band).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


class GridError(ValueError):
    """Invalid grid construction or an operation across mismatched grids."""


class SpectralGrid:
    """Uniform periodic grid on [0, L) with n points, n even and >= 8."""

    def __init__(self, n: int, L: float = TWO_PI):
        if n % 2 != 0 or n < 8:
            raise GridError(f"grid size must be even and >= 8, got n={n}")
        if L <= 0:
            raise GridError(f"period must be positive, got L={L}")
        self.n = int(n)
        self.L = float(L)
        self.x = np.arange(self.n) * (self.L / self.n)
        # FFT-ordered integer frequencies 0, 1, ..., n/2-1, -n/2, ..., -1
        self.k_int = np.rint(np.fft.fftfreq(self.n) * self.n).astype(np.int64)
        self.xi = self.k_int * (TWO_PI / self.L)
        self.abs_xi = np.abs(self.xi)
        self.bracket = np.sqrt(1.0 + self.xi**2)  # <xi> = (1 + xi^2)^(1/2)
        # sign of xi with the pinned convention sgn(0) := +1
        self.sgn = np.where(self.xi < 0.0, -1, 1).astype(np.int64)
        # keep |k| <= cut with 2*cut <= n - cut - 1, so retained products
        # never alias back into the retained band; equals n//3 when 3 !| n
        self.dealias_cut = (self.n - 1) // 3
        self.dealias_keep = np.abs(self.k_int) <= self.dealias_cut
        # index map k -> -k (mod n); Nyquist maps to itself
        self.reflect = (-np.arange(self.n)) % self.n

    def to_spectral(self, values):
        return np.fft.fft(values, axis=-1) / self.n

    def to_physical(self, coef):
        return np.fft.ifft(coef, axis=-1) * self.n

    def dealias(self, coef):
        return np.where(self.dealias_keep, coef, 0.0)

    def __eq__(self, other):
        return (
            isinstance(other, SpectralGrid)
            and self.n == other.n
            and self.L == other.L
        )

    def __hash__(self):
        return hash((self.n, self.L))

    def __repr__(self):
        return f"SpectralGrid(n={self.n}, L={self.L!r})"


def make_grid(n: int, L: float = TWO_PI) -> SpectralGrid:
    """Build a grid; rejects odd or too-small n and nonpositive periods."""
    return SpectralGrid(n, L)


@dataclass
class Field:
    """A scalar or two-component field stored as spectral coefficients.

    ``coef`` has shape (n,) for scalars or (2, n) for spinors, FFT-ordered.
    ``real`` asserts that the physical-space values are real, i.e. the
    coefficients are Hermitian-symmetric and the Nyquist coefficient is real.
    """

    grid: SpectralGrid
    coef: np.ndarray
    real: bool = False

    def __post_init__(self):
        self.coef = np.asarray(self.coef, dtype=complex)
        if self.coef.shape[-1] != self.grid.n:
            raise GridError(
                f"coefficient length {self.coef.shape[-1]} != grid size {self.grid.n}"
            )
        if self.coef.ndim not in (1, 2):
            raise GridError("field must be a scalar or a component stack")

    @property
    def ncomp(self) -> int:
        return 1 if self.coef.ndim == 1 else self.coef.shape[0]

    @classmethod
    def from_physical(cls, grid: SpectralGrid, values, real=None) -> "Field":
        values = np.asarray(values)
        if real is None:
            real = not np.iscomplexobj(values)
        return cls(grid, grid.to_spectral(values), real=bool(real))

    def physical(self) -> np.ndarray:
        return self.grid.to_physical(self.coef)

    def copy(self) -> "Field":
        return Field(self.grid, self.coef.copy(), real=self.real)

    def reality_residue(self) -> float:
        """Max deviation of the coefficients from Hermitian symmetry."""
        sym = hermitian_part(self.grid, self.coef)
        return float(np.max(np.abs(self.coef - sym)))


def hermitian_part(grid: SpectralGrid, coef):
    """Project spectral coefficients onto the real-valued (Hermitian) part."""
    return 0.5 * (coef + np.conj(coef[..., grid.reflect]))


def symmetrize(f: Field) -> Field:
    return Field(f.grid, hermitian_part(f.grid, f.coef), real=True)


@dataclass(frozen=True)
class Multiplier:
    """A Fourier multiplier: tabulated symbol values on the grid lattice."""

    grid: SpectralGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.n,):
            raise GridError(
                f"tabulated symbol length {vals.shape} != grid size {self.grid.n}"
            )
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: SpectralGrid, fn) -> "Multiplier":
        return cls(grid, np.asarray(fn(grid.xi), dtype=complex))

    def is_hermitian_symbol(self) -> bool:
        """True when m(-xi) = conj(m(xi)), so real fields stay real."""
        refl = np.conj(self.values[self.grid.reflect])
        scale = max(1.0, float(np.max(np.abs(self.values))))
        return bool(np.max(np.abs(self.values - refl)) <= 1e-14 * scale)


def as_multiplier(grid: SpectralGrid, m) -> Multiplier:
    if isinstance(m, Multiplier):
        return m
    if callable(m):
        return Multiplier.from_function(grid, m)
    return Multiplier(grid, np.asarray(m, dtype=complex))


def apply_multiplier(f: Field, m) -> Field:
    """Pointwise spectral multiplication (m f)^(xi) = m(xi) fhat(xi).

    The reality flag survives only for Hermitian symbols.
    """
    mult = as_multiplier(f.grid, m)
    if mult.grid != f.grid:
        raise GridError("field and multiplier live on different grids")
    keep_real = f.real and mult.is_hermitian_symbol()
    return Field(f.grid, f.coef * mult.values, real=keep_real)


def sobolev_norm(f: Field, s: float) -> float:
    """H^s norm: (L * sum <xi>^(2s) |fhat|^2)^(1/2), summed over components."""
    w = f.grid.bracket ** (2.0 * s)
    total = np.sum(w * np.abs(f.coef) ** 2)
    return float(np.sqrt(f.grid.L * total))


def l2_norm(f: Field) -> float:
    return sobolev_norm(f, 0.0)


def l2_norm_physical(f: Field) -> float:
    """L2 norm evaluated on the physical side, ((L/n) sum_j |f(x_j)|^2)^(1/2)."""
    vals = f.physical()
    return float(np.sqrt(f.grid.L / f.grid.n * np.sum(np.abs(vals) ** 2)))
