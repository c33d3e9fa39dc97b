"""Exact 2x2 matrix algebra of the one-dimensional Dirac operator.

The canonical hermitian pair alpha, beta (alpha^2 = beta^2 = I and
alpha beta + beta alpha = 0) is fixed below, but every function accepts a
substitute pair so the anticommutation requirements can be probed directly.
Inner products on C^2 conjugate the second slot: <u, v> = sum_i u_i conj(v_i).

The sign convention xi_hat(0) := +1 makes the eigenspace projections a
complementary pair on every grid mode, including the zero mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

ALPHA = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
BETA = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
I2 = np.eye(2, dtype=complex)
ZERO2 = np.zeros((2, 2), dtype=complex)

_SIGNS = (1, -1)


class SignPair(NamedTuple):
    """Independent projection signs of the two null-form arguments."""

    s1: int
    s2: int

    @property
    def mixed(self) -> bool:
        return self.s1 != self.s2


SIGN_PAIRS = (SignPair(1, 1), SignPair(1, -1), SignPair(-1, 1), SignPair(-1, -1))


def _check_sign(value, name):
    if value not in _SIGNS:
        raise ValueError(f"{name} must be +1 or -1, got {value}")


def projection(sign: int, xi_hat: int, alpha=ALPHA):
    """Eigenspace projection (1/2)(I + sign * xi_hat * alpha).

    Hermitian, idempotent, and projection(+1, x) + projection(-1, x) = I.
    """
    _check_sign(sign, "sign")
    _check_sign(xi_hat, "xi_hat")
    return 0.5 * (I2 + sign * xi_hat * alpha)


def gamma(pair: SignPair, sgn1: int, sgn2: int, alpha=ALPHA, beta=BETA):
    """Null-form symbol beta * proj(s2, sgn2) * proj(s1, sgn1), in closed form.

    Nonzero exactly when s1*sgn1 == s2*sgn2 =: e, where it equals
    (1/2)(beta + e * beta alpha); the other half of the table vanishes.
    """
    _check_sign(sgn1, "sgn1")
    _check_sign(sgn2, "sgn2")
    e = pair.s1 * sgn1
    if e != pair.s2 * sgn2:
        return ZERO2.copy()
    return 0.5 * (beta + e * (beta @ alpha))


def gamma_table(alpha=ALPHA, beta=BETA):
    """All 16 cells of the sign-indexed null-form symbol."""
    return {
        (pair, sgn1, sgn2): gamma(pair, sgn1, sgn2, alpha=alpha, beta=beta)
        for pair in SIGN_PAIRS
        for sgn1 in _SIGNS
        for sgn2 in _SIGNS
    }


@dataclass
class AlgebraReport:
    """Per-identity deviations from the exact Dirac matrix relations."""

    deviations: dict = field(default_factory=dict)
    tol: float = 1e-12

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values(), default=0.0)

    @property
    def violations(self):
        return sorted(k for k, v in self.deviations.items() if v > self.tol)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_algebra(alpha=ALPHA, beta=BETA, tol: float = 1e-12) -> AlgebraReport:
    """Check every identity the diagonalization relies on.

    alpha^2 = beta^2 = I, anticommutation, hermiticity, idempotence and
    orthogonality of the projections, the beta swap proj(s)beta = beta proj(-s),
    completeness, and the reflection proj(+1, -x) = proj(-1, x).
    """

    def dev(m):
        return float(np.max(np.abs(m)))

    report = AlgebraReport(tol=tol)
    d = report.deviations
    d["alpha_squared"] = dev(alpha @ alpha - I2)
    d["beta_squared"] = dev(beta @ beta - I2)
    d["anticommutation"] = dev(alpha @ beta + beta @ alpha)
    d["alpha_hermitian"] = dev(alpha - alpha.conj().T)
    d["beta_hermitian"] = dev(beta - beta.conj().T)
    for xh in _SIGNS:
        tag = "plus" if xh == 1 else "minus"
        pp = projection(1, xh, alpha=alpha)
        pm = projection(-1, xh, alpha=alpha)
        d[f"idempotent_{tag}"] = max(dev(pp @ pp - pp), dev(pm @ pm - pm))
        d[f"orthogonal_{tag}"] = max(dev(pp @ pm), dev(pm @ pp))
        d[f"complete_{tag}"] = dev(pp + pm - I2)
        d[f"hermitian_proj_{tag}"] = max(
            dev(pp - pp.conj().T), dev(pm - pm.conj().T)
        )
        d[f"beta_swap_{tag}"] = max(
            dev(pp @ beta - beta @ pm), dev(pm @ beta - beta @ pp)
        )
        d[f"reflection_{tag}"] = dev(
            projection(1, -xh, alpha=alpha) - projection(-1, xh, alpha=alpha)
        )
    return report
