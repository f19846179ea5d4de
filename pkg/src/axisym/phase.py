"""Phase-space primitives: points, observables, vector potentials, fields.

Positions and momenta are Cartesian throughout; the particle has unit
mass and charge -1, so the Hamiltonian is H = |p + A(q)|^2 / 2 + W(q)
with covariant momenta p^A = p + A.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Dual


class DomainError(ValueError):
    """Input lies outside the chart or safe evaluation domain."""


class EvaluationError(ArithmeticError):
    """A scalar-field evaluation produced a non-finite component."""


# Safe sampling box: keeps 1/r^2, 1/z^2, 1/z^4 terms of the catalog
# well-conditioned.  Positions draw |coordinate| from [0.3, 2.0] with a
# random sign, momenta from [-2, 2].
SAFE_QMIN = 0.3
SAFE_QMAX = 2.0
SAFE_PMAX = 2.0

DEFAULT_SEED = 0x5EED


def make_rng(seed: int = DEFAULT_SEED) -> np.random.Generator:
    """Counter-based 64-bit generator used for all property sampling."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class PhasePoint:
    """Cartesian position and canonical momenta."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if q.shape != (3,) or p.shape != (3,):
            raise ValueError("PhasePoint needs 3 positions and 3 momenta")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise DomainError("non-finite phase-space component")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_state(cls, state: Sequence[float]) -> "PhasePoint":
        state = np.asarray(state, dtype=float)
        return cls(state[:3], state[3:6])

    @property
    def state(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @property
    def r2(self) -> float:
        return float(self.q[0] ** 2 + self.q[1] ** 2)

    @property
    def R2(self) -> float:
        return float(self.q[0] ** 2 + self.q[1] ** 2 + self.q[2] ** 2)

    def covariant_momenta(self, A: "CovectorField") -> np.ndarray:
        return self.p + np.asarray(A(self.q), dtype=float)


def sample_safe_states(rng: np.random.Generator, n: int) -> np.ndarray:
    """n random phase-space states in the safe box, shape (6, n)."""
    mag = rng.uniform(SAFE_QMIN, SAFE_QMAX, size=(3, n))
    sign = rng.choice([-1.0, 1.0], size=(3, n))
    q = mag * sign
    p = rng.uniform(-SAFE_PMAX, SAFE_PMAX, size=(3, n))
    return np.vstack([q, p])


def sample_safe_points(rng: np.random.Generator, n: int) -> list[PhasePoint]:
    states = sample_safe_states(rng, n)
    return [PhasePoint.from_state(states[:, i]) for i in range(n)]


def _tangent_like(result, ref):
    t = ad.tangent(result)
    if isinstance(t, float) and t == 0.0 and isinstance(ref, np.ndarray):
        return np.zeros_like(ref, dtype=float)
    return t


def gradient6(fn: Callable, state: Sequence) -> list:
    """Exact 6-gradient (d/dq_i, d/dp_i) of a generic scalar field.

    ``state`` components may be floats, arrays (vectorized points), or
    duals (nested differentiation).  One forward pass per direction.
    """
    out = []
    for i in range(6):
        seeded = list(state)
        seeded[i] = Dual(seeded[i], 1.0)
        out.append(_tangent_like(fn(seeded), ad.value(state[i])))
    return out


@dataclass(frozen=True)
class Observable:
    """Differentiable scalar field on phase space.

    ``fn`` maps a 6-sequence (x, y, z, px, py, pz) of generic numbers to
    a scalar and must be written against :mod:`axisym.autodiff` math.
    ``momentum_order`` is the polynomial degree in momenta, -1 if the
    field is not polynomial.
    """

    fn: Callable
    label: str = ""
    momentum_order: int = -1

    def __call__(self, point_or_state):
        state = _as_state(point_or_state)
        return self.fn(state)

    def eval(self, point_or_state) -> float:
        val = self.fn(_as_state(point_or_state))
        val = ad.value(val)
        if isinstance(val, np.ndarray):
            if not np.all(np.isfinite(val)):
                raise EvaluationError(f"{self.label or 'observable'}: non-finite value")
            return val
        if not np.isfinite(val):
            raise EvaluationError(f"{self.label or 'observable'}: non-finite value")
        return float(val)

    def grad(self, point_or_state):
        state = _as_state(point_or_state)
        g = gradient6(self.fn, state)
        if any(isinstance(c, np.ndarray) for c in state):
            return g
        g = np.asarray([float(ad.value(c)) for c in g])
        if not np.all(np.isfinite(g)):
            raise EvaluationError(f"{self.label or 'observable'}: non-finite gradient")
        return g


def _as_state(point_or_state):
    if isinstance(point_or_state, PhasePoint):
        return list(point_or_state.state)
    return list(point_or_state)


@dataclass(frozen=True)
class CovectorField:
    """Vector potential A as three scalar fields of position."""

    fn: Callable  # (x, y, z) generic -> (Ax, Ay, Az)
    label: str = "A"

    def __call__(self, q):
        return self.fn(q[0], q[1], q[2])


@dataclass(frozen=True)
class TwoForm:
    """Magnetic field B: coefficients of dy^dz, dz^dx, dx^dy."""

    fn: Callable  # (x, y, z) generic -> (Bx, By, Bz)
    label: str = "B"

    def __call__(self, q):
        return self.fn(q[0], q[1], q[2])

    def divergence(self, q) -> float:
        parts = []
        for i in range(3):
            seeded = list(q)
            seeded[i] = Dual(seeded[i], 1.0)
            parts.append(ad.tangent(self.fn(*seeded)[i]))
        return float(sum(float(ad.value(c)) for c in parts))


def exterior_derivative(A: CovectorField, q) -> tuple:
    """Components of dA at position q, via exact position derivatives."""
    # jac[i][j] = dA_i/dx_j
    jac = [[None] * 3 for _ in range(3)]
    for j in range(3):
        seeded = list(q)
        seeded[j] = Dual(seeded[j], 1.0)
        comps = A.fn(*seeded)
        for i in range(3):
            jac[i][j] = ad.tangent(comps[i])
    return (jac[2][1] - jac[1][2],
            jac[0][2] - jac[2][0],
            jac[1][0] - jac[0][1])


def grad_position(F: Callable, q) -> list:
    """Exact spatial gradient of a scalar field F(x, y, z)."""
    out = []
    for j in range(3):
        seeded = list(q)
        seeded[j] = Dual(seeded[j], 1.0)
        out.append(ad.tangent(F(*seeded)))
    return out


def apply_gauge(A: CovectorField, F: Callable) -> CovectorField:
    """Gauge transformation A -> A + grad F; leaves dA unchanged."""

    def gauged(x, y, z):
        ax, ay, az = A.fn(x, y, z)
        gx, gy, gz = grad_position(F, (x, y, z))
        return (ax + gx, ay + gy, az + gz)

    return CovectorField(gauged, label=f"{A.label}+gradF")


def zero_covector() -> CovectorField:
    return CovectorField(lambda x, y, z: (0.0 * x, 0.0 * y, 0.0 * z), label="0")


def hamiltonian_observable(A: CovectorField, W: Callable, label: str = "H") -> Observable:
    """H = |p + A(q)|^2 / 2 + W(q) as a generic observable."""

    def fn(state):
        x, y, z, px, py, pz = state
        ax, ay, az = A.fn(x, y, z)
        vx, vy, vz = px + ax, py + ay, pz + az
        return 0.5 * (vx * vx + vy * vy + vz * vz) + W(x, y, z)

    return Observable(fn, label=label, momentum_order=2)
