"""Analytic trajectories, resonance analysis, and the rotating frame.

The two quadratic minimally superintegrable systems (and the shifted
branch of the second one) admit closed-form solutions in cylindrical
coordinates: r and z oscillate with one shared frequency nu fixed by
the conserved angular momentum, while theta combines a linear drift
with bounded oscillatory terms.  Derivatives are obtained by running
the same expressions on dual numbers, so the solutions can be checked
directly against the equations of motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import autodiff as ad
from .autodiff import Dual
from .catalog import SystemParams, SystemSpec
from .phase import (
    CovectorField,
    DomainError,
    Observable,
    PhasePoint,
    TwoForm,
    hamiltonian_observable,
)

OP_MIN = "op_min"
CP_MIN = "cp_min"
CP_BL = "cp_blbranch"
KINDS = (OP_MIN, CP_MIN, CP_BL)

RESONANCE_MAX_DENOMINATOR = 64
RESONANCE_RTOL = 1e-12


def frequency(kind: str, params: SystemParams, Lz: float) -> float:
    """Shared oscillation frequency of r and z for the given branch.

    Raises DomainError when the radicand is not positive (unbounded or
    degenerate motion).
    """
    if kind == OP_MIN:
        rad = (params.bz ** 2 - 8.0 * params.u3
               + 2.0 * params.bs * (2.0 * Lz - params.bp))
    elif kind == CP_MIN:
        rad = 8.0 * params.u3 + 2.0 * params.bq * Lz
    elif kind == CP_BL:
        rad = 8.0 * params.u3
    else:
        raise ValueError(f"unknown closed-form kind {kind!r}")
    if not rad > 0.0:
        raise DomainError(f"{kind}: frequency radicand {rad} is not positive")
    return math.sqrt(rad)


def _require_nonneg(val: float, what: str) -> float:
    if val < 0.0:
        raise DomainError(f"{what} is negative ({val}); closed form leaves the real domain")
    return val


@dataclass(frozen=True)
class ClosedFormConstants:
    """Integration constants plus the derived frequency data.

    Build with :func:`constants`, which validates every radicand and
    fills in nu and the k coefficients for the chosen branch.
    """

    kind: str
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    Lz: float
    eps: int = 1
    nu: float = 0.0
    k1: float = 0.0
    k2: float = 0.0
    k3: Optional[float] = None


def constants(kind: str, params: SystemParams, c1: float, c2: float,
              c3: float, c4: float, c5: float, Lz: float,
              eps: int = 1) -> ClosedFormConstants:
    """Validate and complete a set of closed-form constants."""
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    nu = frequency(kind, params, Lz)
    if kind == OP_MIN:
        a_r = _require_nonneg(Lz * Lz + 2.0 * params.u1, "Lz^2 + 2 u1")
        a_z = _require_nonneg(params.bp * Lz + 2.0 * params.u2, "bp Lz + 2 u2")
        if a_r == 0.0 or a_z == 0.0:
            raise DomainError("op closed form needs Lz^2 + 2 u1 > 0 and bp Lz + 2 u2 > 0")
        S1 = math.sqrt(c1 * c1 + 4.0 * a_r / nu ** 2)
        S3 = math.sqrt(c3 * c3 + 4.0 * a_z / nu ** 2)
        k1 = params.bz / 2.0 + params.bs / 2.0 * (S1 + S3)
        k2 = math.sqrt(1.0 + c1 * c1 * nu * nu / (4.0 * a_r)) \
            - c1 * nu / (2.0 * math.sqrt(a_r))
        k3 = math.sqrt(1.0 + c3 * c3 * nu * nu / (4.0 * a_z)) \
            - c3 * nu / (2.0 * math.sqrt(a_z))
        _require_nonneg(S1 - abs(c1), "r^2 lower bound")
        _require_nonneg(S3 - abs(c3), "z^2 lower bound")
    elif kind == CP_MIN:
        a_r = _require_nonneg(Lz * Lz + 2.0 * params.u2, "Lz^2 + 2 u2")
        if a_r == 0.0:
            raise DomainError("cp closed form needs Lz^2 + 2 u2 > 0")
        S1 = math.sqrt(c1 * c1 + 4.0 * a_r / nu ** 2)
        k1 = params.bz / 2.0 + params.bq * (c3 * c3 / 2.0
                                            + params.u1 ** 2 / nu ** 4
                                            + S1 / 4.0)
        k2 = math.sqrt(1.0 + c1 * c1 * nu * nu / (4.0 * a_r)) \
            - c1 * nu / (2.0 * math.sqrt(a_r))
        k3 = None
        _require_nonneg(S1 - abs(c1), "r^2 lower bound")
    else:  # CP_BL
        a_r = _require_nonneg(Lz * Lz + 2.0 * params.u2, "Lz^2 + 2 u2")
        if a_r == 0.0:
            raise DomainError("bl-branch closed form needs Lz^2 + 2 u2 > 0")
        u3 = params.u3
        S1 = math.sqrt(c1 * c1 + a_r / (2.0 * u3))
        k1 = -params.bl * (params.bl * Lz - params.u1) / (8.0 * u3)
        k2 = math.sqrt(1.0 + 2.0 * c1 * c1 * u3 / a_r) \
            - c1 * math.sqrt(2.0 * u3 / a_r)
        k3 = None
        _require_nonneg(S1 - abs(c1), "r^2 lower bound")
    return ClosedFormConstants(kind=kind, c1=c1, c2=c2, c3=c3, c4=c4,
                               c5=c5, Lz=Lz, eps=eps, nu=nu,
                               k1=k1, k2=k2, k3=k3)


def _atan_unwrapped(k, u):
    """Continuous branch of atan(k * tan(u/2)).

    The principal branch jumps by -pi whenever u crosses pi (mod 2 pi);
    adding pi * floor((u + pi) / (2 pi)) restores continuity.
    """
    return ad.atan(k * ad.tan(u / 2.0)) + math.pi * ad.floor((u + math.pi) / (2.0 * math.pi))


def _cyl_solution(kind: str, c: ClosedFormConstants, params: SystemParams, t):
    """(r, z, theta) at time t; t may be a dual or an array."""
    nu = c.nu
    u_r = nu * t + c.c2
    u_z = nu * t + c.c4
    if kind == OP_MIN:
        a_r = c.Lz * c.Lz + 2.0 * params.u1
        a_z = params.bp * c.Lz + 2.0 * params.u2
        S1 = math.sqrt(c.c1 ** 2 + 4.0 * a_r / nu ** 2)
        S3 = math.sqrt(c.c3 ** 2 + 4.0 * a_z / nu ** 2)
        r = ad.sqrt(c.c1 * ad.cos(u_r) + S1)
        z = c.eps * ad.sqrt(c.c3 * ad.cos(u_z) + S3)
        theta = (c.c5 + c.k1 * t
                 + params.bs / (2.0 * nu) * (c.c1 * ad.sin(u_r) + c.c3 * ad.sin(u_z))
                 + c.Lz / math.sqrt(a_r) * _atan_unwrapped(c.k2, u_r)
                 + params.bp / (2.0 * math.sqrt(a_z)) * _atan_unwrapped(c.k3, u_z))
        return r, z, theta
    if kind == CP_MIN:
        a_r = c.Lz * c.Lz + 2.0 * params.u2
        S1 = math.sqrt(c.c1 ** 2 + 4.0 * a_r / nu ** 2)
        r = ad.sqrt(c.c1 * ad.cos(u_r) + S1)
        z = c.c3 * ad.cos(u_z) - params.u1 / nu ** 2
        theta = (c.c5 + c.k1 * t
                 + c.Lz / math.sqrt(a_r) * _atan_unwrapped(c.k2, u_r)
                 + params.bq / nu * (c.c1 / 4.0 * ad.sin(u_r)
                                     - 2.0 * c.c3 * params.u1 / nu ** 2 * ad.sin(u_z)
                                     + c.c3 ** 2 / 2.0 * ad.cos(u_z) * ad.sin(u_z)))
        return r, z, theta
    if kind == CP_BL:
        a_r = c.Lz * c.Lz + 2.0 * params.u2
        u3 = params.u3
        S1 = math.sqrt(c.c1 ** 2 + a_r / (2.0 * u3))
        r = ad.sqrt(c.c1 * ad.cos(u_r) + S1)
        z = c.c3 * ad.cos(u_z) + (params.bl * c.Lz - params.u1) / (8.0 * u3)
        theta = (c.c5 + c.k1 * t
                 - c.c3 * params.bl / nu * ad.sin(u_z)
                 + c.Lz / math.sqrt(a_r) * _atan_unwrapped(c.k2, u_r))
        return r, z, theta
    raise ValueError(f"unknown closed-form kind {kind!r}")


def closed_state(kind: str, c: ClosedFormConstants, params: SystemParams, t):
    """Cylindrical position (r, z, theta) and its exact time derivative.

    Returns ((r, z, theta), (rdot, zdot, thetadot)) at time t.
    """
    if c.kind != kind:
        raise ValueError("constants were built for a different branch")
    td = Dual(float(t), 1.0)
    r, z, theta = _cyl_solution(kind, c, params, td)
    return ((ad.value(r), ad.value(z), ad.value(theta)),
            (ad.tangent(r), ad.tangent(z), ad.tangent(theta)))


def cartesian_state(kind: str, c: ClosedFormConstants, params: SystemParams,
                    t) -> np.ndarray:
    """Cartesian state (x, y, z, px, py, pz) with canonical momenta.

    In the axial gauge of the catalog systems, p_r = rdot, p_z = zdot
    and the canonical angular momentum is the constant Lz, so the
    Cartesian canonical momenta follow from the point transformation.
    """
    (r, z, theta), (rdot, zdot, _) = closed_state(kind, c, params, t)
    ct, st = math.cos(theta), math.sin(theta)
    x, y = r * ct, r * st
    px = rdot * ct - c.Lz / r * st
    py = rdot * st + c.Lz / r * ct
    return np.asarray([x, y, z, px, py, zdot])


@dataclass(frozen=True)
class ResonanceParams:
    """Coprime frequency-ratio integers."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        g = math.gcd(self.n, self.m)
        object.__setattr__(self, "n", self.n // g)
        object.__setattr__(self, "m", self.m // g)


def resonance_check(params: SystemParams, kind: str = OP_MIN) -> Optional[ResonanceParams]:
    """Detect whether u3 and bz satisfy the closure rationality relation.

    For the radial branch the relation is u3 = (bz^2/8)(1 - n^2/(4m^2));
    for the parabolic branch it is u3 = n^2 bz^2 / (8 m^2).  Searches
    denominators m <= 64 and demands relative agreement 1e-12; returns
    the reduced (n, m) or None.
    """
    if params.bz == 0.0:
        raise ValueError("resonance analysis needs bz != 0")
    if kind in (OP_MIN, "max5"):
        q2 = 1.0 - 8.0 * params.u3 / params.bz ** 2  # (n / 2m)^2
    elif kind in (CP_MIN, "max6"):
        q2 = params.u3 * 8.0 / params.bz ** 2        # (n / m)^2... see below
    else:
        raise ValueError(f"unknown resonance kind {kind!r}")
    if q2 <= 0.0:
        return None
    q = math.sqrt(q2)
    scale = max(1.0, abs(params.u3))
    for m in range(1, RESONANCE_MAX_DENOMINATOR + 1):
        if kind in (OP_MIN, "max5"):
            n = round(q * 2 * m)
            if n < 1:
                continue
            u3_target = params.bz ** 2 / 8.0 * (1.0 - n * n / (4.0 * m * m))
        else:
            n = round(q * m)
            if n < 1:
                continue
            u3_target = n * n * params.bz ** 2 / (8.0 * m * m)
        if abs(u3_target - params.u3) <= RESONANCE_RTOL * scale:
            return ResonanceParams(n, m)
    return None


def rotating_frame(bz: float, t: float, s) -> PhasePoint:
    """Rotate a state into the frame that cancels a constant field bz.

    The frame turns about the z-axis with angular velocity bz/2, so
    coordinates measured in it are rotated by the angle -bz t / 2
    (passive transformation); positions and canonical momenta rotate
    with the same matrix (a canonical point transformation).  With
    this orientation the transformed trajectories of the resonant
    systems obey the field-free oscillator equations of motion.
    """
    pt = s if isinstance(s, PhasePoint) else PhasePoint.from_state(s)
    ang = -bz * t / 2.0
    ca, sa = math.cos(ang), math.sin(ang)
    R = np.asarray([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])
    return PhasePoint(R @ pt.q, R @ pt.p)


def _oscillator_spec(system_id: str, u2: float, nu_xy: float, nu_z: float,
                     meta: dict) -> SystemSpec:
    """Magnetic-field-free separable oscillator (+ optional u2/z^2 cage)."""

    def W_sw(s, w):
        base = nu_xy ** 2 / 8.0 * s + nu_z ** 2 / 8.0 * w * w
        if u2 != 0.0:
            base = base + u2 / (w * w)
        return base

    def W(x, y, z):
        return W_sw(x * x + y * y, z)

    def zero_gauge(s, w):
        return 0.0 * s + 0.0 * w

    A = CovectorField(lambda x, y, z: (0.0 * x, 0.0 * y, 0.0 * z), label="A")
    B = TwoForm(lambda x, y, z: (0.0 * x, 0.0 * y, 0.0 * z), label="B")

    def e_xy(state):
        x, y, _, px, py, _ = state
        return 0.5 * (px * px + py * py) + nu_xy ** 2 / 8.0 * (x * x + y * y)

    def lz(state):
        x, y, _, px, py, _ = state
        return x * py - y * px

    def e_z(state):
        z, pz = state[2], state[5]
        val = 0.5 * pz * pz + nu_z ** 2 / 8.0 * z * z
        if u2 != 0.0:
            val = val + u2 / (z * z)
        return val

    return SystemSpec(
        system_id=system_id,
        params=SystemParams(u2=u2),
        W=W, A=A, B=B,
        hamiltonian=hamiltonian_observable(A, W),
        integrals=(
            Observable(e_xy, "X1", 2),
            Observable(lz, "X2", 1),
            Observable(e_z, "Y3", 2),
        ),
        claimed_rank=3,
        gauge_factor=zero_gauge,
        potential_sw=W_sw,
        singular_in=frozenset({"z"}) if u2 != 0.0 else frozenset(),
        serializable=False,
        meta=meta,
    )


def oscillator_image(kind: str, params: SystemParams) -> SystemSpec:
    """The field-free oscillator conjugate to a maximal system.

    For the radial maximal system (u1 must vanish: with u1 != 0 the
    planar trajectories of the rotated system cannot close) the image
    is a caged oscillator with frequency nu = n bz / (2 m) in all three
    directions plus the u2/z^2 barrier.  For the parabolic maximal
    system (u2 must vanish) the image is a harmonic oscillator whose z
    frequency is twice the planar one.
    """
    if params.n is None or params.m is None:
        raise ValueError("oscillator image needs resonance integers n, m")
    nu = params.n * params.bz / (2.0 * params.m)
    if kind == "max5":
        if params.u1 != 0.0:
            raise ValueError("caged-oscillator image requires u1 = 0; "
                             "otherwise the rotated trajectories cannot close")
        return _oscillator_spec("osc5", params.u2, nu, nu,
                                meta={"nu": nu, "source": "max5"})
    if kind == "max6":
        if params.u2 != 0.0:
            raise ValueError("harmonic-oscillator image requires u2 = 0")
        # Potential (n^2 bz^2 / 8 m^2)(x^2 + y^2 + 4 z^2): in the
        # nu^2/8 normalization the planar frequency parameter is 2 nu
        # and the z one is 4 nu (z oscillates twice as fast).
        return _oscillator_spec("osc6", 0.0, 2.0 * nu, 4.0 * nu,
                                meta={"nu": nu, "source": "max6"})
    raise ValueError(f"no oscillator image for kind {kind!r}")
