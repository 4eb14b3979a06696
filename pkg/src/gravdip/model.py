"""Physical parameter point and the scales derived from it.

All quantities are SI. The three PN smallness parameters

    eps_0pn = G m / (2 d^3 w^2)      (|C11| from the x_A x_B coupling)
    eps_1pn = G m / (c^2 d)          (|C11| from the p_A p_B coupling)
    eps_2pn = 9 G hbar w / (32 c^4 d)  (|C22| from the p_A^2 p_B^2 coupling)

are what the entropy formulas consume, so the tiny SI products never get squared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from gravdip.errors import ValidityError

G_SI = 6.67430e-11
C_SI = 299_792_458.0
HBAR_SI = 1.054571817e-34

# Placeholder lab-scale defaults; not taken from any published parameter set.
DEFAULT_MASS = 1e-14
DEFAULT_DISTANCE = 1e-4
DEFAULT_OMEGA = 1e2

TAYLOR_GUARD_FACTOR = 10.0


@dataclass(frozen=True)
class PhysicalParams:
    G: float = G_SI
    c: float = C_SI
    hbar: float = HBAR_SI
    m: float = DEFAULT_MASS
    d: float = DEFAULT_DISTANCE
    omega_m: float = DEFAULT_OMEGA
    r: float = 0.0

    def __post_init__(self):
        for name in ("G", "c", "hbar", "m", "d", "omega_m"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidityError(f"{name} must be finite and > 0, got {value!r}", guard=f"positive_{name}")
        if not math.isfinite(self.r):
            raise ValidityError(f"r must be finite, got {self.r!r}", guard="finite_r")
        dx = self.effective_delta_x
        if not self.d > TAYLOR_GUARD_FACTOR * dx:
            raise ValidityError(
                f"Taylor guard violated: d={self.d:.6g} m must exceed "
                f"{TAYLOR_GUARD_FACTOR:g} * delta_x e^(-r) = {TAYLOR_GUARD_FACTOR * dx:.6g} m",
                guard="taylor_d_gt_10_delta_x",
            )

    @property
    def zero_point_x(self) -> float:
        return math.sqrt(self.hbar / (2.0 * self.m * self.omega_m))

    @property
    def effective_delta_x(self) -> float:
        return self.zero_point_x * math.exp(-self.r)

    def replace(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("G", "c", "hbar", "m", "d", "omega_m", "r")}

    @classmethod
    def from_dict(cls, data: dict) -> "PhysicalParams":
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class DerivedScales:
    omega_m: float
    hbar: float
    delta_x: float
    delta_p: float
    g_x: float
    g_p: float
    g_plus: float
    g_minus: float
    omega_e: float
    omega_0: float
    g_0: float
    eps_0pn: float
    eps_1pn: float
    eps_2pn: float
    x_planck: float
    p_planck: float
    params: PhysicalParams = field(repr=False, compare=False, default=None)


def derive_scales(params: PhysicalParams) -> DerivedScales:
    G, c, hbar, m, d, w = params.G, params.c, params.hbar, params.m, params.d, params.omega_m
    delta_x = math.sqrt(hbar / (2.0 * m * w))
    # hbar / (2 delta_x) keeps the Heisenberg product exact to rounding
    delta_p = hbar / (2.0 * delta_x)
    g_x = G * m / (d**3 * w)
    g_p = 2.0 * G * m * w / (c**2 * d)
    omega_0 = c / (math.sqrt(2.0) * d)
    x_planck = math.sqrt(hbar * G / c**3)
    return DerivedScales(
        omega_m=w,
        hbar=hbar,
        delta_x=delta_x,
        delta_p=delta_p,
        g_x=g_x,
        g_p=g_p,
        g_plus=g_x + g_p,
        g_minus=g_x - g_p,
        # w^2 + g+^2 - g-^2 = w^2 + 4 g_x g_p, without the cancellation
        omega_e=math.sqrt(w * w + 4.0 * g_x * g_p),
        omega_0=omega_0,
        g_0=math.sqrt(2.0) * G * m / (c * d**2),
        eps_0pn=G * m / (2.0 * d**3 * w**2),
        eps_1pn=G * m / (c**2 * d),
        eps_2pn=9.0 * G * hbar * w / (32.0 * c**4 * d),
        x_planck=x_planck,
        p_planck=hbar / x_planck,
        params=params,
    )


def dimensionless_point(params: PhysicalParams, coupling_scale: float) -> PhysicalParams:
    """Rescale G so that eps_1pn == coupling_scale.

    Every G-independent ratio (g_x/g_p, w d/c, delta_x/d) is untouched, which is
    what lets the Fock oracle run at couplings double precision can resolve.
    """
    if not (0.0 < coupling_scale <= 0.1):
        raise ValidityError(
            f"coupling_scale must lie in (0, 0.1], got {coupling_scale!r}", guard="coupling_scale_range"
        )
    return params.replace(G=coupling_scale * params.c**2 * params.d / params.m)


def omega_for_delta_x(params: PhysicalParams, delta_x: float) -> float:
    """Trap frequency whose ground-state zero-point motion is ``delta_x``."""
    return params.hbar / (2.0 * params.m * delta_x**2)


def omega_matching(params: PhysicalParams) -> float:
    """The frequency c / (sqrt(2) d) where g_x == g_p."""
    return params.c / (math.sqrt(2.0) * params.d)
