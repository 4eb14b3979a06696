"""Gaussian dynamics of two squeezed vacua under the quadratic coupling.

The modes evolve as

    a(t) = c0 a + c+ b + c- b^+,      b(t) = c0 b - c+ a - c- a^+

with c0 = cos(we t) - i (w/we) sin(we t), c+- = (g+-/we) sin(we t) and
we^2 = w^2 + g+^2 - g-^2. Reduced second moments of either mode follow from the
squeezed-vacuum moments <aa> = -sinh r cosh r, <a^+a> = sinh^2 r.

The symplectic excess nu^2 - 1/4 is assembled from products of the small
coefficients, so it stays accurate at physical couplings (g/w ~ 1e-37) where
forming <x^2><p^2> - <xp>^2 - hbar^2/4 directly would cancel to noise.

``exact_second_moments`` integrates the same Hamiltonian exactly (4x4 symplectic
propagator). It is a diagnostic; see README for how the two differ.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from gravdip.errors import ContractError, RegimeError, ValidityError
from gravdip.model import DerivedScales
from gravdip.perturbation import EntropyValue

log = logging.getLogger(__name__)

REGIME_LIMIT = 0.05
UNCERTAINTY_TOL = 1e-10

Subsystem = Literal["A", "B"]


@dataclass(frozen=True)
class ModeCoefficients:
    c0: complex
    c_plus: float
    c_minus: float
    t: float

    def commutator(self) -> float:
        return abs(self.c0) ** 2 + self.c_plus**2 - self.c_minus**2


@dataclass(frozen=True)
class SecondMoments:
    xx: float
    pp: float
    xp: float
    subsystem: Subsystem
    hbar: float
    # (xx pp - xp^2)/hbar^2 - 1/4, when known without cancellation
    excess: float | None = None

    def uncertainty_excess(self) -> float:
        if self.excess is not None:
            return self.excess
        return (self.xx * self.pp - self.xp**2) / self.hbar**2 - 0.25


def _check_time(t: float) -> None:
    if not t >= 0:
        raise ValidityError(f"t must be >= 0, got {t!r}", guard="nonnegative_time")


def _check_regime(scales: DerivedScales) -> None:
    ratio = max(abs(scales.g_x), abs(scales.g_p)) / scales.omega_m
    if not ratio < REGIME_LIMIT:
        raise RegimeError(
            f"max(g_x, g_p)/w_m = {ratio:.3g} is not < {REGIME_LIMIT}", guard="weak_coupling_g_over_omega"
        )


def mode_coefficients(scales: DerivedScales, t: float) -> ModeCoefficients:
    _check_time(t)
    we = scales.omega_e
    s, c = math.sin(we * t), math.cos(we * t)
    return ModeCoefficients(
        c0=complex(c, -scales.omega_m / we * s),
        c_plus=scales.g_plus / we * s,
        c_minus=scales.g_minus / we * s,
        t=t,
    )


def reduced_moments(c0: complex, cp: complex, cm: complex, r: float) -> tuple[float, complex, float]:
    """(<a^+a>, <aa>, nu^2 - 1/4) of a(t) = c0 a + cp b + cm b^+ on |r>|r>.

    Assumes |c0|^2 + |cp|^2 - |cm|^2 = 1 and uses it to avoid cancellations.
    """
    n0 = math.sinh(r) ** 2
    m0 = -math.sinh(r) * math.cosh(r)
    ch = math.cosh(2.0 * r)
    delta = abs(cp) ** 2 - abs(cm) ** 2
    dn = abs(cm) ** 2 * ch + 2.0 * (cp.conjugate() * cm).real * m0
    q = cp * cp + cm * cm
    K = c0 * c0 + q
    pc = cp * cm
    one_minus_K2 = delta * (2.0 - delta) - 2.0 * ((c0.conjugate() ** 2) * q).real - abs(q) ** 2
    excess = (
        ch * dn + dn * dn + m0 * m0 * one_minus_K2 - 2.0 * m0 * ch * (K.conjugate() * pc).real - ch * ch * abs(pc) ** 2
    )
    return n0 + dn, K * m0 + pc * ch, excess


def _moments_from_nm(n: float, m: complex, excess: float, scales: DerivedScales, subsystem) -> SecondMoments:
    return SecondMoments(
        xx=scales.delta_x**2 * (2.0 * n + 1.0 + 2.0 * m.real),
        pp=scales.delta_p**2 * (2.0 * n + 1.0 - 2.0 * m.real),
        xp=scales.hbar * m.imag,
        subsystem=subsystem,
        hbar=scales.hbar,
        excess=excess,
    )


def second_moments(
    scales: DerivedScales, r: float, t: float, subsystem: Subsystem = "A", phase: float = 0.0
) -> SecondMoments:
    """Reduced moments at time t; ``phase`` multiplies the evolved mode by e^(i phase)."""
    if subsystem not in ("A", "B"):
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    mc = mode_coefficients(scales, t)
    sign = 1.0 if subsystem == "A" else -1.0
    u = cmath.exp(1j * phase)
    n, m, excess = reduced_moments(u * mc.c0, u * sign * mc.c_plus, u * sign * mc.c_minus, r)
    return _moments_from_nm(n, m, excess, scales, subsystem)


def symplectic_f(moments: SecondMoments) -> float:
    """Symplectic eigenvalue minus 1/2: the thermal occupation of the reduced mode."""
    excess = moments.uncertainty_excess()
    if excess < 0.0:
        if excess < -0.25 * UNCERTAINTY_TOL:
            raise ContractError(
                f"second moments violate the uncertainty relation (excess {excess:.3g})", guard="uncertainty"
            )
        log.debug("clamped symplectic excess %.3g to 0", excess)
        return 0.0
    nu = math.sqrt(0.25 + excess)
    return excess / (nu + 0.5)


def entropy_gaussian(f: float) -> EntropyValue:
    """(1+f) ln(1+f) - f ln f."""
    if f < 0:
        raise ValidityError(f"f must be >= 0, got {f!r}", guard="nonnegative_f")
    if f == 0.0:
        return EntropyValue.from_value(0.0)
    return EntropyValue.from_value((1.0 + f) * math.log1p(f) - f * math.log(f))


def a_of_t(scales: DerivedScales, r: float, t: float) -> float:
    """Envelope A(t) of the weak-coupling entropy law.

    Written as 2 (g_x - g_p)^2 cos^2(w t) + 2 sin^2(w t) (g_p e^{2r} - g_x e^{-2r})^2,
    which equals the usual cos(2wt) form identically and cannot cancel near the dip.
    """
    gx, gp = scales.g_x, scales.g_p
    phase = scales.omega_m * t
    tms = gp * math.exp(2.0 * r) - gx * math.exp(-2.0 * r)
    return 2.0 * (gx - gp) ** 2 * math.cos(phase) ** 2 + 2.0 * math.sin(phase) ** 2 * tms * tms


def a_of_t_literal(scales: DerivedScales, r: float, t: float) -> float:
    gx, gp, w = scales.g_x, scales.g_p, scales.omega_m
    return (
        gp**2
        - 4 * gp * gx
        + gx**2
        + (gp**2 + gx**2) * math.cos(2 * w * t)
        + 2 * (gp**2 * math.exp(4 * r) + gx**2 * math.exp(-4 * r)) * math.sin(w * t) ** 2
    )


def closed_time_occupation(scales: DerivedScales, r: float, t: float) -> float:
    A = max(a_of_t(scales, r, t), 0.0)
    return A / (2.0 * scales.omega_m**2) * math.sin(scales.omega_m * t) ** 2


def entropy_closed_time(scales: DerivedScales, r: float, t: float) -> EntropyValue:
    """-X (ln X - 1) with X = A(t) sin^2(w t) / (2 w^2)."""
    _check_time(t)
    _check_regime(scales)
    X = closed_time_occupation(scales, r, t)
    if X <= 0.0:
        return EntropyValue.from_value(0.0)
    ln_x = math.log(X)
    return EntropyValue.from_log(ln_x + math.log1p(-ln_x))


def peak_time(scales: DerivedScales) -> float:
    return math.pi / (2.0 * scales.omega_m)


def occupation_at_peak(scales: DerivedScales, r: float) -> float:
    return symplectic_f(second_moments(scales, r, peak_time(scales)))


def max_entropy_over_time(scales: DerivedScales, r: float) -> EntropyValue:
    """Entropy at w_m t = pi/2 from the mode-coefficient moments."""
    _check_regime(scales)
    return entropy_gaussian(occupation_at_peak(scales, r))


def find_dip_squeezed(scales: DerivedScales) -> float:
    if not (scales.g_x > 0 and scales.g_p > 0):
        raise ValidityError("g_x and g_p must be positive", guard="positive_couplings")
    return 0.25 * math.log(scales.g_x / scales.g_p)


def minimize_over_r(scales: DerivedScales, lo: float, hi: float, xatol: float = 1e-10) -> float:
    """Numerical minimizer of the peak entropy over r in [lo, hi]."""
    _check_regime(scales)
    # S(f) is monotone in f, and f is quadratic about the dip
    res = minimize_scalar(
        lambda r: occupation_at_peak(scales, r),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": xatol, "maxiter": 500},
    )
    return float(res.x)


def _drift_matrix(scales: DerivedScales) -> np.ndarray:
    # v = (X_A, P_A, X_B, P_B), X = a + a^+, P = i(a^+ - a)
    w, gx, gp = scales.omega_m, scales.g_x, scales.g_p
    return np.array(
        [
            [0.0, w, 0.0, 2 * gp],
            [-w, 0.0, -2 * gx, 0.0],
            [0.0, 2 * gp, 0.0, w],
            [-2 * gx, 0.0, -w, 0.0],
        ]
    )


def exact_second_moments(scales: DerivedScales, r: float, t: float, subsystem: Subsystem = "A") -> SecondMoments:
    """Reduced moments from the exact linear evolution of the quadratic Hamiltonian.

    Only meaningful at resolvable couplings: the excess is formed by subtraction.
    """
    _check_time(t)
    E = expm(_drift_matrix(scales) * t)
    V0 = np.diag([math.exp(-2 * r), math.exp(2 * r), math.exp(-2 * r), math.exp(2 * r)])
    V = E @ V0 @ E.T
    i = 0 if subsystem == "A" else 2
    block = V[i : i + 2, i : i + 2]
    det = block[0, 0] * block[1, 1] - block[0, 1] * block[1, 0]
    dxdp = scales.delta_x * scales.delta_p
    return SecondMoments(
        xx=scales.delta_x**2 * block[0, 0],
        pp=scales.delta_p**2 * block[1, 1],
        xp=dxdp * block[0, 1],
        subsystem=subsystem,
        hbar=scales.hbar,
        excess=0.25 * (det - 1.0),
    )
