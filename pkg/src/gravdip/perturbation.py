"""First-order perturbation theory for the ground-state product |0>|0>.

C_nN = <n N| H_AB |0 0> / (2 E_0 - E_n - E_N) = <n N| H_AB |0 0> / (-hbar w (n + N)),
kept only for n, N >= 1 (the C_n0, C_0N pieces are local at first order).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import brentq

from gravdip.errors import RegimeError, TruncationError
from gravdip.fock import FockSpace, assemble_monomial
from gravdip.model import PhysicalParams, derive_scales
from gravdip.pn_potential import CouplingTable

PERTURBATIVE_LIMIT = 0.1
LN10 = math.log(10.0)


class Normalization(str, Enum):
    raw = "raw"
    per_plateau_S_p = "per_plateau_S_p"
    per_reference_max = "per_reference_max"


@dataclass(frozen=True)
class EntropyValue:
    value: float
    log10_value: float
    normalization_tag: Normalization = Normalization.raw

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"entropy must be >= 0, got {self.value!r}")

    @classmethod
    def from_value(cls, value: float, tag: Normalization = Normalization.raw) -> "EntropyValue":
        value = max(float(value), 0.0)
        if value == 0.0:
            return cls(0.0, -math.inf, tag)
        return cls(value, math.log10(value), tag)

    @classmethod
    def from_log(cls, ln_value: float, tag: Normalization = Normalization.raw) -> "EntropyValue":
        """Build from ln(S); the log survives even where S itself underflows."""
        if ln_value == -math.inf:
            return cls(0.0, -math.inf, tag)
        return cls(math.exp(ln_value), ln_value / LN10, tag)

    def normalized(self, reference: "EntropyValue", tag: Normalization) -> "EntropyValue":
        if self.value == 0.0 and self.log10_value == -math.inf:
            return EntropyValue(0.0, -math.inf, tag)
        log10 = self.log10_value - reference.log10_value
        return EntropyValue(10.0**log10, log10, tag)


@dataclass(frozen=True)
class PerturbedState:
    coeffs: Mapping[tuple[int, int], float]
    source: str = field(default="", compare=False)

    def __post_init__(self):
        for key, value in self.coeffs.items():
            n, N = key
            if n + N <= 0:
                raise ValueError("C_00 = 1 is implicit and must not be stored")
            if not abs(value) < PERTURBATIVE_LIMIT:
                raise RegimeError(
                    f"|C_{n}{N}| = {abs(value):.3g} is not < {PERTURBATIVE_LIMIT}; first-order theory is invalid",
                    guard=f"perturbative_C{n}{N}",
                )

    @property
    def norm(self) -> float:
        return 1.0 + math.fsum(v * v for v in self.coeffs.values())

    def nonzero_keys(self, rel_tol: float = 1e-12) -> set[tuple[int, int]]:
        scale = max((abs(v) for v in self.coeffs.values()), default=0.0)
        return {k for k, v in self.coeffs.items() if abs(v) > rel_tol * scale}

    def matrix(self) -> np.ndarray:
        n_max = max((k[0] for k in self.coeffs), default=0)
        N_max = max((k[1] for k in self.coeffs), default=0)
        M = np.zeros((n_max + 1, N_max + 1))
        M[0, 0] = 1.0
        for (n, N), v in self.coeffs.items():
            M[n, N] = v
        return M / math.sqrt(self.norm)


# Closed forms of every nonzero first-order coefficient. Arguments are
# (G, c, hbar, m, d, w, dx) with dx the zero-point motion.
Formula = Callable[[float, float, float, float, float, float, float], float]
R2, R6 = math.sqrt(2.0), math.sqrt(6.0)


@dataclass(frozen=True)
class TableEntry:
    label: str
    key: tuple[int, int]
    closed: Formula
    printed: Formula
    note: str = ""


def _same(f: Formula, note: str = "") -> tuple[Formula, Formula, str]:
    return f, f, note


_ENTRIES: tuple[TableEntry, ...] = tuple(
    TableEntry(label, key, *forms)
    for label, key, forms in (
        ("xA xB", (1, 1), _same(lambda G, c, h, m, d, w, dx: -G * m / (2 * d**3 * w**2))),
        ("xA^2 xB", (2, 1), _same(lambda G, c, h, m, d, w, dx: -G * m * dx / (R2 * d**4 * w**2))),
        ("xA xB^2", (1, 2), _same(lambda G, c, h, m, d, w, dx: G * m * dx / (R2 * d**4 * w**2))),
        ("xA^3 xB", (1, 1), _same(lambda G, c, h, m, d, w, dx: -3 * G * h / (2 * d**5 * w**3))),
        ("xA^3 xB", (3, 1), _same(lambda G, c, h, m, d, w, dx: -R6 * G * h / (4 * d**5 * w**3))),
        ("xA^2 xB^2", (2, 2), _same(lambda G, c, h, m, d, w, dx: 3 * G * h / (4 * d**5 * w**3))),
        ("xA xB^3", (1, 1), _same(lambda G, c, h, m, d, w, dx: -3 * G * h / (2 * d**5 * w**3))),
        ("xA xB^3", (1, 3), _same(lambda G, c, h, m, d, w, dx: -R6 * G * h / (4 * d**5 * w**3))),
        ("pA pB", (1, 1), _same(lambda G, c, h, m, d, w, dx: G * m / (c**2 * d))),
        ("pA pB xA", (2, 1), _same(lambda G, c, h, m, d, w, dx: 2 * R2 * G * m * dx / (3 * c**2 * d**2))),
        ("pA pB xB", (1, 2), _same(lambda G, c, h, m, d, w, dx: -2 * R2 * G * m * dx / (3 * c**2 * d**2))),
        ("pA pB xA^2", (1, 1), _same(lambda G, c, h, m, d, w, dx: G * h / (2 * c**2 * d**3 * w))),
        ("pA pB xA^2", (3, 1), _same(lambda G, c, h, m, d, w, dx: R6 * G * h / (4 * c**2 * d**3 * w))),
        ("pA pB xA xB", (2, 2), _same(lambda G, c, h, m, d, w, dx: -G * h / (c**2 * d**3 * w))),
        ("pA pB xB^2", (1, 1), _same(lambda G, c, h, m, d, w, dx: G * h / (2 * c**2 * d**3 * w))),
        ("pA pB xB^2", (1, 3), _same(lambda G, c, h, m, d, w, dx: R6 * G * h / (4 * c**2 * d**3 * w))),
        ("pA^2 xB", (2, 1), _same(lambda G, c, h, m, d, w, dx: R2 * G * m * dx / (4 * c**2 * d**2))),
        ("pA^2 xB^2", (2, 2), _same(lambda G, c, h, m, d, w, dx: -3 * G * h / (16 * c**2 * d**3 * w))),
        ("pA^2 xA xB", (1, 1), _same(lambda G, c, h, m, d, w, dx: -3 * G * h / (8 * c**2 * d**3 * w))),
        (
            "pA^2 xA xB",
            (3, 1),
            (
                lambda G, c, h, m, d, w, dx: 3 * R6 * G * h / (16 * c**2 * d**3 * w),
                lambda G, c, h, m, d, w, dx: 3 * R6 * G * h / (16 * c**2 * d**2 * w),
                "published entry carries d^2; dimensional analysis and the Fock oracle give d^3",
            ),
        ),
        (
            "pB^2 xA",
            (1, 2),
            (
                lambda G, c, h, m, d, w, dx: -R2 * G * m * dx / (4 * c**2 * d**2),
                lambda G, c, h, m, d, w, dx: R2 * G * m * dx / (4 * c**2 * d**2),
                "published entry has the opposite sign; the A<->B mirror of pA^2 xB and the Taylor expansion give -",
            ),
        ),
        ("pB^2 xA^2", (2, 2), _same(lambda G, c, h, m, d, w, dx: -3 * G * h / (16 * c**2 * d**3 * w))),
        ("pB^2 xA xB", (1, 1), _same(lambda G, c, h, m, d, w, dx: -3 * G * h / (8 * c**2 * d**3 * w))),
        (
            "pB^2 xA xB",
            (1, 3),
            (
                lambda G, c, h, m, d, w, dx: 3 * R6 * G * h / (16 * c**2 * d**3 * w),
                lambda G, c, h, m, d, w, dx: 3 * R6 * G * h / (16 * c**2 * d**2 * w),
                "published entry carries d^2; dimensional analysis and the Fock oracle give d^3",
            ),
        ),
        ("pA^2 pB^2", (2, 2), _same(lambda G, c, h, m, d, w, dx: 9 * G * h * w / (32 * c**4 * d))),
    )
)


def table_entries() -> tuple[TableEntry, ...]:
    return _ENTRIES


def _args(params: PhysicalParams):
    s = derive_scales(params)
    return (params.G, params.c, params.hbar, params.m, params.d, params.omega_m, s.delta_x)


def closed_form_contributions(params: PhysicalParams, table: CouplingTable, printed: bool = False):
    """Per-entry closed forms for the terms in ``table``: list of (label, key, value)."""
    args = _args(params)
    labels = {t.label for t in table}
    return [(e.label, e.key, (e.printed if printed else e.closed)(*args)) for e in _ENTRIES if e.label in labels]


def _sum_contributions(contribs) -> dict[tuple[int, int], float]:
    acc: dict[tuple[int, int], list[float]] = {}
    for _, key, value in contribs:
        acc.setdefault(key, []).append(value)
    return {k: math.fsum(v) for k, v in sorted(acc.items())}


def coefficients_closed_form(params: PhysicalParams, table: CouplingTable) -> PerturbedState:
    return PerturbedState(_sum_contributions(closed_form_contributions(params, table)), source="closed_form")


def oracle_contributions(params: PhysicalParams, table: CouplingTable, fock_dim: int = 12, rel_tol: float = 1e-12):
    """Per-term Fock matrix elements turned into C_nN, for n, N >= 1."""
    max_exc = max((max(t.pow_xA + t.pow_pA, t.pow_xB + t.pow_pB) for t in table), default=0)
    if fock_dim < max_exc + 2:
        raise TruncationError(f"fock_dim={fock_dim} must be >= max excitation + 2 = {max_exc + 2}")
    s = derive_scales(params)
    space = FockSpace(fock_dim, fock_dim, s.delta_x, s.delta_p)
    out = []
    for term in table:
        col = assemble_monomial(space, term).matrix[:, 0]
        values = {}
        for n in range(1, max_exc + 1):
            for N in range(1, max_exc + 1):
                elem = col[space.basis_index(n, N)]
                values[(n, N)] = elem.real / (-s.hbar * s.omega_m * (n + N))
        scale = max(abs(v) for v in values.values())
        for key, v in values.items():
            if abs(v) > rel_tol * scale:
                out.append((term.label, key, v))
    return out


def coefficients_from_oracle(params: PhysicalParams, table: CouplingTable, fock_dim: int = 12) -> PerturbedState:
    return PerturbedState(_sum_contributions(oracle_contributions(params, table, fock_dim)), source="fock_oracle")


def schmidt_entropy(state: PerturbedState) -> EntropyValue:
    sigma = np.linalg.svd(state.matrix(), compute_uv=False)
    p = sigma**2
    p = p[p > 0] / p.sum()
    return EntropyValue.from_value(float(-np.sum(p * np.log(p))))


def leading_coefficients(params: PhysicalParams) -> tuple[float, float]:
    """(C11, C22) from the x_A x_B, p_A p_B and p_A^2 p_B^2 couplings alone."""
    s = derive_scales(params)
    ratio = params.c**2 / (2.0 * params.d**2 * params.omega_m**2)  # eps_0pn / eps_1pn
    return s.eps_1pn * (1.0 - ratio), s.eps_2pn


def leading_state(params: PhysicalParams) -> PerturbedState:
    c11, c22 = leading_coefficients(params)
    return PerturbedState({(1, 1): c11, (2, 2): c22}, source="leading")


def _ln_term(eps: float) -> float:
    """ln of eps^2 (1 - ln eps^2), assembled from ln|eps| so eps^2 never underflows."""
    if eps == 0.0:
        return -math.inf
    ln_u = 2.0 * math.log(abs(eps))
    return ln_u + math.log1p(-ln_u)


def entropy_closed_form(params: PhysicalParams) -> EntropyValue:
    """Steady-state entropy sum_k eps_k^2 (1 - ln eps_k^2) over eps = C11, C22.

    Includes the vacuum Schmidt weight's eps^2 contribution; see README.
    """
    c11, c22 = leading_coefficients(params)
    for name, eps in (("C11", c11), ("C22", c22)):
        if not abs(eps) < PERTURBATIVE_LIMIT:
            raise RegimeError(f"|{name}| = {abs(eps):.3g} is not < {PERTURBATIVE_LIMIT}", guard=f"perturbative_{name}")
    ln_s = np.logaddexp(_ln_term(c11), _ln_term(c22))
    return EntropyValue.from_log(float(ln_s))


def plateau_entropy(params: PhysicalParams) -> EntropyValue:
    """S_p = -(Gm/(c^2 d))^2 ln((Gm/(c^2 d))^2)."""
    eps = derive_scales(params).eps_1pn
    ln_u = 2.0 * math.log(eps)
    return EntropyValue.from_log(ln_u + math.log(-ln_u))


def find_dip_ground(params_template: PhysicalParams) -> tuple[float, float, float]:
    """Root of C11(w) = 0; returns (omega_dip, delta_x_dip, delta_p_dip)."""
    c, d, m, hbar = params_template.c, params_template.d, params_template.m, params_template.hbar

    # C11 / eps_1pn as a function of ln w; independent of G
    def c11_ratio(ln_w: float) -> float:
        return 1.0 - c * c / (2.0 * d * d * math.exp(2.0 * ln_w))

    lo = math.log(c / d) - 5.0
    hi = math.log(c / d) + 5.0
    ln_w = brentq(c11_ratio, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    omega = math.exp(ln_w)
    return omega, math.sqrt(hbar / (2.0 * m * omega)), math.sqrt(hbar * m * omega / 2.0)
