"""Cross-coupling Hamiltonian of the PN potential, expanded about the trap centres.

Trap A sits at -d/2 and trap B at +d/2, so |r_A - r_B| = d + x_B - x_A. Expanding
1/|r_A - r_B| to the needed order in (x_B - x_A)/d and keeping only monomials that
touch both particles gives 19 terms up to quartic operator order and 2PN.
Products of non-commuting factors are understood in Weyl (symmetrized) order;
that ordering is realized only when a term is turned into a matrix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import IntEnum

from gravdip.errors import ContractError, ValidityError
from gravdip.model import PhysicalParams, derive_scales


class PNOrder(IntEnum):
    PN0 = 0
    PN1 = 1
    PN2 = 2


@dataclass(frozen=True)
class CouplingTerm:
    pow_xA: int
    pow_xB: int
    pow_pA: int
    pow_pB: int
    coeff: float
    pn_order: PNOrder

    def __post_init__(self):
        powers = self.powers
        if min(powers) < 0:
            raise ContractError(f"negative operator power in {powers}")
        if not (2 <= sum(powers) <= 4):
            raise ContractError(f"cross term must be of operator order 2..4, got {powers}")
        if self.pow_xA + self.pow_pA < 1 or self.pow_xB + self.pow_pB < 1:
            raise ContractError(f"term {powers} does not couple both particles")

    @property
    def powers(self) -> tuple[int, int, int, int]:
        return (self.pow_xA, self.pow_xB, self.pow_pA, self.pow_pB)

    @property
    def operator_order(self) -> int:
        return sum(self.powers)

    @property
    def label(self) -> str:
        return monomial_label(self.powers)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "pow_xA": self.pow_xA,
            "pow_xB": self.pow_xB,
            "pow_pA": self.pow_pA,
            "pow_pB": self.pow_pB,
            "coeff": self.coeff,
            "pn_order": self.pn_order.name,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CouplingTerm":
        return cls(
            pow_xA=int(data["pow_xA"]),
            pow_xB=int(data["pow_xB"]),
            pow_pA=int(data["pow_pA"]),
            pow_pB=int(data["pow_pB"]),
            coeff=float(data["coeff"]),
            pn_order=PNOrder[data["pn_order"]],
        )


def monomial_label(powers: tuple[int, int, int, int]) -> str:
    parts = []
    for name, k in zip(("pA", "pB", "xA", "xB"), (powers[2], powers[3], powers[0], powers[1])):
        if k == 1:
            parts.append(name)
        elif k > 1:
            parts.append(f"{name}^{k}")
    return " ".join(parts)


# (pow_xA, pow_xB, pow_pA, pow_pB), order, coefficient prefactor in units of the
# order's natural scale: G m^2 / d^(1+k) at 0PN, G / (c^2 d^(1+k)) at 1PN,
# G / (c^4 m^2 d) at 2PN, with k the number of x factors beyond the leading term.
_TERMS = (
    ((1, 1, 0, 0), PNOrder.PN0, 2.0),
    ((2, 1, 0, 0), PNOrder.PN0, 3.0),
    ((1, 2, 0, 0), PNOrder.PN0, -3.0),
    ((3, 1, 0, 0), PNOrder.PN0, 4.0),
    ((2, 2, 0, 0), PNOrder.PN0, -6.0),
    ((1, 3, 0, 0), PNOrder.PN0, 4.0),
    ((0, 0, 1, 1), PNOrder.PN1, 4.0),
    ((1, 0, 1, 1), PNOrder.PN1, 4.0),
    ((0, 1, 1, 1), PNOrder.PN1, -4.0),
    ((2, 0, 1, 1), PNOrder.PN1, 4.0),
    ((1, 1, 1, 1), PNOrder.PN1, -8.0),
    ((0, 2, 1, 1), PNOrder.PN1, 4.0),
    ((0, 1, 2, 0), PNOrder.PN1, 1.5),
    ((0, 2, 2, 0), PNOrder.PN1, -1.5),
    ((1, 1, 2, 0), PNOrder.PN1, 3.0),
    ((1, 0, 0, 2), PNOrder.PN1, -1.5),
    ((2, 0, 0, 2), PNOrder.PN1, -1.5),
    ((1, 1, 0, 2), PNOrder.PN1, 3.0),
    ((0, 0, 2, 2), PNOrder.PN2, -2.25),
)


def _coefficient(params: PhysicalParams, powers, order: PNOrder, prefactor: float) -> float:
    G, c, m, d = params.G, params.c, params.m, params.d
    n_x = powers[0] + powers[1]
    if order is PNOrder.PN0:
        return prefactor * G * m**2 / d ** (n_x + 1)
    if order is PNOrder.PN1:
        return prefactor * G / (c**2 * d ** (n_x + 1))
    return prefactor * G / (c**4 * m**2 * d)


@dataclass(frozen=True)
class CouplingTable:
    terms: tuple[CouplingTerm, ...]
    params: PhysicalParams

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def term(self, label: str) -> CouplingTerm:
        for t in self.terms:
            if t.label == label:
                return t
        raise KeyError(label)

    def filtered(self, max_operator_order: int = 4, max_pn: PNOrder = PNOrder.PN2) -> "CouplingTable":
        keep = tuple(t for t in self.terms if t.operator_order <= max_operator_order and t.pn_order <= max_pn)
        return CouplingTable(keep, self.params)

    def to_json(self) -> str:
        return json.dumps(
            {"params": self.params.to_dict(), "terms": [t.to_dict() for t in self.terms]},
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "CouplingTable":
        data = json.loads(text)
        return cls(
            terms=tuple(CouplingTerm.from_dict(t) for t in data["terms"]),
            params=PhysicalParams.from_dict(data["params"]),
        )


def expand_cross_coupling(
    params: PhysicalParams, max_operator_order: int = 4, max_pn: PNOrder | str = PNOrder.PN2
) -> CouplingTable:
    if isinstance(max_pn, str):
        max_pn = PNOrder[max_pn]
    if max_operator_order not in (2, 3, 4):
        raise ValidityError(f"max_operator_order must be 2, 3 or 4, got {max_operator_order!r}", guard="operator_order")
    terms = tuple(
        CouplingTerm(*powers, coeff=_coefficient(params, powers, order, pref), pn_order=order)
        for powers, order, pref in _TERMS
    )
    return CouplingTable(terms, params).filtered(max_operator_order, max_pn)


def quadratic_mode_form(table: CouplingTable) -> tuple[float, float]:
    """Return (g_minus, g_plus) of H_AB = hbar g-(ab + a^+b^+) + hbar g+(ab^+ + a^+b)."""
    labels = {t.label for t in table}
    if not labels <= {"xA xB", "pA pB"} or not labels:
        raise ContractError(f"quadratic_mode_form needs only the x_A x_B / p_A p_B terms, got {sorted(labels)}")
    s = derive_scales(table.params)
    g_x = g_p = 0.0
    for t in table:
        if t.label == "xA xB":
            g_x = t.coeff * s.delta_x**2 / s.hbar
        else:
            g_p = t.coeff * s.delta_p**2 / s.hbar
    return g_x - g_p, g_x + g_p


def pn_potential_classical(params: PhysicalParams, p_A: float, p_B: float, r_sep: float) -> float:
    """The PN potential evaluated on c-numbers."""
    if not r_sep > 0:
        raise ValidityError(f"separation must be > 0, got {r_sep!r}", guard="positive_separation")
    G, c, m = params.G, params.c, params.m
    return (
        -G * m**2 / r_sep
        - G * (3 * p_A**2 - 8 * p_A * p_B + 3 * p_B**2) / (2 * c**2 * r_sep)
        + G * (5 * p_A**4 - 18 * p_A**2 * p_B**2 + 5 * p_B**4) / (8 * c**4 * m**2 * r_sep)
    )


def com_frame_check(params: PhysicalParams, p: float, r_sep: float) -> float:
    """Centre-of-momentum form -Gm^2/r - 7Gp^2/(c^2 r) - Gp^4/(c^4 m^2 r)."""
    if not r_sep > 0:
        raise ValidityError(f"separation must be > 0, got {r_sep!r}", guard="positive_separation")
    G, c, m = params.G, params.c, params.m
    return -G * m**2 / r_sep - 7 * G * p**2 / (c**2 * r_sep) - G * p**4 / (c**4 * m**2 * r_sep)


def taylor_reference(params: PhysicalParams, x_A: float, x_B: float, p_A: float, p_B: float) -> float:
    """Cross part of the classical potential, isolated by inclusion-exclusion.

    V(xA, xB) - V(xA, 0) - V(0, xB) + V(0, 0) removes everything that depends on
    one particle only. Momenta enter the same way. Used as an independent check of
    the term table at small displacements.
    """

    def v(xa, xb, pa, pb):
        return pn_potential_classical(params, pa, pb, params.d + xb - xa)

    total = 0.0
    for sa, (xa, pa) in ((1, (x_A, p_A)), (-1, (0.0, 0.0))):
        for sb, (xb, pb) in ((1, (x_B, p_B)), (-1, (0.0, 0.0))):
            total += sa * sb * v(xa, xb, pa, pb)
    return total


def classical_cross_sum(table: CouplingTable, x_A: float, x_B: float, p_A: float, p_B: float) -> float:
    return math.fsum(t.coeff * x_A**t.pow_xA * x_B**t.pow_xB * p_A**t.pow_pA * p_B**t.pow_pB for t in table)
