"""Validation runs of the analytic layers against the truncated Fock space.

Each check returns plain dicts so the report serializes straight to JSON.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gravdip import __version__
from gravdip.errors import GravdipError
from gravdip.fock import FockSpace, Propagator, assemble_table, partial_trace_entropy, smsv_state, tmsv_state
from gravdip.gaussian import (
    entropy_gaussian,
    exact_second_moments,
    mode_coefficients,
    second_moments,
    symplectic_f,
)
from gravdip.model import PhysicalParams, derive_scales, dimensionless_point, omega_for_delta_x, omega_matching
from gravdip.perturbation import (
    closed_form_contributions,
    entropy_closed_form,
    find_dip_ground,
    leading_state,
    oracle_contributions,
    schmidt_entropy,
    table_entries,
)
from gravdip.pn_potential import PNOrder, expand_cross_coupling

COEFF_REL_TOL = 1e-10
ENTROPY_REL_TOL = 1e-6
COMMUTATOR_TOL = 1e-12
DYNAMICS_ABS_TOL = 1e-6
DYNAMICS_REL_TOL = 1e-4
TMSV_TOL = 1e-8


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def coefficient_report(params: PhysicalParams, fock_dim: int = 12) -> list[dict]:
    """Every closed-form C_nN contribution against its Fock matrix element."""
    table = expand_cross_coupling(params)
    closed = {(lab, key): v for lab, key, v in closed_form_contributions(params, table)}
    printed = {(lab, key): v for lab, key, v in closed_form_contributions(params, table, printed=True)}
    oracle = {(lab, key): v for lab, key, v in oracle_contributions(params, table, fock_dim)}
    notes = {(e.label, e.key): e.note for e in table_entries()}
    rows = []
    for ident in sorted(set(closed) | set(oracle)):
        c, o = closed.get(ident, math.nan), oracle.get(ident, math.nan)
        delta = _rel(c, o) if ident in closed and ident in oracle else math.inf
        rows.append(
            {
                "label": ident[0],
                "key": list(ident[1]),
                "closed": c,
                "oracle": o,
                "printed": printed.get(ident, math.nan),
                "rel_delta": delta,
                "printed_rel_delta": _rel(printed[ident], o) if ident in printed and ident in oracle else math.inf,
                "note": notes.get(ident, "missing closed form" if ident not in closed else ""),
                "passed": delta <= COEFF_REL_TOL,
            }
        )
    return rows


def entropy_crosscheck(params: PhysicalParams, coupling_scale: float = 1e-3, points: int = 100) -> list[dict]:
    """Closed-form steady-state entropy against the SVD Schmidt entropy on a delta_x grid.

    The grid spans delta_x from 1e-2 to 1.15 times the ground-state dip, where
    |C11| <= coupling_scale keeps the closed form's own truncation below 1e-6.
    """
    base = dimensionless_point(params, coupling_scale)
    _, dx_dip, _ = find_dip_ground(base)
    rows = []
    for y in np.geomspace(1e-2, 1.15, points):
        p = base.replace(omega_m=omega_for_delta_x(base, float(y) * dx_dip))
        closed = entropy_closed_form(p).value
        svd = schmidt_entropy(leading_state(p)).value
        delta = _rel(closed, svd)
        rows.append(
            {
                "delta_x_over_dip": float(y),
                "closed": closed,
                "svd": svd,
                "rel_delta": delta,
                "passed": delta < ENTROPY_REL_TOL,
            }
        )
    return rows


def commutator_check(params: PhysicalParams, samples: int = 1000, periods: int = 10) -> dict:
    s = derive_scales(params)
    ts = np.linspace(0.0, periods * 2 * math.pi / s.omega_m, samples)
    dev = max(abs(mode_coefficients(s, float(t)).commutator() - 1.0) for t in ts)
    return {"max_deviation": dev, "samples": samples, "passed": dev < COMMUTATOR_TOL}


@dataclass(frozen=True)
class DynamicsCase:
    coupling_scale: float
    r: float
    omega_factor: float = 4.0


def _quadratic_hamiltonian(params: PhysicalParams, space: FockSpace):
    table = expand_cross_coupling(params, max_operator_order=2, max_pn=PNOrder.PN1)
    return assemble_table(space, table)


def gaussian_vs_fock(
    params: PhysicalParams,
    cases: list[DynamicsCase],
    fock_dim: int = 40,
    times_per_period: int = 32,
    moments: str = "mode",
) -> list[dict]:
    """Gaussian-moment entropy against exact Fock evolution over one trap period.

    ``moments="mode"`` uses the mode-coefficient moments; ``"symplectic"`` uses
    the exact 4x4 propagator (diagnostic).
    """
    pick = {"mode": second_moments, "symplectic": exact_second_moments}[moments]
    rows = []
    props: dict[tuple[float, float], Propagator] = {}
    for case in cases:
        row = {"coupling_scale": case.coupling_scale, "r": case.r, "omega_factor": case.omega_factor}
        try:
            p = dimensionless_point(params, case.coupling_scale)
            p = p.replace(omega_m=case.omega_factor * omega_matching(p))
            s = derive_scales(p)
            space = FockSpace.from_scales(s, fock_dim)
            key = (case.coupling_scale, case.omega_factor)
            if key not in props:
                props[key] = Propagator(space, _quadratic_hamiltonian(p, space), s.omega_m)
            prop = props[key]
            psi0 = smsv_state(space, case.r)
            # err / allowed error; <= 1 passes
            worst, at = -1.0, None
            for wt in np.linspace(0.0, 2 * math.pi, times_per_period + 1)[1:]:
                t = float(wt) / s.omega_m
                fock = partial_trace_entropy(prop.evolve(psi0, t)).value
                gauss = entropy_gaussian(symplectic_f(pick(s, case.r, t))).value
                ratio = abs(fock - gauss) / max(DYNAMICS_ABS_TOL, DYNAMICS_REL_TOL * abs(fock))
                if ratio > worst:
                    worst, at = ratio, (float(wt), fock, gauss)
            row.update(
                {
                    "tolerance_ratio": worst,
                    "worst_omega_t": at[0],
                    "fock": at[1],
                    "gaussian": at[2],
                    "rel_delta": _rel(at[1], at[2]),
                    "passed": worst <= 1.0,
                }
            )
        except GravdipError as exc:
            row.update({"passed": False, "failure": f"{type(exc).__name__}[{exc.guard}]: {exc}"})
        rows.append(row)
    return rows


def tmsv_check(s_values, fock_dim: int = 160) -> list[dict]:
    space = FockSpace(fock_dim, fock_dim, 1.0, 0.5)
    rows = []
    for sq in s_values:
        fock = partial_trace_entropy(tmsv_state(space, float(sq))).value
        c2, s2 = math.cosh(sq) ** 2, math.sinh(sq) ** 2
        analytic = c2 * math.log(c2) - (s2 * math.log(s2) if s2 > 0 else 0.0)
        gaussian = entropy_gaussian(s2).value
        err = max(abs(fock - analytic), abs(gaussian - analytic))
        rows.append(
            {
                "s": float(sq),
                "fock": fock,
                "analytic": analytic,
                "gaussian": gaussian,
                "abs_delta": err,
                "passed": err < TMSV_TOL,
            }
        )
    return rows


DEFAULT_CASES = [DynamicsCase(eps, r) for eps in (1e-4, 1e-3) for r in (-0.5, 0.0, 0.5)]


def run_oracle_check(spec) -> dict:
    """Full validation report; ``passed`` is False if any check misses its tolerance."""
    scale = spec.rescale_coupling
    factor = spec.series[0] if spec.series else 2.0
    params = spec.params
    sections: dict[str, object] = {}
    failures: list[str] = []

    def guarded(name, fn):
        try:
            sections[name] = fn()
        except GravdipError as exc:
            sections[name] = {"failure": f"{type(exc).__name__}[{exc.guard}]: {exc}"}
            failures.append(name)

    def coeffs():
        p = dimensionless_point(params, scale)
        return coefficient_report(p.replace(omega_m=factor * omega_matching(p)))

    guarded("coefficients", coeffs)
    guarded("entropy_crosscheck", lambda: entropy_crosscheck(params, scale))
    guarded(
        "commutator",
        lambda: commutator_check(dimensionless_point(params, scale).replace(omega_m=factor * omega_matching(params))),
    )
    cases = [DynamicsCase(scale, r) for r in (-0.5, 0.0, 0.5)]
    guarded("gaussian_vs_fock", lambda: gaussian_vs_fock(params, cases))
    guarded("tmsv", lambda: tmsv_check(np.linspace(0.0, 1.5, 7)))
    # diagnostic: not part of the pass/fail verdict
    try:
        sections["symplectic_vs_fock_diagnostic"] = gaussian_vs_fock(params, cases, moments="symplectic")
    except GravdipError as exc:
        sections["symplectic_vs_fock_diagnostic"] = {"failure": str(exc)}

    for name in ("coefficients", "entropy_crosscheck", "gaussian_vs_fock", "tmsv"):
        rows = sections.get(name)
        if isinstance(rows, list) and not all(r["passed"] for r in rows):
            failures.append(name)
    comm = sections.get("commutator")
    if isinstance(comm, dict) and comm.get("passed") is False:
        failures.append("commutator")

    coeff_rows = sections.get("coefficients")
    summary = {}
    if isinstance(coeff_rows, list):
        summary["coefficients_compared"] = len(coeff_rows)
        summary["coefficients_passed"] = sum(r["passed"] for r in coeff_rows)
        summary["annotated_rows"] = [f"{r['label']} {tuple(r['key'])}" for r in coeff_rows if r["note"]]
    return {
        "version": __version__,
        "spec": spec.to_dict(),
        "summary": summary,
        "failures": sorted(set(failures)),
        "passed": not failures,
        **sections,
    }
