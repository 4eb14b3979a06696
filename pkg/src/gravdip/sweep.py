"""Parameter sweeps behind the figures, plus dip finding.

Rows are computed independently (optionally in worker processes), buffered and
emitted in index order, so output bytes do not depend on the worker count.
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from gravdip import __version__
from gravdip.errors import GravdipError, SpecError
from gravdip.model import (
    PhysicalParams,
    derive_scales,
    dimensionless_point,
    omega_for_delta_x,
    omega_matching,
)
from gravdip.perturbation import (
    EntropyValue,
    Normalization,
    entropy_closed_form,
    find_dip_ground,
    plateau_entropy,
)


class Mode(str, Enum):
    ground_delocalization = "ground_delocalization"
    squeezed_max_entropy = "squeezed_max_entropy"
    time_trace = "time_trace"
    dip_scan = "dip_scan"
    oracle_check = "oracle_check"


MAX_POINTS = 10**7


@dataclass(frozen=True)
class Grid:
    variable: str
    min: float
    max: float
    points: int
    spacing: str = "log"

    def __post_init__(self):
        if not (2 <= self.points <= MAX_POINTS):
            raise SpecError(f"grid point count must lie in [2, {MAX_POINTS}], got {self.points}")
        if not self.min < self.max:
            raise SpecError(f"grid needs min < max, got {self.min} >= {self.max}")
        if self.spacing not in ("lin", "log"):
            raise SpecError(f"grid spacing must be 'lin' or 'log', got {self.spacing!r}")
        if self.spacing == "log" and self.min <= 0:
            raise SpecError("log spacing requires positive bounds")

    @classmethod
    def parse(cls, text: str, variable: str) -> "Grid":
        parts = text.split(":")
        if len(parts) != 4:
            raise SpecError(f"grid must look like min:max:points:lin|log, got {text!r}")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise SpecError(f"cannot parse grid {text!r}: {exc}") from exc
        return cls(variable, lo, hi, n, parts[3])

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.points)
        return np.linspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class SweepSpec:
    mode: Mode
    params: PhysicalParams = field(default_factory=PhysicalParams)
    grid: Grid | None = None
    normalization: Normalization = Normalization.raw
    rescale_coupling: float | None = None
    output_path: str = "-"
    # trap distances (ground sweep) or multiples of w_0 (squeezed sweep, time trace)
    series: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        object.__setattr__(self, "series", tuple(float(s) for s in self.series))
        if self.rescale_coupling is not None and not (0 < self.rescale_coupling <= 0.1):
            raise SpecError(f"rescale_coupling must lie in (0, 0.1], got {self.rescale_coupling}")
        if self.mode is Mode.oracle_check and self.rescale_coupling is None:
            raise SpecError("oracle_check requires rescale_coupling")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "params": self.params.to_dict(),
            "grid": None if self.grid is None else asdict(self.grid),
            "normalization": self.normalization.value,
            "rescale_coupling": self.rescale_coupling,
            "output_path": self.output_path,
            "series": list(self.series),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        grid = data.get("grid")
        return cls(
            mode=Mode(data["mode"]),
            params=PhysicalParams.from_dict(data.get("params", {})),
            grid=None if grid is None else Grid(**grid),
            normalization=Normalization(data.get("normalization", "raw")),
            rescale_coupling=data.get("rescale_coupling"),
            output_path=data.get("output_path", "-"),
            series=tuple(data.get("series", ())),
        )

    @classmethod
    def from_json(cls, text: str) -> "SweepSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SweepRow:
    index: int
    series: float
    axis_value: float
    entropy: float
    log10_entropy: float
    components: dict = field(default_factory=dict)
    flag: str | None = None


@dataclass
class SweepResult:
    spec: SweepSpec
    columns: tuple[str, ...]
    rows: list[SweepRow]
    metadata: dict

    @property
    def emitted(self) -> list[SweepRow]:
        return [r for r in self.rows if r.flag is None]

    @property
    def skipped(self) -> list[SweepRow]:
        return [r for r in self.rows if r.flag is not None]


def _prepare(params: PhysicalParams, rescale: float | None) -> PhysicalParams:
    return params if rescale is None else dimensionless_point(params, rescale)


def _pmap(fn, tasks: Sequence, workers: int) -> list:
    if workers <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def _flagged(index: int, series: float, axis: float, exc: GravdipError) -> SweepRow:
    return SweepRow(index, series, axis, math.nan, math.nan, {}, flag=exc.guard)


# ----------------------------------------------------------------- ground state

GROUND_COLUMNS = ("delta_x", "omega_m", "eps_0pn", "eps_1pn", "eps_2pn", "g_x", "g_p")


def _ground_row(task) -> SweepRow:
    index, d, x_rel, base = task
    params = PhysicalParams.from_dict(base).replace(d=d)
    x_planck = derive_scales(params).x_planck
    delta_x = x_rel * x_planck
    try:
        p = params.replace(omega_m=omega_for_delta_x(params, delta_x))
        s = derive_scales(p)
        S = entropy_closed_form(p)
    except GravdipError as exc:
        return _flagged(index, d, x_rel, exc)
    comps = {
        "delta_x": delta_x,
        "omega_m": p.omega_m,
        "eps_0pn": s.eps_0pn,
        "eps_1pn": s.eps_1pn,
        "eps_2pn": s.eps_2pn,
        "g_x": s.g_x,
        "g_p": s.g_p,
    }
    return SweepRow(index, d, x_rel, S.value, S.log10_value, comps)


def run_ground_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    if spec.mode is not Mode.ground_delocalization:
        raise SpecError(f"run_ground_sweep needs mode ground_delocalization, got {spec.mode.value}")
    grid = spec.grid or Grid("delta_x_over_x_planck", 1.0, 1e24, 2000, "log")
    base = _prepare(spec.params, spec.rescale_coupling)
    distances = spec.series or (base.d,)
    xs = grid.values()
    tasks = []
    for k, d in enumerate(distances):
        for j, x in enumerate(xs):
            tasks.append((k * len(xs) + j, float(d), float(x), base.to_dict()))
    rows = _pmap(_ground_row, tasks, workers)

    constants = {}
    for d in distances:
        sp = plateau_entropy(base.replace(d=d))
        _, dx_dip, dp_dip = find_dip_ground(base.replace(d=d))
        x_planck = derive_scales(base.replace(d=d)).x_planck
        constants[repr(float(d))] = {
            "S_p": sp.value,
            "log10_S_p": sp.log10_value,
            "delta_x_dip": dx_dip,
            "delta_x_dip_over_x_planck": dx_dip / x_planck,
            "x_planck": x_planck,
        }
    if spec.normalization is Normalization.per_plateau_S_p:
        rows = [_normalize(r, plateau_entropy(base.replace(d=r.series))) for r in rows]
    elif spec.normalization is Normalization.per_reference_max:
        rows = _normalize_refmax(rows, reference_series=None)
    return SweepResult(spec, GROUND_COLUMNS, rows, {"series_kind": "distance", "constants": constants})


def _normalize(row: SweepRow, ref: EntropyValue) -> SweepRow:
    if row.flag is not None:
        return row
    val = EntropyValue(row.entropy, row.log10_entropy).normalized(ref, Normalization.per_plateau_S_p)
    return SweepRow(row.index, row.series, row.axis_value, val.value, val.log10_value, row.components)


def _normalize_refmax(rows: list[SweepRow], reference_series: float | None) -> list[SweepRow]:
    pool = [r for r in rows if r.flag is None and (reference_series is None or r.series == reference_series)]
    if not pool:
        pool = [r for r in rows if r.flag is None]
    if not pool:
        return rows
    ref_log = max(r.log10_entropy for r in pool)
    out = []
    for r in rows:
        if r.flag is not None:
            out.append(r)
            continue
        lg = r.log10_entropy - ref_log
        out.append(SweepRow(r.index, r.series, r.axis_value, 10.0**lg, lg, r.components))
    return out


# -------------------------------------------------------------- squeezed states

SQUEEZED_COLUMNS = ("delta_x", "omega_m", "g_x", "g_p", "A_of_t", "f", "eps_0pn", "eps_1pn", "eps_2pn")


def _squeezed_row(task) -> SweepRow:
    from gravdip.gaussian import a_of_t, entropy_gaussian, occupation_at_peak, peak_time, _check_regime

    index, factor, r, base = task
    params = PhysicalParams.from_dict(base)
    try:
        p = params.replace(omega_m=factor * omega_matching(params), r=r)
        s = derive_scales(p)
        _check_regime(s)
        f = occupation_at_peak(s, r)
        S = entropy_gaussian(f)
    except GravdipError as exc:
        return _flagged(index, factor, r, exc)
    comps = {
        "delta_x": p.effective_delta_x,
        "omega_m": p.omega_m,
        "g_x": s.g_x,
        "g_p": s.g_p,
        "A_of_t": a_of_t(s, r, peak_time(s)),
        "f": f,
        "eps_0pn": s.eps_0pn,
        "eps_1pn": s.eps_1pn,
        "eps_2pn": s.eps_2pn,
    }
    return SweepRow(index, factor, r, S.value, S.log10_value, comps)


def run_squeezed_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    if spec.mode is not Mode.squeezed_max_entropy:
        raise SpecError(f"run_squeezed_sweep needs mode squeezed_max_entropy, got {spec.mode.value}")
    grid = spec.grid or Grid("r", -1.5, 1.5, 601, "lin")
    if grid.variable != "r":
        raise SpecError(f"squeezed sweep axis must be r, got {grid.variable!r}")
    base = _prepare(spec.params, spec.rescale_coupling)
    factors = spec.series or (1.0, 4.0, 0.25)
    rs = grid.values()
    tasks = [
        (k * len(rs) + j, float(fac), float(r), base.to_dict())
        for k, fac in enumerate(factors)
        for j, r in enumerate(rs)
    ]
    rows = _pmap(_squeezed_row, tasks, workers)
    meta = {"series_kind": "omega_over_omega_0"}
    if spec.normalization is Normalization.per_reference_max:
        ref = 1.0 if 1.0 in factors else None
        rows = _normalize_refmax(rows, ref)
        meta["reference"] = (
            "maximum of the w_m = w_0 series over the plotted r range"
            if ref is not None
            else "maximum over all series (no w_0 series present)"
        )
    elif spec.normalization is Normalization.per_plateau_S_p:
        raise SpecError("plateau normalization applies to the ground-state sweep only")
    return SweepResult(spec, SQUEEZED_COLUMNS, rows, meta)


# ------------------------------------------------------------------ time trace

TIME_COLUMNS = ("t", "entropy_closed", "log10_entropy_closed", "A_of_t", "f", "g_x", "g_p")


def _time_row(task) -> SweepRow:
    from gravdip.gaussian import (
        a_of_t,
        entropy_closed_time,
        entropy_gaussian,
        second_moments,
        symplectic_f,
    )

    index, factor, wt, base = task
    params = PhysicalParams.from_dict(base)
    try:
        p = params.replace(omega_m=factor * omega_matching(params))
        s = derive_scales(p)
        t = wt / s.omega_m
        f = symplectic_f(second_moments(s, p.r, t))
        S = entropy_gaussian(f)
        Sc = entropy_closed_time(s, p.r, t)
    except GravdipError as exc:
        return _flagged(index, factor, wt, exc)
    comps = {
        "t": t,
        "entropy_closed": Sc.value,
        "log10_entropy_closed": Sc.log10_value,
        "A_of_t": a_of_t(s, p.r, t),
        "f": f,
        "g_x": s.g_x,
        "g_p": s.g_p,
    }
    return SweepRow(index, factor, wt, S.value, S.log10_value, comps)


def run_time_trace(spec: SweepSpec, workers: int = 1) -> SweepResult:
    if spec.mode is not Mode.time_trace:
        raise SpecError(f"run_time_trace needs mode time_trace, got {spec.mode.value}")
    grid = spec.grid or Grid("omega_t", 0.0, 2 * math.pi, 401, "lin")
    base = _prepare(spec.params, spec.rescale_coupling)
    factors = spec.series or (1.0,)
    wts = grid.values()
    tasks = [
        (k * len(wts) + j, float(fac), float(wt), base.to_dict())
        for k, fac in enumerate(factors)
        for j, wt in enumerate(wts)
    ]
    rows = _pmap(_time_row, tasks, workers)
    meta = {"series_kind": "omega_over_omega_0", "r": base.r}
    if spec.normalization is Normalization.per_reference_max:
        ref = 1.0 if 1.0 in factors else None
        rows = _normalize_refmax(rows, ref)
    return SweepResult(spec, TIME_COLUMNS, rows, meta)


# ------------------------------------------------------------------ dip finding


def run_dip_scan(spec: SweepSpec) -> dict:
    from gravdip.gaussian import find_dip_squeezed, minimize_over_r

    base = _prepare(spec.params, spec.rescale_coupling)
    distances = spec.series or (base.d,)
    ground = []
    for d in distances:
        p = base.replace(d=d)
        omega, dx, dp = find_dip_ground(p)
        s = derive_scales(p)
        ground.append(
            {
                "d": d,
                "omega_dip": omega,
                "omega_dip_times_sqrt2_d_over_c": omega * math.sqrt(2.0) * d / p.c,
                "delta_x_dip": dx,
                "delta_p_dip": dp,
                "delta_x_dip_over_x_planck": dx / s.x_planck,
                "delta_p_dip_over_p_planck": dp / s.p_planck,
            }
        )
    squeezed = []
    for fac in (1.0, 4.0, 0.25):
        p = base.replace(omega_m=fac * omega_matching(base), r=0.0)
        s = derive_scales(p)
        r_dip = find_dip_squeezed(s)
        squeezed.append(
            {
                "omega_over_omega_0": fac,
                "r_dip": r_dip,
                "r_dip_numeric": minimize_over_r(s, r_dip - 1.0, r_dip + 1.0),
            }
        )
    return {"spec": spec.to_dict(), "version": __version__, "ground": ground, "squeezed": squeezed}


# ---------------------------------------------------------------- serialization


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def metadata_for(result: SweepResult) -> dict:
    return {
        "spec": result.spec.to_dict(),
        "version": __version__,
        "columns": ["index", "series", "axis_value", "entropy", "log10_entropy", *result.columns],
        "skipped": [
            {"index": r.index, "series": r.series, "axis_value": r.axis_value, "guard": r.flag} for r in result.skipped
        ],
        **result.metadata,
    }


def write_csv(result: SweepResult, stream: io.TextIOBase) -> None:
    meta = metadata_for(result)
    stream.write("# " + json.dumps(meta, sort_keys=True, default=_json_default) + "\n")
    stream.write(",".join(meta["columns"]) + "\n")
    for r in result.emitted:
        cells = [r.index, r.series, r.axis_value, r.entropy, r.log10_entropy]
        cells += [r.components.get(c) for c in result.columns]
        stream.write(",".join(_fmt(c) for c in cells) + "\n")


def write_json(result: SweepResult, stream: io.TextIOBase) -> None:
    meta = metadata_for(result)
    rows = []
    for r in result.emitted:
        row = {"index": r.index, "series": r.series, "axis_value": r.axis_value}
        row["entropy"] = r.entropy
        row["log10_entropy"] = r.log10_entropy
        row.update({c: r.components.get(c) for c in result.columns})
        rows.append(row)
    json.dump({"metadata": meta, "rows": rows}, stream, sort_keys=True, default=_json_default, allow_nan=True)
    stream.write("\n")


def _json_default(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def read_csv(text: str) -> tuple[dict, list[dict]]:
    lines = text.splitlines()
    meta = json.loads(lines[0][2:])
    header = lines[1].split(",")
    rows = []
    for line in lines[2:]:
        rows.append({k: float(v) if v else None for k, v in zip(header, line.split(","))})
    return meta, rows


def run(spec: SweepSpec, workers: int = 1) -> SweepResult:
    runners = {
        Mode.ground_delocalization: run_ground_sweep,
        Mode.squeezed_max_entropy: run_squeezed_sweep,
        Mode.time_trace: run_time_trace,
    }
    if spec.mode not in runners:
        raise SpecError(f"mode {spec.mode.value} does not produce rows")
    return runners[spec.mode](spec, workers)


def iter_rows(result: SweepResult) -> Iterable[SweepRow]:
    return iter(result.emitted)
