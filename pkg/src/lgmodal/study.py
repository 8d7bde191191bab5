"""Batch comparison of the four modal methods over a case matrix.

The default matrix crosses the supports and cross-sections with seven
interlayer/temperature pairs, 63 cases on a 1 m x 0.1 m beam.  Every case runs the
requested methods for the first modes; the simplified methods are scored
against the complex Newton solution.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .eigen import ModalResult, SolverError, SolverSettings, cnm_modes, mse_modes, real_modes
from .effective import effective_modes
from .fem_beam import BoundaryCondition, CrossSection, LaminatedBeam, build_system
from .materials import GlassMaterial, MaterialDatabase, MaterialError, builtin_database

log = logging.getLogger(__name__)

ALL_METHODS = ("cnm", "mse", "det", "eet")
REFERENCE = "cnm"
SECTIONS_MM = ((10.0, 0.76, 10.0), (15.0, 0.76, 5.0), (10.0, 1.52, 10.0))
MATERIAL_TEMPERATURES = (
    ("SGP_M", 25.0), ("TPU_M", 25.0), ("PVB_M", 25.0),
    ("PVB_S", 25.0), ("PVB_S", 50.0), ("PVB_A", 25.0), ("PVB_A", 50.0),
)
SUPPORT_ORDER = (BoundaryCondition.SIMPLY_SUPPORTED, BoundaryCondition.FREE_FREE,
                 BoundaryCondition.CLAMPED_CLAMPED)
# conventional validity band for the interlayer data, rad/s
VALID_OMEGA = (2 * math.pi * 1e-2, 2 * math.pi * 1e4)

CSV_COLUMNS = ("case_id", "bc", "h1", "h2", "h3", "material", "temp_C", "mode", "method", "f_hz", "eta",
               "iters", "converged", "err_f_vs_cnm", "err_eta_vs_cnm", "extrapolated_material", "reason")


@dataclass(frozen=True)
class CaseSpec:
    bc: BoundaryCondition
    section_mm: tuple[float, float, float]
    material: str
    temperature: float | None = 25.0
    length: float = 1.0
    width: float = 0.1
    glass: str = "glass"

    def __post_init__(self) -> None:
        object.__setattr__(self, "bc", BoundaryCondition.parse(self.bc))
        object.__setattr__(self, "section_mm", tuple(float(h) for h in self.section_mm))
        if len(self.section_mm) != 3:
            raise ValueError("section_mm needs three thicknesses")

    @property
    def case_id(self) -> str:
        sec = "-".join(f"{h:g}" for h in self.section_mm)
        temp = "ref" if self.temperature is None else f"{self.temperature:g}C"
        return f"{self.bc.value}_{sec}_{self.material}_{temp}"

    def beam(self, db: MaterialDatabase) -> LaminatedBeam:
        glass = db[self.glass]
        interlayer = db[self.material]
        if not isinstance(glass, GlassMaterial) or isinstance(interlayer, GlassMaterial):
            raise MaterialError(f"{self.case_id}: expected glass plies and a viscoelastic interlayer")
        section = CrossSection.from_mm(*self.section_mm, b_m=self.width)
        return LaminatedBeam(self.length, section, glass, glass, interlayer, self.bc, self.temperature)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CaseSpec":
        return cls(bc=d["bc"], section_mm=tuple(d["section_mm"]), material=d["material"],
                   temperature=d.get("temp_c", 25.0), length=d.get("length_m", 1.0),
                   width=d.get("width_m", 0.1), glass=d.get("glass", "glass"))


@dataclass
class ResultRow:
    """One (case, mode, method) cell; NaN values mark a failed method."""

    case_id: str
    bc: str
    h1: float
    h2: float
    h3: float
    material: str
    temp_C: float | None
    mode: int
    method: str
    f_hz: float
    eta: float
    iters: int
    converged: bool
    err_f_vs_cnm: float = math.nan
    err_eta_vs_cnm: float = math.nan
    extrapolated_material: bool = False
    reason: str = ""
    omega_re: float = math.nan
    omega_im: float = math.nan


@dataclass
class CaseResult:
    case: CaseSpec
    rows: list[ResultRow] = field(default_factory=list)

    def get(self, method: str, mode: int) -> ResultRow:
        for r in self.rows:
            if r.method == method and r.mode == mode:
                return r
        raise KeyError((method, mode))


@dataclass(frozen=True)
class StudyConfig:
    methods: tuple[str, ...] = ALL_METHODS
    modes: int = 3
    elements: int = 200
    tol: float = 1e-5
    max_iter: int = 50
    jobs: int = 1
    group_by: tuple[str, ...] = ("method", "bc", "mode")

    @property
    def settings(self) -> SolverSettings:
        return SolverSettings(tol=self.tol, max_iter=self.max_iter, modes=self.modes)


def generate_matrix() -> list[CaseSpec]:
    """The 63-case matrix in a fixed order (support, section, interlayer)."""
    return [CaseSpec(bc, sec, mat, temp)
            for bc in SUPPORT_ORDER for sec in SECTIONS_MM for mat, temp in MATERIAL_TEMPERATURES]


def relative_error(value: float, reference: float) -> float:
    if not (math.isfinite(value) and math.isfinite(reference)) or reference == 0:
        return math.nan
    return abs(value - reference) / abs(reference)


def _row(spec: CaseSpec, method: str, mode: int, res: ModalResult | None, reason: str = "") -> ResultRow:
    h1, h2, h3 = spec.section_mm
    base = dict(case_id=spec.case_id, bc=spec.bc.value, h1=h1, h2=h2, h3=h3, material=spec.material,
                temp_C=spec.temperature, mode=mode, method=method)
    if res is None:
        return ResultRow(**base, f_hz=math.nan, eta=math.nan, iters=0, converged=False, reason=reason)
    w = complex(res.omega)
    extrapolated = not (VALID_OMEGA[0] <= abs(w) <= VALID_OMEGA[1])
    return ResultRow(**base, f_hz=res.frequency, eta=res.loss_factor, iters=res.iterations, converged=True,
                     extrapolated_material=extrapolated, omega_re=w.real, omega_im=w.imag)


def run_case(spec: CaseSpec, methods: Sequence[str] = ALL_METHODS, settings: SolverSettings | None = None,
             elements: int = 200, db: MaterialDatabase | None = None) -> CaseResult:
    """Run the requested methods on one case; failures are recorded, not raised."""
    settings = settings or SolverSettings()
    db = db or builtin_database()
    methods = tuple(m.lower() for m in methods)
    unknown = set(methods) - set(ALL_METHODS)
    if unknown:
        raise ValueError(f"unknown methods {sorted(unknown)}")
    beam = spec.beam(db)
    chain = beam.chain
    modes = range(1, settings.modes + 1)
    per_method: dict[str, list[ModalResult] | str] = {}

    fe_methods = [m for m in methods if m in ("cnm", "mse")]
    if fe_methods:
        try:
            system = build_system(beam, elements)
            starts = real_modes(system, settings.modes, settings)
        except (SolverError, ValueError) as exc:
            for m in fe_methods:
                per_method[m] = f"real eigensolve failed: {exc}"
        else:
            for m in fe_methods:
                solver = cnm_modes if m == "cnm" else mse_modes
                per_method[m] = _per_mode(lambda s, m=m, solver=solver: solver(system, chain, settings, [s])[0],
                                          starts)
    for m in methods:
        if m in ("det", "eet"):
            try:
                per_method[m] = effective_modes(beam, m, settings)
            except ValueError as exc:
                # precondition violations (e.g. mixed glass) skip the method
                per_method[m] = f"skipped: {exc}"
            except SolverError:
                per_method[m] = [_safe_effective(beam, m, k, settings) for k in modes]

    result = CaseResult(spec)
    for m in methods:
        out = per_method[m]
        for k in modes:
            if isinstance(out, str):
                result.rows.append(_row(spec, m, k, None, out))
                continue
            item = out[k - 1]
            if isinstance(item, str):
                result.rows.append(_row(spec, m, k, None, item))
            else:
                result.rows.append(_row(spec, m, k, item))
    _attach_errors(result)
    return result


def _per_mode(solve, starts) -> list[ModalResult | str]:
    out: list[ModalResult | str] = []
    for s in starts:
        try:
            r = solve(s)
        except SolverError as exc:
            out.append(str(exc))
        else:
            out.append(r)
    for i, r in enumerate(out, start=1):
        if isinstance(r, ModalResult):
            r.mode_index = i
    return out


def _safe_effective(beam, method, mode, settings) -> ModalResult | str:
    from .effective import effective_modal

    try:
        return effective_modal(beam, method, mode, settings)
    except SolverError as exc:
        return str(exc)


def _attach_errors(result: CaseResult) -> None:
    ref = {r.mode: r for r in result.rows if r.method == REFERENCE}
    for r in result.rows:
        c = ref.get(r.mode)
        if c is None:
            continue
        r.err_f_vs_cnm = relative_error(r.f_hz, c.f_hz)
        r.err_eta_vs_cnm = relative_error(r.eta, c.eta)


def _run_one(args) -> CaseResult:
    spec, methods, settings, elements, db = args
    return run_case(spec, methods, settings, elements, db)


def run_study(cases: Iterable[CaseSpec] | None = None, config: StudyConfig | None = None,
              db: MaterialDatabase | None = None) -> list[CaseResult]:
    """Run every case; output order follows the input order regardless of ``jobs``."""
    config = config or StudyConfig()
    cases = list(cases) if cases is not None else generate_matrix()
    db = db or builtin_database()
    work = [(c, config.methods, config.settings, config.elements, db) for c in cases]
    jobs = config.jobs if config.jobs > 0 else (os.cpu_count() or 1)
    if jobs == 1 or len(work) < 2:
        return [_run_one(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, work))


# ---------------------------------------------------------------------------
# Summary statistics
# ---------------------------------------------------------------------------


def box_stats(values: Sequence[float]) -> dict[str, Any]:
    """Box-plot statistics with type-7 percentiles and 1.5 IQR whiskers."""
    x = np.asarray([v for v in values if math.isfinite(v)], dtype=float)
    if x.size == 0:
        return {"n": 0, "median": None, "q25": None, "q75": None,
                "whisker_low": None, "whisker_high": None, "outliers": [], "max": None}
    q25, med, q75 = np.percentile(x, [25, 50, 75], method="linear")
    iqr = q75 - q25
    lo_lim, hi_lim = q25 - 1.5 * iqr, q75 + 1.5 * iqr
    inside = x[(x >= lo_lim) & (x <= hi_lim)]
    outliers = np.sort(x[(x < lo_lim) | (x > hi_lim)])
    return {"n": int(x.size), "median": float(med), "q25": float(q25), "q75": float(q75),
            "whisker_low": float(inside.min()), "whisker_high": float(inside.max()),
            "outliers": [float(v) for v in outliers], "max": float(x.max())}


def pearson(a: Sequence[float], b: Sequence[float]) -> float | None:
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    if x.size < 2 or np.std(x) == 0 or np.std(y) == 0:
        return None
    return float(np.corrcoef(x, y)[0, 1])


_QUANTITIES = {"f": ("f_hz", "err_f_vs_cnm"), "eta": ("eta", "err_eta_vs_cnm")}
GROUP_KEYS = ("method", "bc", "mode", "material", "section", "temp_C")


def _key_value(row: ResultRow, key: str):
    if key == "section":
        return f"{row.h1:g}/{row.h2:g}/{row.h3:g}"
    return getattr(row, key)


def summarize(results: Sequence[CaseResult], group_by: Sequence[str] = ("method", "bc", "mode")
              ) -> dict[str, Any]:
    """Box statistics of errors versus CNM and Pearson coefficients versus CNM."""
    if not results:
        raise ValueError("nothing to summarize")
    bad = set(group_by) - set(GROUP_KEYS)
    if bad or "method" not in group_by:
        raise ValueError(f"group_by must include 'method' and use keys from {GROUP_KEYS}")
    rows = [r for res in results for r in res.rows if r.method != REFERENCE]
    panels: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        panels.setdefault(tuple(_key_value(r, k) for k in group_by), []).append(r)
        # one pooled panel per method, other keys reported as "all"
        pooled = tuple(r.method if k == "method" else "all" for k in group_by)
        if pooled not in panels or len(group_by) == 1:
            panels.setdefault(pooled, [])
        if len(group_by) > 1:
            panels[pooled].append(r)
    boxes = []
    for key in sorted(panels, key=lambda k: tuple(str(v) for v in k)):
        for q, (_, err_col) in _QUANTITIES.items():
            vals = [getattr(r, err_col) for r in panels[key]]
            entry = dict(zip(group_by, key))
            entry.update(quantity=q, n_failed=sum(1 for v in vals if not math.isfinite(v)), **box_stats(vals))
            boxes.append(entry)

    ref = {(r.case_id, r.mode): r for res in results for r in res.rows if r.method == REFERENCE}
    pcc = []
    methods = sorted({r.method for r in rows})
    modes = sorted({r.mode for r in rows})
    for m in methods:
        for mode in modes:
            sel = [r for r in rows if r.method == m and r.mode == mode and (r.case_id, mode) in ref]
            for q, (val_col, _) in _QUANTITIES.items():
                a = [getattr(ref[(r.case_id, mode)], val_col) for r in sel]
                b = [getattr(r, val_col) for r in sel]
                pcc.append({"method": m, "mode": mode, "quantity": q, "n": len(sel), "pcc": pearson(a, b)})
    n_failed = sum(1 for res in results for r in res.rows if not r.converged)
    return {"group_by": list(group_by), "cases": len(results), "failed_cells": n_failed,
            "box": boxes, "pearson": pcc}


SUMMARY_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["group_by", "cases", "failed_cells", "box", "pearson"],
    "properties": {
        "group_by": {"type": "array", "items": {"type": "string"}},
        "cases": {"type": "integer", "minimum": 0},
        "failed_cells": {"type": "integer", "minimum": 0},
        "box": {"type": "array", "items": {
            "type": "object",
            "required": ["method", "quantity", "n", "n_failed", "median", "q25", "q75",
                         "whisker_low", "whisker_high", "outliers"],
            "properties": {
                "quantity": {"enum": ["f", "eta"]},
                "n": {"type": "integer"},
                "median": {"type": ["number", "null"]},
                "q25": {"type": ["number", "null"]},
                "q75": {"type": ["number", "null"]},
                "outliers": {"type": "array", "items": {"type": "number"}},
            },
        }},
        "pearson": {"type": "array", "items": {
            "type": "object",
            "required": ["method", "mode", "quantity", "n", "pcc"],
            "properties": {"pcc": {"type": ["number", "null"]}},
        }},
    },
}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "methods": {"type": "array", "items": {"enum": list(ALL_METHODS)}},
        "modes": {"type": "integer", "minimum": 1, "maximum": 3},
        "elements": {"type": "integer", "minimum": 2},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "max_iter": {"type": "integer", "minimum": 1},
        "jobs": {"type": "integer", "minimum": 0},
        "group_by": {"type": "array", "items": {"enum": list(GROUP_KEYS)}},
        "materials": {"type": "array", "items": {"type": "object", "required": ["name"]}},
        "cases": {
            "oneOf": [
                {"const": "default"},
                {"type": "array", "items": {
                    "type": "object",
                    "required": ["bc", "section_mm", "material"],
                    "properties": {
                        "bc": {"type": "string"},
                        "section_mm": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                                       "minItems": 3, "maxItems": 3},
                        "material": {"type": "string"},
                        "temp_c": {"type": ["number", "null"]},
                        "length_m": {"type": "number", "exclusiveMinimum": 0},
                        "width_m": {"type": "number", "exclusiveMinimum": 0},
                        "glass": {"type": "string"},
                    },
                }},
            ],
        },
    },
    "additionalProperties": False,
}


def load_config(path: str | Path) -> tuple[StudyConfig, list[CaseSpec], MaterialDatabase]:
    """Read a JSON study configuration (validated against CONFIG_SCHEMA)."""
    import jsonschema

    doc = json.loads(Path(path).read_text())
    jsonschema.validate(doc, CONFIG_SCHEMA)
    db = builtin_database()
    if "materials" in doc:
        extra = MaterialDatabase.from_records(doc["materials"])
        for m in extra.materials.values():
            db.add(m)
    cases_doc = doc.get("cases", "default")
    cases = generate_matrix() if cases_doc == "default" else [CaseSpec.from_dict(c) for c in cases_doc]
    fields = {k: doc[k] for k in ("modes", "elements", "tol", "max_iter", "jobs") if k in doc}
    if "methods" in doc:
        fields["methods"] = tuple(doc["methods"])
    if "group_by" in doc:
        fields["group_by"] = tuple(doc["group_by"])
    return StudyConfig(**fields), cases, db


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _json_clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    return obj


def emit(results: Sequence[CaseResult], stats: dict[str, Any], out_dir: str | Path) -> list[Path]:
    """Write ``cases.csv``, ``summary.json`` and ``qq_mode1.csv`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "cases.csv", out / "summary.json", out / "qq_mode1.csv"]

    with open(paths[0], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for res in results:
            for r in res.rows:
                d = asdict(r)
                w.writerow([_fmt(d[c]) for c in CSV_COLUMNS])

    paths[1].write_text(json.dumps(_json_clean(stats), indent=2, sort_keys=True) + "\n")

    with open(paths[2], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("case_id", "bc", "material", "temp_C", "method", "quantity", "cnm_value", "method_value"))
        for res in results:
            ref = {r.mode: r for r in res.rows if r.method == REFERENCE}
            c = ref.get(1)
            if c is None:
                continue
            for r in res.rows:
                if r.mode != 1 or r.method == REFERENCE:
                    continue
                for q, (col, _) in _QUANTITIES.items():
                    w.writerow([r.case_id, r.bc, r.material, _fmt(r.temp_C), r.method, q,
                                _fmt(getattr(c, col)), _fmt(getattr(r, col))])
    return paths


def read_cases_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
