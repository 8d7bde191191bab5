"""Glass and viscoelastic interlayer materials.

The interlayer is a generalized Maxwell chain (long-term spring in parallel
with Prony units).  Its frequency-domain shear modulus is split as

    G*(w) = G0 + Gfr(w),    Gfr(w) = -sum_p G_p / (1 + i w theta_p)

where G0 is the instantaneous modulus.  The rational form is used for
complex ``w`` as well, which is what the nonlinear eigensolver needs.

All quantities are SI (Pa, s, kg/m^3).  The JSON database and the built-in
tables use MPa/GPa and are converted at ingestion.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

MPA = 1.0e6
GPA = 1.0e9


class MaterialError(ValueError):
    """Invalid material data or an unsupported request on it."""


@dataclass(frozen=True)
class MaxwellUnit:
    shear_modulus: float  # Pa
    relaxation_time: float  # s

    def __post_init__(self) -> None:
        if not self.shear_modulus > 0:
            raise MaterialError(f"unit modulus must be positive, got {self.shear_modulus}")
        if not self.relaxation_time > 0:
            raise MaterialError(f"relaxation time must be positive, got {self.relaxation_time}")


@dataclass(frozen=True)
class MaxwellChain:
    """Long-term modulus plus an ordered tuple of Maxwell units."""

    long_term_modulus: float
    units: tuple[MaxwellUnit, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "units", tuple(self.units))
        if self.long_term_modulus < 0:
            raise MaterialError("long-term modulus must be non-negative")
        if not self.instantaneous > 0:
            raise MaterialError("instantaneous modulus must be positive")

    @classmethod
    def from_arrays(cls, g_inf: float, moduli: Sequence[float], times: Sequence[float]) -> "MaxwellChain":
        if len(moduli) != len(times):
            raise MaterialError("moduli and relaxation times differ in length")
        return cls(float(g_inf), tuple(MaxwellUnit(float(g), float(t)) for g, t in zip(moduli, times)))

    @property
    def moduli(self) -> np.ndarray:
        return np.array([u.shear_modulus for u in self.units], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return np.array([u.relaxation_time for u in self.units], dtype=float)

    @property
    def instantaneous(self) -> float:
        return self.long_term_modulus + math.fsum(u.shear_modulus for u in self.units)

    @property
    def is_elastic(self) -> bool:
        return len(self.units) == 0


@dataclass(frozen=True)
class WlfShift:
    t0: float  # reference temperature, degC
    c1: float
    c2: float  # degC


@dataclass(frozen=True)
class GlassMaterial:
    young_modulus: float  # Pa
    poisson_ratio: float
    density: float
    name: str = "glass"

    def __post_init__(self) -> None:
        if not (self.young_modulus > 0 and self.density > 0 and 0 <= self.poisson_ratio < 0.5):
            raise MaterialError(f"invalid glass parameters for {self.name!r}")

    @property
    def shear_modulus(self) -> float:
        return self.young_modulus / (2.0 * (1.0 + self.poisson_ratio))


@dataclass(frozen=True)
class InterlayerMaterial:
    density: float
    poisson_ratio: float
    chain: MaxwellChain
    wlf: WlfShift | None = None
    name: str = "interlayer"
    # temperature the chain was tabulated at when no WLF data are available
    tabulated_temperature: float | None = None

    def __post_init__(self) -> None:
        if not self.density > 0:
            raise MaterialError(f"{self.name}: density must be positive")
        if not 0 < self.poisson_ratio < 0.5:
            raise MaterialError(f"{self.name}: Poisson ratio must lie in (0, 0.5)")

    def young_from_shear(self, g: complex | float) -> complex | float:
        """Axial modulus for a given shear modulus under constant Poisson ratio."""
        return 2.0 * (1.0 + self.poisson_ratio) * g

    def chain_at(self, temperature: float | None) -> MaxwellChain:
        """Chain with relaxation times shifted to ``temperature`` [degC].

        ``None`` means the tabulated state.  Without WLF data only the
        tabulated temperature (when known) is accepted.
        """
        if temperature is None or self.chain.is_elastic:
            return self.chain
        if self.wlf is not None:
            return shifted_chain(self.chain, self.wlf, temperature)
        if self.tabulated_temperature is not None and temperature == self.tabulated_temperature:
            return self.chain
        raise MaterialError(f"{self.name}: no WLF data, cannot evaluate at {temperature} degC")


# ---------------------------------------------------------------------------
# Chain evaluation
# ---------------------------------------------------------------------------


def instantaneous_modulus(chain: MaxwellChain) -> float:
    return chain.instantaneous


def relaxation_modulus(chain: MaxwellChain, t):
    """G(t) = G_inf + sum_p G_p exp(-t/theta_p)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise MaterialError("relaxation modulus requires t >= 0")
    g = chain.moduli
    theta = chain.times
    out = chain.long_term_modulus + np.sum(g * np.exp(-t_arr[..., None] / theta), axis=-1)
    return float(out) if out.ndim == 0 else out


def _pole_check(denominator: np.ndarray) -> None:
    if np.any(np.abs(denominator) == 0.0):
        raise MaterialError("frequency hits a pole 1 + i w theta_p = 0")


def frequency_part(chain: MaxwellChain, omega):
    """Gfr(w) = -sum_p G_p / (1 + i w theta_p); broadcasts over ``omega``."""
    w = np.asarray(omega, dtype=complex)
    if chain.is_elastic:
        out = np.zeros_like(w)
    else:
        den = 1.0 + 1j * w[..., None] * chain.times
        _pole_check(den)
        out = -np.sum(chain.moduli / den, axis=-1)
    return complex(out) if out.ndim == 0 else out


def complex_modulus(chain: MaxwellChain, omega):
    """G*(w) = G0 + Gfr(w)."""
    return chain.instantaneous + frequency_part(chain, omega)


def frequency_part_derivative(chain: MaxwellChain, omega):
    """dGfr/dw = sum_p G_p i theta_p / (1 + i w theta_p)^2."""
    w = np.asarray(omega, dtype=complex)
    if chain.is_elastic:
        out = np.zeros_like(w)
    else:
        theta = chain.times
        den = 1.0 + 1j * w[..., None] * theta
        _pole_check(den)
        out = np.sum(chain.moduli * 1j * theta / den**2, axis=-1)
    return complex(out) if out.ndim == 0 else out


def shift_factor(wlf: WlfShift, temperature: float) -> float:
    """WLF shift a_T = 10**(-C1 (T - T0) / (C2 + T - T0))."""
    dt = temperature - wlf.t0
    den = wlf.c2 + dt
    if den == 0:
        raise MaterialError(f"WLF shift undefined at T = {temperature} (C2 + T - T0 = 0)")
    return 10.0 ** (-wlf.c1 * dt / den)


def shifted_chain(chain: MaxwellChain, wlf: WlfShift | None, temperature: float) -> MaxwellChain:
    if wlf is None:
        raise MaterialError("temperature shift requested without WLF data")
    if temperature == wlf.t0:
        return chain
    a_t = shift_factor(wlf, temperature)
    return MaxwellChain(
        chain.long_term_modulus,
        tuple(MaxwellUnit(u.shear_modulus, u.relaxation_time * a_t) for u in chain.units),
    )


# ---------------------------------------------------------------------------
# Built-in database and JSON I/O
# ---------------------------------------------------------------------------

_DECADES = [10.0**k for k in range(-6, 6)]

# Ratio-form chains: G_p / G0 as tabulated, G0 in MPa.  Not renormalized.
_RATIO_TABLES: dict[str, dict[str, Any]] = {
    "SGP_M": {
        "density": 950.0,
        "g_inf_mpa": 1.8,
        "g0_mpa": 274.1,
        "ratios": [0.07767, 0.03764, 0.05631, 0.06501, 0.07409, 0.09317,
                   0.11867, 0.20551, 0.18131, 0.05361, 0.01856, 0.01180],
    },
    "TPU_M": {
        "density": 1070.0,
        "g_inf_mpa": 1.56,
        "g0_mpa": 94.6,
        "ratios": [0.42077, 0.18113, 0.19280, 0.09969, 0.04750, 0.01928,
                   0.00903, 0.00414, 0.00307, 0.00230, 0.00371, 0.00004],
    },
    "PVB_M": {
        "density": 1100.0,
        "g_inf_mpa": 0.22,
        "g0_mpa": 213.6,
        "ratios": [0.39262, 0.19225, 0.20957, 0.12621, 0.05694, 0.01536,
                   0.00325, 0.00103, 0.00077, 0.00010, 0.00029, 0.00053],
    },
}

_ABSOLUTE_TABLES: dict[str, dict[str, Any]] = {
    "PVB_S": {
        "density": 1100.0,
        "g_inf_mpa": 0.0,
        "g_mpa": [51.25, 31.75, 12.80, 32.90, 39.90, 37.80, 21.94,
                  25.01, 27.58, 11.98, 6.345, 2.692, 8.718, 0.6969],
        "theta_s": [4.273e-7, 3.546e-6, 1.330e-5, 4.279e-5, 2.984e-4, 2.170e-3, 8.274e-3,
                    2.937e-2, 1.658e-1, 7.774e-1, 3.293e0, 1.698e1, 2.041e2, 3.588e4],
        "wlf": {"t0_c": 20.46, "c1": 37.30, "c2": 203.61},
    },
    "PVB_A": {
        "density": 1100.0,
        "g_inf_mpa": 0.0,
        "g_mpa": [0.514628, 0.280116, 0.144282, 0.086904, 0.076190,
                  0.092202, 0.098780, 0.085555, 0.070251, 0.107653],
        "theta_s": [9.51e-2, 4.71e-1, 2.72e0, 2.11e1, 2.21e2,
                    2.12e3, 1.74e4, 1.31e5, 1.05e6, 2.99e7],
        "wlf": {"t0_c": 30.0, "c1": 12.5, "c2": 89.0},
    },
}

INTERLAYER_POISSON = 0.49
BUILTIN_NAMES = ("glass", "SGP_M", "TPU_M", "PVB_M", "PVB_S", "PVB_A")


def _builtin_records() -> list[dict[str, Any]]:
    records: list[dict[str, Any]] = [
        {"name": "glass", "kind": "glass", "young_gpa": 72.0, "poisson": 0.22, "density": 2500.0}
    ]
    for name, tab in _RATIO_TABLES.items():
        records.append({
            "name": name,
            "kind": "interlayer",
            "density": tab["density"],
            "poisson": INTERLAYER_POISSON,
            "g_inf_mpa": tab["g_inf_mpa"],
            "g0_mpa": tab["g0_mpa"],
            "units": [{"g_ratio": r, "theta_s": t} for r, t in zip(tab["ratios"], _DECADES)],
            "t_ref_c": 25.0,
        })
    for name, tab in _ABSOLUTE_TABLES.items():
        records.append({
            "name": name,
            "kind": "interlayer",
            "density": tab["density"],
            "poisson": INTERLAYER_POISSON,
            "g_inf_mpa": tab["g_inf_mpa"],
            "units": [{"g_mpa": g, "theta_s": t} for g, t in zip(tab["g_mpa"], tab["theta_s"])],
            "wlf": dict(tab["wlf"]),
        })
    return records


def material_from_record(rec: dict[str, Any]) -> GlassMaterial | InterlayerMaterial:
    """Build a material from one JSON database record (MPa/GPa units)."""
    kind = rec.get("kind", "interlayer" if "units" in rec or "g_inf_mpa" in rec else "glass")
    name = rec["name"]
    if kind == "glass":
        return GlassMaterial(rec["young_gpa"] * GPA, rec["poisson"], rec["density"], name=name)
    moduli, times = [], []
    for u in rec.get("units", []):
        if "g_mpa" in u:
            g = u["g_mpa"]
        elif "g_ratio" in u:
            if "g0_mpa" not in rec:
                raise MaterialError(f"{name}: ratio-form units need 'g0_mpa'")
            g = u["g_ratio"] * rec["g0_mpa"]
        else:
            raise MaterialError(f"{name}: unit needs 'g_mpa' or 'g_ratio'")
        moduli.append(g * MPA)
        times.append(u["theta_s"])
    chain = MaxwellChain.from_arrays(rec.get("g_inf_mpa", 0.0) * MPA, moduli, times)
    wlf = None
    if rec.get("wlf"):
        w = rec["wlf"]
        wlf = WlfShift(w["t0_c"], w["c1"], w["c2"])
    return InterlayerMaterial(rec["density"], rec["poisson"], chain, wlf, name=name,
                              tabulated_temperature=rec.get("t_ref_c"))


def material_to_record(mat: GlassMaterial | InterlayerMaterial) -> dict[str, Any]:
    """Inverse of :func:`material_from_record`; units are written as ``g_mpa``."""
    if isinstance(mat, GlassMaterial):
        return {"name": mat.name, "kind": "glass", "young_gpa": mat.young_modulus / GPA,
                "poisson": mat.poisson_ratio, "density": mat.density}
    rec: dict[str, Any] = {
        "name": mat.name,
        "kind": "interlayer",
        "density": mat.density,
        "poisson": mat.poisson_ratio,
        "g_inf_mpa": mat.chain.long_term_modulus / MPA,
        "units": [{"g_mpa": u.shear_modulus / MPA, "theta_s": u.relaxation_time} for u in mat.chain.units],
    }
    if mat.tabulated_temperature is not None:
        rec["t_ref_c"] = mat.tabulated_temperature
    if mat.wlf is not None:
        rec["wlf"] = {"t0_c": mat.wlf.t0, "c1": mat.wlf.c1, "c2": mat.wlf.c2}
    return rec


@dataclass
class MaterialDatabase:
    materials: dict[str, GlassMaterial | InterlayerMaterial] = field(default_factory=dict)

    def __getitem__(self, name: str) -> GlassMaterial | InterlayerMaterial:
        try:
            return self.materials[name]
        except KeyError:
            raise MaterialError(f"unknown material {name!r}; known: {sorted(self.materials)}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.materials

    def add(self, mat: GlassMaterial | InterlayerMaterial) -> None:
        self.materials[mat.name] = mat

    @classmethod
    def from_records(cls, records: list[dict[str, Any]]) -> "MaterialDatabase":
        db = cls()
        for rec in records:
            db.add(material_from_record(rec))
        return db

    @classmethod
    def load(cls, path: str | Path) -> "MaterialDatabase":
        doc = json.loads(Path(path).read_text())
        return cls.from_records(doc["materials"] if isinstance(doc, dict) else doc)

    def to_records(self) -> list[dict[str, Any]]:
        return [material_to_record(m) for m in self.materials.values()]

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps({"materials": self.to_records()}, indent=2) + "\n")


def builtin_records() -> list[dict[str, Any]]:
    """The built-in database as JSON-ready records (tabulated form, ratios kept)."""
    return _builtin_records()


_BUILTIN = MaterialDatabase.from_records(_builtin_records())


def builtin_database() -> MaterialDatabase:
    return MaterialDatabase(dict(_BUILTIN.materials))


def builtin_material(name: str) -> GlassMaterial | InterlayerMaterial:
    return _BUILTIN[name]
