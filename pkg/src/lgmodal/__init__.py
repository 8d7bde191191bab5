"""Modal analysis of three-layer laminated glass beams with viscoelastic interlayers."""

from .effective import effective_modal, effective_modes
from .eigen import ModalResult, SolverError, SolverSettings, cnm_modes, mse_modes, newton_solve, real_modes
from .fem_beam import BoundaryCondition, CrossSection, LaminatedBeam, build_system
from .materials import (
    GlassMaterial,
    InterlayerMaterial,
    MaterialDatabase,
    MaterialError,
    MaxwellChain,
    WlfShift,
    builtin_database,
    builtin_material,
    complex_modulus,
)
from .study import CaseSpec, StudyConfig, generate_matrix, run_case, run_study, summarize

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition", "CaseSpec", "CrossSection", "GlassMaterial", "InterlayerMaterial", "LaminatedBeam",
    "MaterialDatabase", "MaterialError", "MaxwellChain", "ModalResult", "SolverError", "SolverSettings",
    "StudyConfig", "WlfShift", "build_system", "builtin_database", "builtin_material", "cnm_modes",
    "complex_modulus", "effective_modal", "effective_modes", "generate_matrix", "mse_modes", "newton_solve",
    "real_modes", "run_case", "run_study", "summarize",
]
