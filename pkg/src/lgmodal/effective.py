"""Closed-form modal estimates through a complex effective thickness.

The laminate is replaced by a monolithic beam of thickness ``h_ef(w)``,
with ``w^2 = beta^4 E1 h_ef^3 / (12 m)``, iterated to a fixed point because
the interlayer modulus depends on ``w``.

Two thickness models are provided.  ``det`` is the dynamic effective
thickness built on the Ross-Kerwin-Ungar flexural stiffness; ``eet`` is the
enhanced (energy-based) effective thickness with the static deflection
shape coefficient replaced by the modal one.  Both use the geometric factor
``12 h1 h3 d^2 / (h1 + h3)`` with ``d = h2 + (h1 + h3)/2``; the squared
distance is what makes the factor a thickness cubed.
"""

from __future__ import annotations

import cmath
import math

from .eigen import ModalResult, SolverError, SolverSettings, freq_and_loss
from .fem_beam import BoundaryCondition, CrossSection, LaminatedBeam
from .materials import complex_modulus

# mode -> nondimensional value, scaled by 1/l (wavenumber) or 1/l^2 (shape coefficient)
WAVENUMBERS = {
    BoundaryCondition.SIMPLY_SUPPORTED: (math.pi, 2 * math.pi, 3 * math.pi),
    BoundaryCondition.CLAMPED_CLAMPED: (4.7300, 7.8532, 10.996),
    BoundaryCondition.FREE_FREE: (4.7300, 7.8532, 10.996),
}
SHAPE_COEFFICIENTS = {
    BoundaryCondition.SIMPLY_SUPPORTED: (math.pi**2, (2 * math.pi) ** 2, (3 * math.pi) ** 2),
    BoundaryCondition.CLAMPED_CLAMPED: (40.7, 82.6, 148.0),
    BoundaryCondition.FREE_FREE: (10.1, 34.9, 78.2),
}
METHODS = ("det", "eet")


def _table_value(table, bc, mode: int) -> float:
    bc = BoundaryCondition.parse(bc)
    if mode not in (1, 2, 3):
        raise ValueError(f"tabulated only for modes 1..3, got {mode}")
    return table[bc][mode - 1]


def wavenumber(bc, mode: int, length: float) -> float:
    return _table_value(WAVENUMBERS, bc, mode) / length


def shape_coefficient(bc, mode: int, length: float) -> float:
    return _table_value(SHAPE_COEFFICIENTS, bc, mode) / length**2


def layered_cube(section: CrossSection) -> float:
    """h1^3 + h3^3: thickness cubed of the two glass plies acting independently."""
    return section.h1**3 + section.h3**3


def coupling_cube(section: CrossSection) -> float:
    """12 I_s / b = 12 h1 h3 d^2 / (h1 + h3): the full-composite-action increment."""
    h1, h2, h3 = section.h1, section.h2, section.h3
    d = 0.5 * h1 + h2 + 0.5 * h3
    return 12.0 * h1 * h3 * d**2 / (h1 + h3)


def monolithic_cube(section: CrossSection) -> float:
    return layered_cube(section) + coupling_cube(section)


def cbrt(z: complex) -> complex:
    """Principal complex cube root."""
    z = complex(z)
    if z == 0:
        return 0j
    r, arg = cmath.polar(z)
    return cmath.rect(r ** (1.0 / 3.0), arg / 3.0)


def det_thickness(section: CrossSection, E1: float, gstar: complex, beta: float) -> complex:
    """Dynamic effective thickness for interlayer modulus ``gstar``.

    Shear parameter ``g = G*/(E1 h3 h2 beta^2)``; the term
    ``(1 + h1/(g (h1+h3)))^-1`` is evaluated as ``g(h1+h3)/(g(h1+h3)+h1)`` so
    that ``g = 0`` is allowed.
    """
    h1, h2, h3 = section.h1, section.h2, section.h3
    if h2 == 0 or beta == 0:
        raise ValueError("interlayer thickness and wavenumber must be non-zero")
    h0 = layered_cube(section)
    Y = coupling_cube(section) / h0
    g = complex(gstar) / (E1 * h3 * h2 * beta**2)
    coupling = g * (h1 + h3) / (g * (h1 + h3) + h1)
    return cbrt(h0 * (1.0 + Y * coupling))


def shear_cohesion(section: CrossSection, E1: float, gstar: complex, psi: float) -> complex:
    """Coefficient zeta in [0, 1] (complex for a complex modulus)."""
    s = section
    b = s.b
    A1, A3 = b * s.h1, b * s.h3
    I1, I3 = b * s.h1**3 / 12.0, b * s.h3**3 / 12.0
    d = s.h2 + 0.5 * (s.h1 + s.h3)
    I_tot = I1 + I3 + A1 * A3 / (A1 + A3) * d**2
    mu = complex(gstar) * b / (E1 * s.h2)
    # 1 / (1 + c/mu) written as mu / (mu + c) so that mu = 0 is allowed
    c = (I1 + I3) / I_tot * A1 * A3 / (A1 + A3) * psi
    den = mu + c
    if den == 0:
        raise ValueError("shear cohesion coefficient is singular")
    return mu / den


def eet_thickness(section: CrossSection, E1: float, gstar: complex, psi: float) -> complex:
    """Enhanced effective thickness adapted to modal analysis."""
    zeta = shear_cohesion(section, E1, gstar, psi)
    h_lay = layered_cube(section)
    h_mono = monolithic_cube(section)
    return cbrt(1.0 / (zeta / h_mono + (1.0 - zeta) / h_lay))


def _check_identical_glass(beam: LaminatedBeam) -> None:
    g1, g3 = beam.glass1, beam.glass3
    if (g1.young_modulus, g1.poisson_ratio, g1.density) != (g3.young_modulus, g3.poisson_ratio, g3.density):
        raise ValueError("effective thickness methods require identical glass plies")


def thickness_function(beam: LaminatedBeam, method: str, mode: int):
    """``h_ef(gstar)`` for the given beam, method and mode."""
    E1 = beam.glass1.young_modulus
    s = beam.section
    if method == "det":
        beta = wavenumber(beam.bc, mode, beam.length)
        return lambda gstar: det_thickness(s, E1, gstar, beta)
    if method == "eet":
        psi = shape_coefficient(beam.bc, mode, beam.length)
        return lambda gstar: eet_thickness(s, E1, gstar, psi)
    raise ValueError(f"unknown effective thickness method {method!r}")


def effective_modal(beam: LaminatedBeam, method: str, mode: int,
                    settings: SolverSettings | None = None) -> ModalResult:
    """Fixed-point frequency iteration with a complex effective thickness."""
    settings = settings or SolverSettings()
    _check_identical_glass(beam)
    method = method.lower()
    h_of = thickness_function(beam, method, mode)
    chain = beam.chain
    beta = wavenumber(beam.bc, mode, beam.length)
    factor = beta**4 * beam.glass1.young_modulus / (12.0 * beam.mass_per_area)

    omega = cmath.sqrt(factor * h_of(chain.long_term_modulus) ** 3)
    for it in range(1, settings.max_iter + 1):
        new = cmath.sqrt(factor * h_of(complex_modulus(chain, omega)) ** 3)
        change = abs(new - omega) / abs(new)
        omega = new
        if change < settings.tol:
            f, eta = freq_and_loss(omega**2)
            return ModalResult(mode, f, eta, method, it, change, omega)
    raise SolverError(f"{method} iteration did not converge in {settings.max_iter} iterations")


def effective_thickness_at(beam: LaminatedBeam, method: str, mode: int, omega: complex) -> complex:
    """Effective thickness at a given (complex) angular frequency."""
    return thickness_function(beam, method.lower(), mode)(complex_modulus(beam.chain, omega))


def effective_modes(beam: LaminatedBeam, method: str, settings: SolverSettings | None = None
                    ) -> list[ModalResult]:
    settings = settings or SolverSettings()
    return [effective_modal(beam, method, m, settings) for m in range(1, settings.modes + 1)]


__all__ = [
    "WAVENUMBERS", "SHAPE_COEFFICIENTS", "METHODS", "wavenumber", "shape_coefficient",
    "det_thickness", "eet_thickness", "shear_cohesion", "effective_modal", "effective_modes",
    "layered_cube", "coupling_cube", "monolithic_cube", "cbrt", "effective_thickness_at",
]
