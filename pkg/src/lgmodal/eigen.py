"""Real and complex modal solvers for the viscoelastic beam.

Three routes share the same assembled system:

* :func:`real_modes` solves the undamped pencil ``(K0, M)``;
* :func:`newton_solve` (CNM) converges one complex eigenpair of
  ``T(w) = K0 + Gfr(w) Kc - w^2 M`` with a bordered Newton iteration;
* :func:`mse_solve` iterates the real stiffness ``K0 + Re[Gfr(w)] Kc`` and
  estimates the loss factor by modal strain energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .fem_beam import AssembledSystem, BoundaryCondition
from .materials import MaxwellChain, frequency_part, frequency_part_derivative

RIGID_BODY_MODES = 3


class SolverError(RuntimeError):
    """A modal solver failed to produce a physical, converged result."""


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-5
    max_iter: int = 50
    modes: int = 3
    rigid_mode_cutoff: float = 1e-6  # relative to the elastic eigenvalue scale
    shift_hz: float = 1.0  # shift-invert target for the real eigensolver
    tracking_threshold: float = 0.7

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iter < 1 or self.modes < 1:
            raise ValueError("max_iter and modes must be at least 1")


@dataclass
class RealEigenpair:
    omega0_squared: float
    phi: np.ndarray  # unit Euclidean norm

    @property
    def omega0(self) -> float:
        return math.sqrt(self.omega0_squared)


@dataclass
class ComplexEigenpair:
    omega: complex
    phi: np.ndarray
    iterations: int
    residual: float  # ||T(w) phi|| / ||phi|| divided by the stopping scale

    @property
    def omega_squared(self) -> complex:
        return self.omega**2


@dataclass
class ModalResult:
    mode_index: int
    frequency: float
    loss_factor: float
    method: str
    iterations: int
    residual: float
    omega: complex = 0j


def freq_and_loss(omega_squared: complex) -> tuple[float, float]:
    """Frequency [Hz] and loss factor from a complex squared angular frequency."""
    re = float(np.real(omega_squared))
    if not re > 0:
        raise SolverError(f"non-physical mode: Re[w^2] = {re:g}")
    return math.sqrt(re) / (2.0 * math.pi), float(np.imag(omega_squared)) / re


def _normalize_real(phi: np.ndarray) -> np.ndarray:
    phi = phi / np.linalg.norm(phi)
    # deterministic sign: largest component positive
    k = int(np.argmax(np.abs(phi)))
    return phi if phi[k] >= 0 else -phi


def _start_vector(n: int) -> np.ndarray:
    return np.random.default_rng(12345).standard_normal(n)


def _lowest_pairs(K, M, count: int, settings: SolverSettings) -> tuple[np.ndarray, np.ndarray]:
    """``count`` eigenpairs of ``(K, M)`` closest to the small positive shift."""
    n = K.shape[0]
    sigma = (2.0 * math.pi * settings.shift_hz) ** 2
    count = min(count, n - 2)
    try:
        vals, vecs = spla.eigsh(K.tocsc(), k=count, M=M.tocsc(), sigma=sigma, which="LM",
                                v0=_start_vector(n), tol=0.0)
    except spla.ArpackNoConvergence as exc:
        raise SolverError("real eigensolver did not converge") from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def _drop_rigid(vals: np.ndarray, vecs: np.ndarray, settings: SolverSettings):
    ref = np.max(np.abs(vals))
    keep = vals > settings.rigid_mode_cutoff * ref
    return vals[keep], vecs[:, keep]


def _window(system: AssembledSystem, n_modes: int) -> int:
    extra = RIGID_BODY_MODES if system.bc is BoundaryCondition.FREE_FREE else 0
    return n_modes + extra


def real_modes(system: AssembledSystem, n_modes: int, settings: SolverSettings | None = None
               ) -> list[RealEigenpair]:
    """The ``n_modes`` lowest elastic eigenpairs of ``(K0, M)``, ascending."""
    settings = settings or SolverSettings()
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    vals, vecs = _lowest_pairs(system.K0, system.M, _window(system, n_modes), settings)
    vals, vecs = _drop_rigid(vals, vecs, settings)
    if len(vals) < n_modes:
        raise SolverError(f"only {len(vals)} elastic modes found, {n_modes} requested")
    return [RealEigenpair(float(vals[i]), _normalize_real(vecs[:, i])) for i in range(n_modes)]


def residual_scale(system: AssembledSystem, start: RealEigenpair) -> float:
    """Fixed per-mode force scale ``||K0 phi0|| / ||phi0||`` for the stopping test."""
    return float(np.linalg.norm(system.K0 @ start.phi) / np.linalg.norm(start.phi))


def newton_solve(system: AssembledSystem, chain: MaxwellChain, start: RealEigenpair,
                 settings: SolverSettings | None = None) -> ComplexEigenpair:
    """Bordered Newton iteration for one complex eigenpair.

    Each step solves::

        [ T(w_k)   T'(w_k) phi_k ] [ phi_{k+1} ]   [      0      ]
        [ phi0^T        0        ] [  dw       ] = [ phi0^T phi0 ]

    by block elimination: ``z = T^{-1} T' phi_k``, ``dw = -phi0.phi0 / phi0.z``,
    ``phi_{k+1} = -dw z``.
    """
    settings = settings or SolverSettings()
    K0, Kc, M = system.K0, system.Kc, system.M
    phi0 = start.phi
    norm0 = float(phi0 @ phi0)
    scale = residual_scale(system, start)
    omega = complex(start.omega0)
    phi = phi0.astype(complex)

    for it in range(settings.max_iter + 1):
        T = (K0 + frequency_part(chain, omega) * Kc - omega**2 * M).tocsc()
        res = np.linalg.norm(T @ phi) / np.linalg.norm(phi) / scale
        if res < settings.tol:
            if not (omega**2).real > 0:
                raise SolverError("Newton converged to a non-physical eigenvalue")
            return ComplexEigenpair(omega, phi, it, float(res))
        if it == settings.max_iter:
            break
        dT = frequency_part_derivative(chain, omega) * Kc - 2.0 * omega * M
        try:
            z = spla.splu(T).solve(dT @ phi)
        except RuntimeError as exc:
            raise SolverError("singular Newton matrix") from exc
        denom = phi0 @ z
        if denom == 0 or not np.isfinite(denom):
            raise SolverError("singular bordered Newton system")
        d_omega = -norm0 / denom
        phi = -d_omega * z
        omega = omega + d_omega
    raise SolverError(f"Newton did not converge in {settings.max_iter} iterations (residual {res:.3g})")


def track_mode(vecs: np.ndarray, reference: np.ndarray, threshold: float) -> tuple[int, float]:
    """Index of the column of ``vecs`` best correlated with ``reference``."""
    ref = reference / np.linalg.norm(reference)
    corr = np.abs(np.conj(vecs).T @ ref) / np.linalg.norm(vecs, axis=0)
    k = int(np.argmax(corr))
    if corr[k] < threshold:
        raise SolverError(f"mode tracking lost: best correlation {corr[k]:.3f} < {threshold}")
    return k, float(corr[k])


def mse_loss_factor(system: AssembledSystem, chain: MaxwellChain, omega: float, phi: np.ndarray) -> float:
    """Modal strain energy estimate Im-stiffness energy over real-stiffness energy."""
    gfr = frequency_part(chain, omega)
    kc_energy = float(phi @ (system.Kc @ phi))
    k_energy = float(phi @ (system.K0 @ phi)) + gfr.real * kc_energy
    return gfr.imag * kc_energy / k_energy


def mse_solve(system: AssembledSystem, chain: MaxwellChain, start: RealEigenpair,
              settings: SolverSettings | None = None) -> tuple[RealEigenpair, float, int]:
    """Iterated real approximation plus MSE loss factor.

    Returns the converged real pair, the loss factor and the iteration count.
    """
    settings = settings or SolverSettings()
    count = _window(system, settings.modes + 3)
    omega = start.omega0
    for it in range(1, settings.max_iter + 1):
        gfr = frequency_part(chain, omega)
        K_r = system.K0 + gfr.real * system.Kc
        vals, vecs = _lowest_pairs(K_r, system.M, count, settings)
        k, _ = track_mode(vecs, start.phi, settings.tracking_threshold)
        if not vals[k] > 0:
            raise SolverError("tracked MSE mode has a non-positive eigenvalue")
        new = math.sqrt(vals[k])
        phi = vecs[:, k]
        if phi @ start.phi < 0:
            phi = -phi
        converged = abs(new - omega) / abs(new) < settings.tol
        omega = new
        if converged:
            pair = RealEigenpair(float(vals[k]), phi / np.linalg.norm(phi))
            return pair, mse_loss_factor(system, chain, omega, pair.phi), it
    raise SolverError(f"MSE iteration did not converge in {settings.max_iter} iterations")


def cnm_modes(system: AssembledSystem, chain: MaxwellChain, settings: SolverSettings | None = None,
              starts: list[RealEigenpair] | None = None) -> list[ModalResult]:
    settings = settings or SolverSettings()
    starts = starts or real_modes(system, settings.modes, settings)
    out = []
    for i, s in enumerate(starts, start=1):
        pair = newton_solve(system, chain, s, settings)
        f, eta = freq_and_loss(pair.omega_squared)
        out.append(ModalResult(i, f, eta, "cnm", pair.iterations, pair.residual, pair.omega))
    return out


def mse_modes(system: AssembledSystem, chain: MaxwellChain, settings: SolverSettings | None = None,
              starts: list[RealEigenpair] | None = None) -> list[ModalResult]:
    settings = settings or SolverSettings()
    starts = starts or real_modes(system, settings.modes, settings)
    out = []
    for i, s in enumerate(starts, start=1):
        pair, eta, iters = mse_solve(system, chain, s, settings)
        f = pair.omega0 / (2.0 * math.pi)
        out.append(ModalResult(i, f, eta, "mse", iters, 0.0, complex(pair.omega0)))
    return out
