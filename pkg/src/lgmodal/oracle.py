"""Independent reference solutions used for verification.

Nothing here shares a solution path with :mod:`lgmodal.eigen`: the analytic
monolith is closed form, and the dense solver uses full-spectrum complex
factorizations with a plain fixed point in the frequency instead of the
bordered Newton step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sl

from .eigen import ComplexEigenpair, SolverError, SolverSettings
from .fem_beam import AssembledSystem, BoundaryCondition
from .effective import WAVENUMBERS
from .materials import MaxwellChain, frequency_part


@dataclass(frozen=True)
class MonolithSpec:
    E: float
    rho: float
    h: float
    b: float
    length: float
    bc: BoundaryCondition

    def __post_init__(self) -> None:
        if min(self.E, self.rho, self.h, self.b, self.length) <= 0:
            raise ValueError("monolith parameters must be positive")
        object.__setattr__(self, "bc", BoundaryCondition.parse(self.bc))


def euler_bernoulli_frequency(spec: MonolithSpec, mode: int) -> float:
    """Natural frequency [Hz] of a homogeneous Euler-Bernoulli beam."""
    beta = WAVENUMBERS[spec.bc][mode - 1] / spec.length
    return beta**2 * math.sqrt(spec.E * spec.h**2 / (12.0 * spec.rho)) / (2.0 * math.pi)


def _dense_real_start(K0: np.ndarray, M: np.ndarray, mode: int, rigid: int):
    vals, vecs = sl.eigh(K0, M)
    vals, vecs = vals[rigid:], vecs[:, rigid:]
    return vals[mode - 1], vecs[:, mode - 1]


def dense_fixed_point_eig(system: AssembledSystem, chain: MaxwellChain, mode: int,
                          settings: SolverSettings | None = None, max_dofs: int = 2000) -> ComplexEigenpair:
    """Complex eigenpair by repeated dense eigensolves of ``(K0 + Gfr(w_k) Kc, M)``.

    The target eigenvalue is picked by shape correlation with the previous
    iterate; ``w_{k+1}`` is the square root of the tracked eigenvalue.  The
    loop stops once the scaled residual of ``T(w_{k+1})`` drops below ``tol``.
    """
    settings = settings or SolverSettings()
    n = system.dof_count
    if n > max_dofs:
        raise ValueError(f"dense oracle limited to {max_dofs} DOFs, system has {n}")
    K0 = system.K0.toarray()
    Kc = system.Kc.toarray()
    M = system.M.toarray()
    rigid = 3 if system.bc is BoundaryCondition.FREE_FREE else 0
    lam0, phi0 = _dense_real_start(K0, M, mode, rigid)
    scale = np.linalg.norm(K0 @ phi0) / np.linalg.norm(phi0)

    omega = complex(math.sqrt(lam0))
    ref = phi0.astype(complex)
    for it in range(1, settings.max_iter + 1):
        A = K0 + frequency_part(chain, omega) * Kc
        vals, vecs = sl.eig(A, M)
        corr = np.abs(vecs.conj().T @ ref) / (np.linalg.norm(vecs, axis=0) * np.linalg.norm(ref))
        k = int(np.argmax(corr))
        if corr[k] < settings.tracking_threshold:
            raise SolverError(f"oracle lost track of mode {mode} (correlation {corr[k]:.3f})")
        new = np.sqrt(complex(vals[k]))
        if new.real < 0:
            new = -new
        ref = vecs[:, k]
        omega = new
        # match the Newton normalization phi0^T phi = phi0^T phi0
        phi = ref * (phi0 @ phi0) / (phi0 @ ref)
        T = K0 + frequency_part(chain, omega) * Kc - omega**2 * M
        res = np.linalg.norm(T @ phi) / np.linalg.norm(phi) / scale
        if res < settings.tol:
            return ComplexEigenpair(omega, phi, it, float(res))
    raise SolverError(f"oracle fixed point did not converge in {settings.max_iter} iterations")
