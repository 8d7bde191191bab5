"""Three-layer laminated beam finite elements.

Each layer is a two-node Timoshenko beam (axial displacement ``u``,
deflection ``w``, rotation ``phi``) with linear shape functions.  Axial and
bending terms are integrated exactly, the shear term with one point.  Perfect
adhesion between layers removes eight of the eighteen element DOFs, leaving
five per node::

    (u1, w, phi1, u3, phi3)

The global stiffness is split as ``K(w) = K0 + Gfr(w) * Kc`` where ``Kc`` is
the interlayer assembled with unit shear modulus and ``K0`` carries the glass
plus the interlayer at its instantaneous modulus.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .materials import GlassMaterial, InterlayerMaterial, MaxwellChain

DOFS_PER_NODE = 5
# node-local DOF indices
U1, W, PHI1, U3, PHI3 = range(DOFS_PER_NODE)

GLASS_SHEAR_FACTOR = 5.0 / 6.0
INTERLAYER_SHEAR_FACTOR = 1.0


class BoundaryCondition(str, enum.Enum):
    SIMPLY_SUPPORTED = "ss"
    CLAMPED_CLAMPED = "cc"
    FREE_FREE = "ff"

    @classmethod
    def parse(cls, value: "str | BoundaryCondition") -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "").replace("_", "")
        aliases = {"ss": cls.SIMPLY_SUPPORTED, "simplysupported": cls.SIMPLY_SUPPORTED,
                   "cc": cls.CLAMPED_CLAMPED, "clampedclamped": cls.CLAMPED_CLAMPED,
                   "ff": cls.FREE_FREE, "freefree": cls.FREE_FREE}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown boundary condition {value!r}") from None

    @property
    def label(self) -> str:
        return {"ss": "S-S", "cc": "C-C", "ff": "F-F"}[self.value]


@dataclass(frozen=True)
class CrossSection:
    h1: float
    h2: float
    h3: float
    b: float

    def __post_init__(self) -> None:
        if min(self.h1, self.h2, self.h3, self.b) <= 0:
            raise ValueError("layer thicknesses and width must be positive")

    @classmethod
    def from_mm(cls, h1: float, h2: float, h3: float, b_m: float = 0.1) -> "CrossSection":
        return cls(h1 * 1e-3, h2 * 1e-3, h3 * 1e-3, b_m)

    @property
    def total_thickness(self) -> float:
        return self.h1 + self.h2 + self.h3

    @property
    def label(self) -> str:
        return "/".join(f"{h * 1e3:g}" for h in (self.h1, self.h2, self.h3))


@dataclass(frozen=True)
class LaminatedBeam:
    length: float
    section: CrossSection
    glass1: GlassMaterial
    glass3: GlassMaterial
    interlayer: InterlayerMaterial
    bc: BoundaryCondition
    temperature: float | None = None

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise ValueError("beam length must be positive")
        object.__setattr__(self, "bc", BoundaryCondition.parse(self.bc))
        # raises on temperatures the interlayer data cannot represent
        self.interlayer.chain_at(self.temperature)

    @property
    def chain(self) -> MaxwellChain:
        """Interlayer chain at the beam temperature."""
        return self.interlayer.chain_at(self.temperature)

    @property
    def mass_per_area(self) -> float:
        s = self.section
        return self.glass1.density * s.h1 + self.interlayer.density * s.h2 + self.glass3.density * s.h3


# ---------------------------------------------------------------------------
# Element level
# ---------------------------------------------------------------------------


def layer_element_matrices(E, G, rho, h, b, Le, shear_factor=GLASS_SHEAR_FACTOR):
    """Stiffness and consistent mass of one Timoshenko layer element.

    DOF order is ``(uL, wL, phiL, uR, wR, phiR)`` with ``u(z) = u + z phi``
    and shear strain ``w' + phi``.  Returns ``(K, M)``, both 6x6.
    """
    A = b * h
    I = b * h**3 / 12.0
    K = np.zeros((6, 6))
    ax = E * A / Le
    K[np.ix_([0, 3], [0, 3])] += ax * np.array([[1.0, -1.0], [-1.0, 1.0]])
    bend = E * I / Le
    K[np.ix_([2, 5], [2, 5])] += bend * np.array([[1.0, -1.0], [-1.0, 1.0]])
    # one-point shear at mid-element
    Bs = np.array([-1.0 / Le, 0.5, 1.0 / Le, 0.5])
    idx = [1, 2, 4, 5]
    K[np.ix_(idx, idx)] += shear_factor * G * A * Le * np.outer(Bs, Bs)

    consistent = np.array([[2.0, 1.0], [1.0, 2.0]]) * Le / 6.0
    M = np.zeros((6, 6))
    for i, m in ((0, rho * A), (1, rho * A), (2, rho * I)):
        M[np.ix_([i, i + 3], [i, i + 3])] = m * consistent
    return K, M


def transformation_matrix(section: CrossSection) -> np.ndarray:
    """18x10 map from master DOFs to the full three-layer element vector.

    Rows follow ``(u1L w1L phi1L u1R w1R phi1R, u2L .. phi2R, u3L .. phi3R)``;
    columns ``(u1L w1L phi1L u3L phi3L, u1R w1R phi1R u3R phi3R)``.
    """
    h1, h2, h3 = section.h1, section.h2, section.h3
    T = np.zeros((18, 10))
    for side in (0, 1):
        r = 3 * side  # row offset inside a layer block
        c = 5 * side  # column offset of the node's master DOFs
        u1, w, p1, u3, p3 = (c + k for k in range(5))
        # layer 1
        T[0 + r, u1] = 1.0
        T[1 + r, w] = 1.0
        T[2 + r, p1] = 1.0
        # layer 2: u2 and phi2 from the two interface conditions
        T[6 + r, [u1, p1, u3, p3]] = [0.5, h1 / 4.0, 0.5, -h3 / 4.0]
        T[7 + r, w] = 1.0
        T[8 + r, [u1, p1, u3, p3]] = [-1.0 / h2, -h1 / (2.0 * h2), 1.0 / h2, -h3 / (2.0 * h2)]
        # layer 3
        T[12 + r, u3] = 1.0
        T[13 + r, w] = 1.0
        T[14 + r, p3] = 1.0
    return T


def compatibility_residuals(section: CrossSection, full: np.ndarray) -> np.ndarray:
    """The eight interface conditions evaluated on an 18-vector (zero when bonded)."""
    h1, h2, h3 = section.h1, section.h2, section.h3
    res = []
    for r in (0, 3):
        u1, w1, p1 = full[0 + r: 3 + r]
        u2, w2, p2 = full[6 + r: 9 + r]
        u3, w3, p3 = full[12 + r: 15 + r]
        res += [
            (u1 + h1 / 2 * p1) - (u2 - h2 / 2 * p2),
            (u2 + h2 / 2 * p2) - (u3 - h3 / 2 * p3),
            w1 - w2,
            w2 - w3,
        ]
    return np.array(res)


def _block_diag(*blocks: np.ndarray) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    i = 0
    for blk in blocks:
        k = blk.shape[0]
        out[i:i + k, i:i + k] = blk
        i += k
    return out


def condensed_element(beam: LaminatedBeam, Le: float, unit_interlayer_shear: bool = False,
                      glass_shear_factor: float = GLASS_SHEAR_FACTOR,
                      interlayer_shear_factor: float = INTERLAYER_SHEAR_FACTOR):
    """Condensed 10x10 element matrices ``(K, M)``.

    With ``unit_interlayer_shear`` the glass layers are dropped from K and the
    interlayer is built with ``G = 1`` (and ``E = 2(1+nu) G``), giving the
    element contribution to ``Kc``.  Otherwise K is the glass part only;
    :func:`assemble` adds ``G0 * Kc``.
    """
    s = beam.section
    T = transformation_matrix(s)
    g1, g3, il = beam.glass1, beam.glass3, beam.interlayer
    k1, m1 = layer_element_matrices(g1.young_modulus, g1.shear_modulus, g1.density, s.h1, s.b, Le,
                                    glass_shear_factor)
    k3, m3 = layer_element_matrices(g3.young_modulus, g3.shear_modulus, g3.density, s.h3, s.b, Le,
                                    glass_shear_factor)
    k2, m2 = layer_element_matrices(il.young_from_shear(1.0), 1.0, il.density, s.h2, s.b, Le,
                                    interlayer_shear_factor)
    zero = np.zeros((6, 6))
    if unit_interlayer_shear:
        kfull = _block_diag(zero, k2, zero)
    else:
        kfull = _block_diag(k1, zero, k3)
    mfull = _block_diag(m1, m2, m3)
    return T.T @ kfull @ T, T.T @ mfull @ T


# ---------------------------------------------------------------------------
# Global assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssembledSystem:
    """Global matrices of a laminated beam, optionally with constraints removed.

    ``K0 = Kg + g0 * Kc``.  Matrices are CSR and symmetric.  ``free`` holds the
    unconstrained DOF indices into the full ``5 * (elements + 1)`` numbering.
    """

    M: sp.csr_matrix
    K0: sp.csr_matrix
    Kc: sp.csr_matrix
    Kg: sp.csr_matrix
    g0: float
    nodes: np.ndarray
    n_full: int
    free: np.ndarray
    constrained: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    bc: BoundaryCondition | None = None

    @property
    def dof_count(self) -> int:
        return self.M.shape[0]

    @property
    def elements(self) -> int:
        return len(self.nodes) - 1

    def stiffness(self, gfr: complex) -> sp.csr_matrix:
        """K(w) for a given value of the frequency-dependent modulus part."""
        return self.K0 + gfr * self.Kc

    def expand(self, vec: np.ndarray) -> np.ndarray:
        """Scatter a reduced vector back to the full DOF numbering."""
        out = np.zeros(self.n_full, dtype=np.result_type(vec))
        out[self.free] = vec
        return out


def _assemble_uniform(ke: np.ndarray, n_el: int) -> sp.csr_matrix:
    n = DOFS_PER_NODE * (n_el + 1)
    dofs = DOFS_PER_NODE * np.arange(n_el)[:, None] + np.arange(2 * DOFS_PER_NODE)[None, :]
    rows = np.repeat(dofs, 2 * DOFS_PER_NODE, axis=1).ravel()
    cols = np.tile(dofs, (1, 2 * DOFS_PER_NODE)).ravel()
    vals = np.tile(ke.ravel(), n_el)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    return mat


def _symmetrize(a: sp.csr_matrix) -> sp.csr_matrix:
    return ((a + a.T) * 0.5).tocsr()


def assemble(beam: LaminatedBeam, elements_per_layer: int,
             glass_shear_factor: float = GLASS_SHEAR_FACTOR,
             interlayer_shear_factor: float = INTERLAYER_SHEAR_FACTOR) -> AssembledSystem:
    """Assemble M, K0 and Kc on a uniform mesh (no constraints applied)."""
    if elements_per_layer < 2:
        raise ValueError("need at least two elements per layer")
    Le = beam.length / elements_per_layer
    kg_e, m_e = condensed_element(beam, Le, False, glass_shear_factor, interlayer_shear_factor)
    kc_e, _ = condensed_element(beam, Le, True, glass_shear_factor, interlayer_shear_factor)
    M = _symmetrize(_assemble_uniform(m_e, elements_per_layer))
    Kg = _symmetrize(_assemble_uniform(kg_e, elements_per_layer))
    Kc = _symmetrize(_assemble_uniform(kc_e, elements_per_layer))
    g0 = beam.chain.instantaneous
    K0 = (Kg + g0 * Kc).tocsr()
    n = M.shape[0]
    return AssembledSystem(M=M, K0=K0, Kc=Kc, Kg=Kg, g0=g0,
                           nodes=np.linspace(0.0, beam.length, elements_per_layer + 1),
                           n_full=n, free=np.arange(n))


def constrained_dofs(bc: BoundaryCondition, n_nodes: int) -> np.ndarray:
    bc = BoundaryCondition.parse(bc)
    last = n_nodes - 1
    if bc is BoundaryCondition.SIMPLY_SUPPORTED:
        # one axial DOF only: fixing u1 and u3 together would also fix the end rotation
        fixed = [(0, W), (last, W), (0, U1)]
    elif bc is BoundaryCondition.CLAMPED_CLAMPED:
        fixed = [(node, k) for node in (0, last) for k in range(DOFS_PER_NODE)]
    else:
        fixed = []
    return np.array(sorted(DOFS_PER_NODE * node + k for node, k in fixed), dtype=int)


def apply_bc(system: AssembledSystem, bc: BoundaryCondition | str) -> AssembledSystem:
    """Remove constrained rows/columns; returns a new, smaller system."""
    bc = BoundaryCondition.parse(bc)
    fixed = constrained_dofs(bc, len(system.nodes))
    free = np.setdiff1d(np.arange(system.n_full), fixed)

    def cut(a):
        return a[free][:, free].tocsr()

    return AssembledSystem(M=cut(system.M), K0=cut(system.K0), Kc=cut(system.Kc), Kg=cut(system.Kg),
                           g0=system.g0, nodes=system.nodes, n_full=system.n_full,
                           free=free, constrained=fixed, bc=bc)


def build_system(beam: LaminatedBeam, elements_per_layer: int, **kwargs) -> AssembledSystem:
    """Assemble and constrain in one go using the beam's own boundary condition."""
    return apply_bc(assemble(beam, elements_per_layer, **kwargs), beam.bc)


def export_coo(system: AssembledSystem, path: str | Path) -> None:
    """Write M, K0 and Kc as ``name row col value`` lines (debugging aid)."""
    with open(path, "w") as fh:
        fh.write(f"# n = {system.dof_count}\n")
        for name in ("M", "K0", "Kc"):
            coo = getattr(system, name).tocoo()
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{name} {r} {c} {v:.17g}\n")
