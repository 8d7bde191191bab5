import numpy as np
import pytest
import scipy.linalg as sl
import scipy.sparse.linalg as spla
from hypothesis import given, settings
from hypothesis import strategies as st

from lgmodal.fem_beam import (
    DOFS_PER_NODE,
    PHI1,
    PHI3,
    U1,
    U3,
    W,
    BoundaryCondition,
    CrossSection,
    apply_bc,
    assemble,
    build_system,
    compatibility_residuals,
    condensed_element,
    constrained_dofs,
    export_coo,
    layer_element_matrices,
    transformation_matrix,
)

from conftest import make_beam

SECTION = CrossSection.from_mm(10.0, 0.76, 10.0)


class TestLayerElement:
    def test_rigid_modes_in_kernel(self):
        K, _ = layer_element_matrices(72e9, 29.5e9, 2500.0, 0.02, 0.1, 0.05)
        axial = np.array([1, 0, 0, 1, 0, 0], float)
        lift = np.array([0, 1, 0, 0, 1, 0], float)
        Le = 0.05
        # rigid rotation: w grows with slope 1, phi = -w' keeps the shear strain at zero
        rot = np.array([0, 0, -1, 0, Le, -1], float)
        for v in (axial, lift, rot):
            np.testing.assert_allclose(K @ v, 0.0, atol=1e-6 * np.abs(K).max())

    def test_mass_conservation(self):
        rho, h, b, Le = 2500.0, 0.02, 0.1, 0.05
        _, M = layer_element_matrices(72e9, 29.5e9, rho, h, b, Le)
        for dof in (0, 1):
            idx = [dof, dof + 3]
            assert M[np.ix_(idx, idx)].sum() == pytest.approx(rho * h * b * Le)

    def test_cantilever_tip_deflection(self):
        E, nu, h, b, L, P = 72e9, 0.22, 0.02, 0.1, 1.0, 100.0
        G = E / (2 * (1 + nu))
        ks = 5.0 / 6.0
        n = 50
        Le = L / n
        ke, _ = layer_element_matrices(E, G, 2500.0, h, b, Le, ks)
        K = np.zeros((3 * (n + 1), 3 * (n + 1)))
        for e in range(n):
            s = slice(3 * e, 3 * e + 6)
            K[s, s] += ke
        F = np.zeros(K.shape[0])
        F[-2] = P
        free = np.arange(3, K.shape[0])  # clamp node 0
        u = np.linalg.solve(K[np.ix_(free, free)], F[free])
        I = b * h**3 / 12
        exact = P * L**3 / (3 * E * I) + P * L / (ks * G * b * h)
        assert u[-2] == pytest.approx(exact, rel=0.05)


class TestTransformation:
    def test_interlayer_axial_row(self):
        T = transformation_matrix(SECTION)
        h1, h3 = SECTION.h1, SECTION.h3
        # u2 at the left node from (u1, phi1, u3, phi3)
        np.testing.assert_allclose(T[6, [U1, PHI1, U3, PHI3]], [0.5, h1 / 4, 0.5, -h3 / 4])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-1.0, 1.0), min_size=10, max_size=10),
           st.tuples(st.floats(1.0, 20.0), st.floats(0.3, 3.0), st.floats(1.0, 20.0)))
    def test_random_master_vector_is_compatible(self, master, hs):
        section = CrossSection.from_mm(*hs)
        full = transformation_matrix(section) @ np.array(master)
        assert np.max(np.abs(compatibility_residuals(section, full))) < 1e-14 * max(1.0, np.abs(full).max())

    def test_vertical_compatibility(self):
        master = np.zeros(10)
        master[[W, W + 5]] = [0.3, -0.7]
        full = transformation_matrix(SECTION) @ master
        np.testing.assert_array_equal(full[[7, 10]], [0.3, -0.7])


class TestCondensedElement:
    def test_mass_symmetric_psd(self, pvb_beam):
        _, M = condensed_element(pvb_beam, 0.005)
        np.testing.assert_allclose(M, M.T, atol=1e-12 * np.abs(M).max())
        assert np.linalg.eigvalsh(M).min() >= -1e-12 * np.abs(M).max()

    @pytest.mark.parametrize("unit", [False, True])
    def test_rigid_translation(self, pvb_beam, unit):
        K, _ = condensed_element(pvb_beam, 0.005, unit_interlayer_shear=unit)
        v = np.zeros(10)
        v[[U1, U3, U1 + 5, U3 + 5]] = 1.0
        np.testing.assert_allclose(K @ v, 0.0, atol=1e-9 * np.abs(K).max())
        v = np.zeros(10)
        v[[W, W + 5]] = 1.0
        np.testing.assert_allclose(K @ v, 0.0, atol=1e-9 * np.abs(K).max())


class TestAssembly:
    def test_sizes(self, pvb_beam):
        sys = assemble(pvb_beam, 200)
        assert sys.dof_count == 1005 == 5 * 201
        assert sys.elements == 200

    def test_matrix_properties(self, pvb_beam):
        sys = assemble(pvb_beam, 6)
        M, K0, Kc = (a.toarray() for a in (sys.M, sys.K0, sys.Kc))
        for A in (M, K0, Kc):
            np.testing.assert_allclose(A, A.T, atol=1e-12 * np.abs(A).max())
        assert np.linalg.eigvalsh(M).min() > 0
        assert np.linalg.eigvalsh(Kc).min() > -1e-9 * np.abs(Kc).max()

    def test_total_mass(self, pvb_beam):
        sys = assemble(pvb_beam, 20)
        ones = np.zeros(sys.n_full)
        ones[W::DOFS_PER_NODE] = 1.0
        s = pvb_beam.section
        expected = s.b * pvb_beam.length * pvb_beam.mass_per_area
        assert ones @ (sys.M @ ones) == pytest.approx(expected, rel=1e-12)

    def test_stiffness_split(self, pvb_beam):
        sys = assemble(pvb_beam, 4)
        np.testing.assert_array_equal(sys.stiffness(0.0).toarray(), sys.K0.toarray())
        g = 1e5 - 3e4j
        np.testing.assert_allclose(sys.stiffness(g).toarray(), (sys.Kg + (sys.g0 + g) * sys.Kc).toarray())

    def test_static_limit_matches_long_term_assembly(self, pvb_beam):
        from conftest import elastic_interlayer
        from lgmodal.materials import frequency_part

        sys = assemble(pvb_beam, 10)
        chain = pvb_beam.chain
        relaxed = make_beam(material=elastic_interlayer(chain.long_term_modulus, density=1100.0))
        direct = assemble(relaxed, 10).K0.toarray()
        k_zero = sys.stiffness(frequency_part(chain, 0.0)).toarray()
        np.testing.assert_allclose(k_zero.real, direct, rtol=1e-10, atol=1e-10 * np.abs(direct).max())

    def test_too_few_elements(self, pvb_beam):
        with pytest.raises(ValueError):
            assemble(pvb_beam, 1)


class TestBoundaryConditions:
    def test_parse(self):
        assert BoundaryCondition.parse("S-S") is BoundaryCondition.SIMPLY_SUPPORTED
        assert BoundaryCondition.parse("free_free").label == "F-F"
        with pytest.raises(ValueError):
            BoundaryCondition.parse("pinned")

    def test_clamped_size(self):
        beam = make_beam("cc")
        assert build_system(beam, 10).dof_count == 5 * 11 - 10

    def test_simply_supported_dofs(self):
        fixed = constrained_dofs("ss", 11)
        np.testing.assert_array_equal(fixed, [U1, W, 50 + W])

    def test_free_free_three_rigid_modes(self):
        sys = build_system(make_beam("ff"), 12)
        vals = sl.eigh(sys.K0.toarray(), sys.M.toarray(), eigvals_only=True)
        elastic = vals[vals > 1e-6 * vals.max()]
        assert np.sum(np.abs(vals) < 1e-6 * elastic[0]) == 3

    def test_simply_supported_lift_not_in_kernel(self):
        sys = build_system(make_beam("ss"), 10)
        lift = np.zeros(sys.n_full)
        lift[W::DOFS_PER_NODE] = 1.0
        v = lift[sys.free]
        assert np.linalg.norm(sys.K0 @ v) > 1e-3 * spla.norm(sys.K0)

    def test_apply_bc_keeps_full_numbering(self):
        sys = apply_bc(assemble(make_beam("ss"), 5), "ss")
        vec = np.arange(sys.dof_count, dtype=float) + 1
        full = sys.expand(vec)
        assert full.shape == (30,)
        assert np.all(full[sys.constrained] == 0)


def test_export_coo(tmp_path, small_system):
    path = tmp_path / "sys.txt"
    export_coo(small_system, path)
    lines = path.read_text().splitlines()
    assert lines[0] == f"# n = {small_system.dof_count}"
    assert sum(1 for l in lines if l.startswith("K0 ")) == small_system.K0.nnz
