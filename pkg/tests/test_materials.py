import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lgmodal.materials import (
    BUILTIN_NAMES,
    GPA,
    MPA,
    GlassMaterial,
    InterlayerMaterial,
    MaterialDatabase,
    MaterialError,
    MaxwellChain,
    MaxwellUnit,
    WlfShift,
    builtin_material,
    builtin_records,
    complex_modulus,
    frequency_part,
    frequency_part_derivative,
    instantaneous_modulus,
    material_from_record,
    material_to_record,
    relaxation_modulus,
    shift_factor,
    shifted_chain,
)

INTERLAYERS = ("SGP_M", "TPU_M", "PVB_M", "PVB_S", "PVB_A")
mp.mp.dps = 40


def mp_complex_modulus(chain: MaxwellChain, omega: float):
    """Term-by-term evaluation in 40-digit arithmetic."""
    w = mp.mpf(omega)
    total = mp.mpf(chain.long_term_modulus)
    for u in chain.units:
        x = w * mp.mpf(u.relaxation_time)
        total += mp.mpf(u.shear_modulus) * (1j * x) / (1 + 1j * x)
    return complex(total)


class TestChainConstruction:
    def test_unit_rejects_nonpositive(self):
        with pytest.raises(MaterialError):
            MaxwellUnit(0.0, 1.0)
        with pytest.raises(MaterialError):
            MaxwellUnit(1.0, -1.0)

    def test_empty_chain_instantaneous_is_long_term(self):
        assert instantaneous_modulus(MaxwellChain(5.0, ())) == 5.0

    def test_zero_instantaneous_rejected(self):
        with pytest.raises(MaterialError):
            MaxwellChain(0.0, ())

    def test_sgp_instantaneous_matches_tabulated_total(self):
        # 274.1 MPa is the tabulated instantaneous modulus; ratios are given to 5 digits
        g0 = builtin_material("SGP_M").chain.instantaneous
        assert g0 == pytest.approx(274.1 * MPA, rel=1e-3)

    @pytest.mark.parametrize("name, g0_mpa", [("TPU_M", 94.6), ("PVB_M", 213.6)])
    def test_other_m_chains_total(self, name, g0_mpa):
        assert builtin_material(name).chain.instantaneous == pytest.approx(g0_mpa * MPA, rel=1e-2)

    def test_pvb_s_total_is_plain_sum(self):
        table = [51.25, 31.75, 12.80, 32.90, 39.90, 37.80, 21.94, 25.01, 27.58, 11.98,
                 6.345, 2.692, 8.718, 0.6969]
        assert builtin_material("PVB_S").chain.instantaneous == pytest.approx(math.fsum(table) * MPA,
                                                                               rel=1e-14)


class TestBuiltins:
    def test_names(self):
        assert set(BUILTIN_NAMES) == {"glass", *INTERLAYERS}

    def test_glass(self):
        g = builtin_material("glass")
        assert isinstance(g, GlassMaterial)
        assert (g.young_modulus, g.poisson_ratio, g.density) == (72 * GPA, 0.22, 2500.0)

    def test_sgp(self):
        m = builtin_material("SGP_M")
        assert (m.density, m.poisson_ratio) == (950.0, 0.49)
        assert m.chain.long_term_modulus == pytest.approx(1.8 * MPA)
        assert len(m.chain.units) == 12
        np.testing.assert_allclose(m.chain.times, 10.0 ** np.arange(-6, 6))

    def test_pvb_a_first_unit(self):
        m = builtin_material("PVB_A")
        assert len(m.chain.units) == 10
        assert m.chain.units[0].shear_modulus == pytest.approx(0.514628 * MPA)
        assert m.chain.units[0].relaxation_time == pytest.approx(9.51e-2)

    def test_unknown_name(self):
        with pytest.raises(MaterialError, match="unknown material"):
            builtin_material("EVA")


class TestRelaxation:
    @pytest.mark.parametrize("name", INTERLAYERS)
    def test_limits(self, name):
        chain = builtin_material(name).chain
        assert relaxation_modulus(chain, 0.0) == pytest.approx(chain.instantaneous, rel=1e-14)
        t_inf = 1e9 * chain.times.max()
        assert relaxation_modulus(chain, t_inf) == pytest.approx(chain.long_term_modulus, rel=1e-12, abs=1e-12)

    def test_sgp_one_second_high_precision(self):
        chain = builtin_material("SGP_M").chain
        ref = mp.mpf(chain.long_term_modulus) + mp.fsum(
            mp.mpf(u.shear_modulus) * mp.exp(-1 / mp.mpf(u.relaxation_time)) for u in chain.units)
        assert relaxation_modulus(chain, 1.0) == pytest.approx(float(ref), rel=1e-13)

    def test_negative_time_rejected(self):
        with pytest.raises(MaterialError):
            relaxation_modulus(builtin_material("PVB_M").chain, -1.0)

    def test_vectorized(self):
        chain = builtin_material("PVB_M").chain
        t = np.array([0.0, 1.0, 10.0])
        np.testing.assert_allclose(relaxation_modulus(chain, t), [relaxation_modulus(chain, x) for x in t])


class TestComplexModulus:
    def test_static_limit(self):
        chain = builtin_material("PVB_M").chain
        assert frequency_part(chain, 0.0) == pytest.approx(-(chain.instantaneous - chain.long_term_modulus))
        assert complex_modulus(chain, 0.0) == pytest.approx(chain.long_term_modulus)

    def test_instantaneous_limit(self):
        chain = builtin_material("PVB_M").chain
        w = 1e12 / chain.times.min()
        assert abs(frequency_part(chain, w)) < 1e-9 * chain.instantaneous

    def test_elastic_chain(self):
        chain = MaxwellChain(3.0e6, ())
        assert complex_modulus(chain, 123.0) == 3.0e6 + 0j
        assert frequency_part_derivative(chain, 5.0 + 1j) == 0

    @pytest.mark.parametrize("name, omega", [("PVB_M", 2 * math.pi * 100), ("SGP_M", 2 * math.pi * 50)])
    def test_against_high_precision_sum(self, name, omega):
        chain = builtin_material(name).chain
        got = complex_modulus(chain, omega)
        ref = mp_complex_modulus(chain, omega)
        assert abs(got - ref) <= 1e-13 * abs(ref)

    def test_single_unit_derivative_at_zero(self):
        chain = MaxwellChain.from_arrays(1.0, [2.0], [0.5])
        assert frequency_part_derivative(chain, 0.0) == pytest.approx(1j * 2.0 * 0.5)

    @pytest.mark.parametrize("name", INTERLAYERS)
    @pytest.mark.parametrize("omega", [2 * math.pi * 10, 2 * math.pi * 100 + 3j, 2 * math.pi * 1000 - 50j])
    def test_derivative_central_difference(self, name, omega):
        chain = builtin_material(name).chain_at(25.0)
        h = 1e-6 * abs(omega)
        fd = (frequency_part(chain, omega + h) - frequency_part(chain, omega - h)) / (2 * h)
        exact = frequency_part_derivative(chain, omega)
        assert abs(fd - exact) <= 1e-6 * abs(exact)

    def test_pole_rejected(self):
        chain = MaxwellChain.from_arrays(1.0, [1.0], [2.0])
        with pytest.raises(MaterialError, match="pole"):
            frequency_part(chain, 0.5j)


class TestStorageModulusProperties:
    @pytest.mark.parametrize("name", INTERLAYERS)
    def test_storage_monotone_loss_positive(self, name):
        chain = builtin_material(name).chain
        w = np.logspace(-8, 9, 800)
        g = complex_modulus(chain, w)
        assert np.all(np.diff(g.real) >= 0)
        assert np.all(g.imag >= 0)

    @settings(max_examples=60, deadline=None)
    @given(
        g_inf=st.floats(0.0, 1e7),
        moduli=st.lists(st.floats(1e3, 1e9), min_size=1, max_size=6),
        log_theta=st.lists(st.floats(-6, 6), min_size=6, max_size=6),
        log_w=st.floats(-6, 6),
    )
    def test_random_chain_bounds(self, g_inf, moduli, log_theta, log_w):
        chain = MaxwellChain.from_arrays(g_inf, moduli, [10.0**x for x in log_theta[: len(moduli)]])
        g = complex_modulus(chain, 10.0**log_w)
        tol = 1e-12 * chain.instantaneous
        assert chain.long_term_modulus - tol <= g.real <= chain.instantaneous + tol
        assert g.imag >= 0

    @settings(max_examples=40, deadline=None)
    @given(log_w=st.floats(-4, 6), scale=st.floats(0.1, 10.0))
    def test_scaling_moduli_scales_response(self, log_w, scale):
        chain = builtin_material("PVB_M").chain
        scaled = MaxwellChain.from_arrays(scale * chain.long_term_modulus, scale * chain.moduli, chain.times)
        w = 10.0**log_w
        assert complex_modulus(scaled, w) == pytest.approx(scale * complex_modulus(chain, w), rel=1e-12)


class TestWlf:
    def test_reference_temperature(self):
        assert shift_factor(WlfShift(30.0, 12.5, 89.0), 30.0) == 1.0

    def test_pvb_s_at_25(self):
        w = builtin_material("PVB_S").wlf
        assert shift_factor(w, 25.0) == pytest.approx(10 ** (-37.30 * 4.54 / 208.15), rel=1e-12)

    def test_singular_denominator(self):
        with pytest.raises(MaterialError):
            shift_factor(WlfShift(0.0, 10.0, 50.0), -50.0)

    def test_shift_scales_times_only(self):
        chain = MaxwellChain.from_arrays(1.0, [2.0], [1.0])
        w = WlfShift(0.0, 1.0, 1.0)  # a_T = 10**(-T/(1+T)); T = 1 gives 10**-0.5
        out = shifted_chain(chain, w, 1.0)
        assert out.times[0] == pytest.approx(10**-0.5)
        np.testing.assert_array_equal(out.moduli, chain.moduli)

    def test_pvb_a_at_50(self):
        m = builtin_material("PVB_A")
        a = shift_factor(m.wlf, 50.0)
        np.testing.assert_allclose(m.chain_at(50.0).times, a * m.chain.times, rtol=1e-15)

    def test_same_temperature_returns_same_chain(self):
        m = builtin_material("PVB_S")
        assert m.chain_at(m.wlf.t0) is m.chain

    def test_warmer_is_softer(self):
        m = builtin_material("PVB_S")
        w = 2 * math.pi * 50
        assert complex_modulus(m.chain_at(50.0), w).real < complex_modulus(m.chain_at(25.0), w).real

    def test_no_wlf_only_tabulated_temperature(self):
        m = builtin_material("PVB_M")
        assert m.chain_at(25.0) is m.chain
        with pytest.raises(MaterialError, match="no WLF"):
            m.chain_at(50.0)

    def test_elastic_chain_any_temperature(self):
        m = InterlayerMaterial(1000.0, 0.45, MaxwellChain(1e6, ()))
        assert m.chain_at(80.0) is m.chain


class TestDatabase:
    def test_record_roundtrip(self):
        for rec in builtin_records():
            mat = material_from_record(rec)
            again = material_from_record(material_to_record(mat))
            assert again == mat or (
                isinstance(mat, InterlayerMaterial)
                and np.allclose(again.chain.moduli, mat.chain.moduli, rtol=1e-14)
                and again.wlf == mat.wlf
            )

    def test_dump_and_load(self, tmp_path):
        db = MaterialDatabase.from_records(builtin_records())
        path = tmp_path / "mats.json"
        db.dump(path)
        loaded = MaterialDatabase.load(path)
        assert set(loaded.materials) == set(db.materials)
        assert json.loads(path.read_text())["materials"][0]["name"] == "glass"
        assert loaded["PVB_S"].chain.instantaneous == pytest.approx(db["PVB_S"].chain.instantaneous)

    def test_ratio_without_g0_is_error(self):
        rec = {"name": "x", "kind": "interlayer", "density": 1000, "poisson": 0.4,
               "units": [{"g_ratio": 0.5, "theta_s": 1.0}]}
        with pytest.raises(MaterialError, match="g0_mpa"):
            material_from_record(rec)

    def test_bad_poisson(self):
        with pytest.raises(MaterialError):
            InterlayerMaterial(1000.0, 0.5, MaxwellChain(1.0, ()))
