import numpy as np
import pytest

from lgmodal.fem_beam import CrossSection, LaminatedBeam, build_system
from lgmodal.materials import InterlayerMaterial, MaxwellChain, builtin_database, builtin_material
from lgmodal.study import StudyConfig, generate_matrix, run_study


def make_beam(bc="ss", section=(10.0, 0.76, 10.0), material="PVB_M", temp=25.0, length=1.0, width=0.1):
    db = builtin_database()
    glass = db["glass"]
    inter = material if isinstance(material, InterlayerMaterial) else db[material]
    return LaminatedBeam(length, CrossSection.from_mm(*section, b_m=width), glass, glass, inter, bc, temp)


def elastic_interlayer(g_inf=1.0e6, density=1100.0, poisson=0.49, name="elastic"):
    return InterlayerMaterial(density, poisson, MaxwellChain(g_inf, ()), name=name)


def glass_as_interlayer():
    g = builtin_material("glass")
    return InterlayerMaterial(g.density, g.poisson_ratio, MaxwellChain(g.shear_modulus, ()), name="glass_core")


@pytest.fixture(scope="session")
def db():
    return builtin_database()


@pytest.fixture(scope="session")
def pvb_beam():
    return make_beam()


@pytest.fixture(scope="session")
def small_system(pvb_beam):
    return build_system(pvb_beam, 8)


@pytest.fixture(scope="session")
def study_200():
    """Full 63-case matrix, all methods, three modes, 200 elements per layer."""
    return run_study(generate_matrix(), StudyConfig(elements=200))


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE_LINES
    except ImportError:
        return
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
