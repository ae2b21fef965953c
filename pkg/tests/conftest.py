import numpy as np
import pytest

import phimin as pm
from phimin.solvers import AxisRegular, PointStart, ShootingConfig


@pytest.fixture(scope="session")
def spec_zero():
    return pm.PotentialSpec.constant(0.0)


@pytest.fixture(scope="session")
def spec_linear():
    return pm.PotentialSpec.linear(1.0)


@pytest.fixture(scope="session")
def spec_quadratic():
    return pm.PotentialSpec.quadratic(1.0, 1.0)


@pytest.fixture(scope="session")
def bowl(spec_linear):
    cfg = ShootingConfig(start=AxisRegular(0.0), s_max=2.0, step=1e-3)
    return pm.solve_rotational_profile(spec_linear, cfg)


@pytest.fixture(scope="session")
def bowl_field(bowl, spec_linear):
    return pm.sample_geometry(bowl.surface, spec_linear)


@pytest.fixture(scope="session")
def reaper(spec_linear):
    cfg = ShootingConfig(start=PointStart(0.0, 0.0, 0.0), s_max=1.4, step=1e-3)
    return pm.solve_translation_profile(spec_linear, cfg)


@pytest.fixture(scope="session")
def reaper_field(reaper, spec_linear):
    return pm.sample_geometry(reaper.surface, spec_linear)


@pytest.fixture(scope="session")
def catenoid(spec_zero):
    cfg = ShootingConfig(start=PointStart(1.0, 0.0, np.pi / 2), s_max=1.2, step=1e-3)
    return pm.solve_rotational_profile(spec_zero, cfg)


@pytest.fixture(scope="session")
def catenoid_field(catenoid, spec_zero):
    return pm.sample_geometry(catenoid.surface, spec_zero)


@pytest.fixture(scope="session")
def catenoid_two_sided():
    """Closed-form catenoid profile through the neck, both halves."""
    h = 1e-3
    s = np.arange(-1200, 1201) * h
    return pm.ProfileCurve(s=s, x=np.sqrt(1.0 + s**2), z=np.arcsinh(s),
                           theta=np.arctan2(1.0, s), kind="Rotational", step=h)


@pytest.fixture(scope="session")
def quad_bowl(spec_quadratic):
    cfg = ShootingConfig(start=AxisRegular(0.0), s_max=1.5, step=1e-3)
    return pm.solve_rotational_profile(spec_quadratic, cfg)


@pytest.fixture(scope="session")
def flat_disk_profile():
    """Flat horizontal disk as a rotational profile (theta = 0)."""
    h = 1.0 / 128.0
    n = int(round(1.25 / h))
    s = h * np.arange(n + 1)
    return pm.ProfileCurve(s=s, x=s.copy(), z=np.zeros(n + 1),
                           theta=np.zeros(n + 1), kind="Rotational", step=h)


@pytest.fixture(scope="session")
def vertical_plane_profile():
    """Vertical plane x = 1 as a translation-invariant profile."""
    n = 400
    h = 1e-2
    s = h * np.arange(n + 1)
    return pm.ProfileCurve(s=s, x=np.ones(n + 1), z=s.copy(),
                           theta=np.full(n + 1, np.pi / 2),
                           kind="TranslationInvariant", step=h)
