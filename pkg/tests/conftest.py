import numpy as np
import pytest

from foliage_rt.channel import Scene
from foliage_rt.foliage import CrownParams, FoliageModel, scatterer_template
from foliage_rt.geometry import TriSoupMesh, icosphere, signed_volume

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def unit_sphere():
    v, f = icosphere(2)
    return TriSoupMesh.from_indexed(v, f)


def model_from_faces(tris, area, envelope_radius=8.0):
    """Foliage model with hand-placed scatterers inside a large spherical envelope."""
    v, f = icosphere(1)
    env = TriSoupMesh.from_indexed(v * envelope_radius, f)
    params = CrownParams(area=area, volume=signed_volume(env.faces), xi=0.0, density=0.0)
    return FoliageModel(
        envelope=env,
        scatterers=TriSoupMesh(tris) if len(tris) else None,
        params=params,
        crown_center=np.zeros(3),
        achieved_volume=signed_volume(env.faces),
    )


def face_facing(center, normal, area, spin=0.0):
    """Template triangle of ``area`` centered at ``center`` with unit ``normal``."""
    from foliage_rt.geometry import rodrigues

    normal = np.asarray(normal, float) / np.linalg.norm(normal)
    z = np.array([0.0, 0.0, 1.0])
    axis = np.cross(z, normal)
    s = np.linalg.norm(axis)
    if s < 1e-12:
        rot = np.eye(3) if normal[2] > 0 else rodrigues((1.0, 0.0, 0.0), np.pi)
    else:
        rot = rodrigues(axis / s, np.arctan2(s, normal[2]))
    rot = rot @ rodrigues(z, spin)
    return scatterer_template(area) @ rot.T + np.asarray(center, float)
