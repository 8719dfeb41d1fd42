"""Single-bounce scattering through a foliage model.

Scene layout (top-down, horizontal plane z = 0): crown centered at the
origin, transmitter 15 m away on the negative x axis, receiver on a 15 m
half-circle at azimuth ``alpha``.  ``alpha = 0`` puts the receiver behind the
crown (propagation through the tree), ``alpha = 180`` next to the
transmitter (backscatter).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.constants import epsilon_0, speed_of_light

from .foliage import CrownParams, FoliageModel, generate_foliage
from .geometry import Bvh, bvh_build, bvh_intersect_many, EPS_RAY, TriSoupMesh

C = speed_of_light
MIN_COS = 1e-6


@dataclass(frozen=True)
class Material:
    """Electromagnetic properties of the scatterer faces.

    ``mu_s`` is the scattering coefficient, ``eps_r`` the relative
    permittivity and ``sigma`` the conductivity in S/m.
    """

    mu_s: float = 0.5
    eps_r: float = 17.0
    sigma: float = 0.05

    def __post_init__(self):
        if not 0.0 <= self.mu_s <= 1.0:
            raise ValueError("mu_s must lie in [0, 1]")
        if self.eps_r < 1.0:
            raise ValueError("eps_r must be >= 1")
        if self.sigma < 0.0:
            raise ValueError("sigma must be >= 0")


@dataclass(frozen=True)
class ScatterModel:
    """Knobs of the diffuse scattering model.

    Attributes:
        calibration_gain_db: global gain applied to every scattered path.
        occlusion_loss_db: power loss per foliage face crossed by a path
            segment (positive number, dB).
        lobe: scattering lobe; only ``"lambertian"`` is implemented.
    """

    calibration_gain_db: float = 0.0
    occlusion_loss_db: float = 2.0
    lobe: str = "lambertian"

    def __post_init__(self):
        if not math.isfinite(self.calibration_gain_db):
            raise ValueError("calibration_gain_db must be finite")
        if not self.occlusion_loss_db >= 0:
            raise ValueError("occlusion_loss_db must be >= 0")
        if self.lobe != "lambertian":
            raise ValueError(f"unsupported scattering lobe {self.lobe!r}")

    @property
    def transmission(self) -> float:
        """Per-crossing power transmission factor T."""
        return 10.0 ** (-self.occlusion_loss_db / 10.0)


@dataclass(frozen=True, eq=False)
class Scene:
    foliage: FoliageModel
    tx: np.ndarray
    rx: np.ndarray
    f_c: float
    bw: float = 2e9
    material: Material = field(default_factory=Material)
    scatter: ScatterModel = field(default_factory=ScatterModel)
    suppress_los: bool = True
    tx_power_dbm: float = 0.0
    antenna_gain_dbi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "tx", np.asarray(self.tx, dtype=float))
        object.__setattr__(self, "rx", np.asarray(self.rx, dtype=float))
        if not self.f_c > 0 or not self.bw > 0:
            raise ValueError("carrier frequency and bandwidth must be positive")
        # Co-located ends are allowed for backscatter as long as no LOS is traced.
        if not self.suppress_los and np.allclose(self.tx, self.rx, rtol=0.0, atol=1e-9):
            raise ValueError("tx and rx coincide; a LOS path is undefined")

    @property
    def wavelength(self) -> float:
        return C / self.f_c

    def swapped(self) -> "Scene":
        return replace(self, tx=self.rx, rx=self.tx)

    def to_dict(self) -> dict:
        """JSON-ready description; the foliage is stored by its parameters."""
        return {
            "crown": asdict(self.foliage.params),
            "crown_center": self.foliage.crown_center.tolist(),
            "tx": self.tx.tolist(),
            "rx": self.rx.tolist(),
            "f_c": self.f_c,
            "bw": self.bw,
            "material": asdict(self.material),
            "scatter": asdict(self.scatter),
            "suppress_los": self.suppress_los,
            "tx_power_dbm": self.tx_power_dbm,
            "antenna_gain_dbi": self.antenna_gain_dbi,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Scene":
        foliage = generate_foliage(CrownParams(**doc["crown"]), doc.get("crown_center", (0, 0, 0)))
        return cls(
            foliage=foliage,
            tx=doc["tx"],
            rx=doc["rx"],
            f_c=doc["f_c"],
            bw=doc.get("bw", 2e9),
            material=Material(**doc.get("material", {})),
            scatter=ScatterModel(**doc.get("scatter", {})),
            suppress_los=doc.get("suppress_los", True),
            tx_power_dbm=doc.get("tx_power_dbm", 0.0),
            antenna_gain_dbi=doc.get("antenna_gain_dbi", 0.0),
        )

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def from_json(cls, path) -> "Scene":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class PathContribution:
    """One multipath component; ``face_index`` is -1 for the LOS path."""

    tau: float
    amplitude: complex
    face_index: int
    n_occlusions_in: int = 0
    n_occlusions_out: int = 0

    @property
    def power(self) -> float:
        return abs(self.amplitude) ** 2


def rx_position(alpha_deg: float, radius: float = 15.0) -> np.ndarray:
    a = math.radians(alpha_deg)
    return np.array([radius * math.cos(a), radius * math.sin(a), 0.0])


def build_scene(
    params: CrownParams,
    alpha_deg: float,
    f_c: float,
    *,
    foliage: FoliageModel | None = None,
    tx_distance: float = 15.0,
    rx_radius: float = 15.0,
    **options,
) -> Scene:
    """Place crown, TX and RX for receiver azimuth ``alpha_deg``.

    ``options`` are forwarded to :class:`Scene` (``bw``, ``material``,
    ``scatter``, ``suppress_los``, ``tx_power_dbm``, ``antenna_gain_dbi``).
    A pre-generated ``foliage`` skips generation; it must be centered at
    the origin.
    """
    if not 0.0 <= alpha_deg <= 180.0:
        raise ValueError(f"alpha must lie in [0, 180] degrees, got {alpha_deg}")
    if foliage is None:
        foliage = generate_foliage(params)
    return Scene(
        foliage=foliage,
        tx=np.array([-tx_distance, 0.0, 0.0]),
        rx=rx_position(alpha_deg, rx_radius),
        f_c=f_c,
        **options,
    )


def fspl_db(d: float, f_c: float) -> float:
    """Friis free-space path loss ``20 log10(4 pi d f / c)``."""
    if not d > 0:
        raise ValueError("distance must be positive")
    return 20.0 * math.log10(4.0 * math.pi * d * f_c / C)


def fresnel_normal_reflection(eps_r: float, sigma: float, f_c: float) -> float:
    """Magnitude of the normal-incidence reflection coefficient of a lossy half-space."""
    if eps_r < 1.0:
        raise ValueError("eps_r must be >= 1")
    eps_c = complex(eps_r, -sigma / (2.0 * math.pi * f_c * epsilon_0))
    n = np.sqrt(eps_c)
    return float(abs((n - 1.0) / (n + 1.0)))


def _count_occlusions(bvh: Bvh, starts, ends, own_faces) -> np.ndarray:
    seg = ends - starts
    length = np.linalg.norm(seg, axis=1)
    dirs = seg / length[:, None]
    ray, face, _ = bvh_intersect_many(bvh, starts, dirs, t_max=length - EPS_RAY)
    other = face != own_faces[ray]
    return np.bincount(ray[other], minlength=len(starts))


def scattering_power(scene: Scene, d1, d2, cos_i, cos_s, k) -> np.ndarray:
    """Linear power gain of single-bounce paths (vectorized over faces)."""
    lam = scene.wavelength
    area = scene.foliage.params.area
    gamma = fresnel_normal_reflection(scene.material.eps_r, scene.material.sigma, scene.f_c)
    g = 10.0 ** (scene.antenna_gain_dbi / 10.0)
    cal = 10.0 ** (scene.scatter.calibration_gain_db / 10.0)
    return (
        g * g
        * (lam / (4.0 * math.pi)) ** 2
        * scene.material.mu_s ** 2
        * gamma ** 2
        * (area * cos_i * cos_s)
        / (math.pi * d1 ** 2 * d2 ** 2)
        * cal
        * scene.scatter.transmission ** k
    )


def trace_paths(scene: Scene, bvh: Bvh | None = None) -> list[PathContribution]:
    """Trace TX -> face centroid -> RX for every scatterer face.

    Faces are two-sided and scatter from their centroid.  Each path segment
    is attenuated by ``T`` per other face it crosses.  When LOS is enabled
    the direct path is appended last, attenuated the same way.
    """
    foliage = scene.foliage
    paths: list[PathContribution] = []
    faces = foliage.scatterers
    if faces is not None and bvh is None:
        bvh = bvh_build(faces)

    if faces is not None:
        q = faces.centroids
        nrm = faces.normals
        v1 = q - scene.tx
        v2 = scene.rx - q
        d1 = np.linalg.norm(v1, axis=1)
        d2 = np.linalg.norm(v2, axis=1)
        cos_i = np.abs(np.einsum("ij,ij->i", nrm, v1)) / d1
        cos_s = np.abs(np.einsum("ij,ij->i", nrm, v2)) / d2
        valid = np.flatnonzero((cos_i >= MIN_COS) & (cos_s >= MIN_COS) & (d1 > EPS_RAY) & (d2 > EPS_RAY))
        if valid.size:
            qv = q[valid]
            k_in = _count_occlusions(bvh, np.broadcast_to(scene.tx, qv.shape), qv, valid)
            k_out = _count_occlusions(bvh, qv, np.broadcast_to(scene.rx, qv.shape), valid)
            length = d1[valid] + d2[valid]
            power = scattering_power(
                scene, d1[valid], d2[valid], cos_i[valid], cos_s[valid], k_in + k_out
            )
            amp = np.sqrt(power) * np.exp(-2j * math.pi * scene.f_c * length / C)
            tau = length / C
            paths.extend(
                PathContribution(float(t), complex(a), int(i), int(ki), int(ko))
                for t, a, i, ki, ko in zip(tau, amp, valid, k_in, k_out)
            )

    if not scene.suppress_los:
        d = float(np.linalg.norm(scene.rx - scene.tx))
        k = 0
        if bvh is not None:
            k = int(_count_occlusions(bvh, scene.tx[None], scene.rx[None], np.array([-1]))[0])
        g = 10.0 ** (scene.antenna_gain_dbi / 10.0)
        power = g * g * (scene.wavelength / (4.0 * math.pi * d)) ** 2 * scene.scatter.transmission ** k
        amp = math.sqrt(power) * np.exp(-2j * math.pi * scene.f_c * d / C)
        paths.append(PathContribution(d / C, complex(amp), -1, k, 0))
    return paths


PATH_CSV_COLUMNS = ("face_index", "tau_s", "amp_real", "amp_imag", "occlusions_in", "occlusions_out")


def write_paths_csv(path, paths: Sequence[PathContribution]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PATH_CSV_COLUMNS)
        for p in paths:
            w.writerow(
                [p.face_index, repr(p.tau), repr(p.amplitude.real), repr(p.amplitude.imag),
                 p.n_occlusions_in, p.n_occlusions_out]
            )


def read_paths_csv(path) -> list[PathContribution]:
    with open(path, newline="") as fh:
        return [
            PathContribution(
                float(r["tau_s"]),
                complex(float(r["amp_real"]), float(r["amp_imag"])),
                int(r["face_index"]),
                int(r["occlusions_in"]),
                int(r["occlusions_out"]),
            )
            for r in csv.DictReader(fh)
        ]
