"""Stochastic tree-crown generation.

A crown is a perturbed, volume-normalized icosphere (the envelope) filled
with randomly rotated equilateral scatterer triangles whose centers are
uniform inside the envelope.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import (
    TriSoupMesh,
    icosphere,
    points_in_mesh,
    random_rotations,
    self_intersects,
    signed_volume,
    volume_centroid,
    write_obj,
)

MAX_ENVELOPE_ATTEMPTS = 10
MAX_REJECTIONS = 1_000_000


class EnvelopeError(RuntimeError):
    """No valid envelope could be generated within the retry budget."""


@dataclass(frozen=True)
class CrownParams:
    """User-facing crown parameters.

    Attributes:
        area: area of every scatterer triangle [m^2].
        volume: target crown volume [m^3].
        xi: standard deviation of the vertex perturbation (unit-sphere units).
        density: scatterer density [triangles / m^3].
        seed: random seed.
        subdivisions: icosphere level of the initial envelope.
    """

    area: float = 2.0
    volume: float = 600.0
    xi: float = 0.1
    density: float = 0.25
    seed: int = 0
    subdivisions: int = 1

    def __post_init__(self):
        if not self.area > 0:
            raise ValueError(f"area must be > 0, got {self.area}")
        if not self.volume > 0:
            raise ValueError(f"volume must be > 0, got {self.volume}")
        if not self.xi >= 0:
            raise ValueError(f"xi must be >= 0, got {self.xi}")
        if not self.density >= 0:
            raise ValueError(f"density must be >= 0, got {self.density}")
        if self.subdivisions < 1:
            raise ValueError("subdivisions must be >= 1")

    @property
    def n_scatterers(self) -> int:
        return int(round(self.density * self.volume))

    def replace(self, **changes) -> "CrownParams":
        return CrownParams(**{**asdict(self), **changes})


@dataclass(frozen=True, eq=False)
class FoliageModel:
    envelope: TriSoupMesh
    scatterers: TriSoupMesh | None
    params: CrownParams
    crown_center: np.ndarray
    achieved_volume: float
    initial_volume: float = field(default=float("nan"))
    scale: float = field(default=float("nan"))
    attempts: int = 1

    @property
    def n_scatterers(self) -> int:
        return 0 if self.scatterers is None else len(self.scatterers)

    @property
    def diameter(self) -> float:
        """Largest vertex-to-vertex extent of the envelope."""
        v = np.unique(np.round(self.envelope.vertices, 12), axis=0)
        d = np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)
        return float(d.max())

    def to_obj(self, path) -> None:
        objects = {"envelope": self.envelope}
        if self.scatterers is not None:
            objects["scatterers"] = self.scatterers
        write_obj(path, objects)

    def provenance(self) -> dict:
        return {
            "params": asdict(self.params),
            "crown_center": self.crown_center.tolist(),
            "achieved_volume": self.achieved_volume,
            "initial_volume": self.initial_volume,
            "scale": self.scale,
            "n_scatterers": self.n_scatterers,
            "envelope_attempts": self.attempts,
            "diameter": self.diameter,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.provenance(), fh, indent=2)


def _streams(seed: int) -> tuple[np.random.Generator, ...]:
    # Independent streams so envelope retries never shift scatterer draws.
    ss = np.random.SeedSequence(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)
    return tuple(np.random.default_rng(s) for s in ss.spawn(3))


def make_envelope(volume: float, xi: float, subdivisions: int, rng: np.random.Generator):
    """Perturb a unit icosphere and rescale it to ``volume``.

    Every unique vertex is displaced by an isotropic Gaussian with standard
    deviation ``xi``; the perturbed mesh is then scaled about its volume
    centroid by ``(volume / V_initial) ** (1/3)``.  Perturbations that fold
    the surface through itself, or turn it inside out, are redrawn.

    Returns:
        ``(mesh, initial_volume, scale, attempts)``.

    Raises:
        EnvelopeError: after ``MAX_ENVELOPE_ATTEMPTS`` invalid draws.
    """
    if not volume > 0:
        raise ValueError(f"volume must be > 0, got {volume}")
    verts, faces = icosphere(subdivisions)
    for attempt in range(1, MAX_ENVELOPE_ATTEMPTS + 1):
        v = verts + rng.normal(0.0, xi, size=verts.shape) if xi > 0 else verts.copy()
        initial = signed_volume(v[faces])
        if initial <= 0 or (xi > 0 and self_intersects(v, faces)):
            continue
        scale = (volume / initial) ** (1.0 / 3.0)
        center = volume_centroid(v[faces])
        v = (v - center) * scale + center
        return TriSoupMesh.from_indexed(v, faces), initial, scale, attempt
    raise EnvelopeError(
        f"no valid envelope after {MAX_ENVELOPE_ATTEMPTS} draws (xi={xi}, subdivisions={subdivisions})"
    )


def scatterer_template(area: float) -> np.ndarray:
    """Equilateral triangle of the given area, centroid at the origin, in z=0."""
    if not area > 0:
        raise ValueError(f"scatterer area must be > 0, got {area}")
    side = math.sqrt(4.0 * area / math.sqrt(3.0))
    r3 = math.sqrt(3.0)
    return np.array(
        [
            [0.0, -side / r3, 0.0],
            [side / 2.0, side / (2.0 * r3), 0.0],
            [-side / 2.0, side / (2.0 * r3), 0.0],
        ]
    )


def sample_points_in(envelope: TriSoupMesh, rng: np.random.Generator, n: int, batch: int = 256):
    """``n`` points uniform in the volume enclosed by ``envelope``.

    Rejection sampling from the bounding box; candidates are drawn in
    batches and accepted in draw order, so the sequence is fixed by ``rng``.
    """
    lo, hi = envelope.bounds()
    out = np.empty((n, 3))
    got = 0
    rejected = 0
    while got < n:
        cand = rng.uniform(lo, hi, size=(batch, 3))
        inside = points_in_mesh(cand, envelope)
        for p, ok in zip(cand, inside):
            if ok:
                out[got] = p
                got += 1
                rejected = 0
                if got == n:
                    break
            else:
                rejected += 1
                if rejected > MAX_REJECTIONS:
                    raise EnvelopeError("rejection sampling failed; envelope encloses no volume")
    return out


def sample_point_in(envelope: TriSoupMesh, rng: np.random.Generator) -> np.ndarray:
    return sample_points_in(envelope, rng, 1)[0]


def generate_foliage(params: CrownParams, center=(0.0, 0.0, 0.0)) -> FoliageModel:
    """Build a complete crown model; a pure function of ``(params, center)``."""
    env_rng, pos_rng, rot_rng = _streams(params.seed)
    envelope, initial, scale, attempts = make_envelope(
        params.volume, params.xi, params.subdivisions, env_rng
    )
    center = np.asarray(center, dtype=float)
    shift = center - volume_centroid(envelope.faces)
    envelope = envelope.transformed(offset=shift)

    n = params.n_scatterers
    scatterers = None
    if n > 0:
        offsets = sample_points_in(envelope, pos_rng, n)
        rot = random_rotations(rot_rng, n)
        template = scatterer_template(params.area)
        tris = np.einsum("nij,kj->nki", rot, template) + offsets[:, None, :]
        scatterers = TriSoupMesh(tris)

    return FoliageModel(
        envelope=envelope,
        scatterers=scatterers,
        params=params,
        crown_center=center,
        achieved_volume=signed_volume(envelope.faces),
        initial_volume=initial,
        scale=scale,
        attempts=attempts,
    )
