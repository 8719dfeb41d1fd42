"""Geometric kernel: rotations, triangle soups, ray queries and a BVH.

Points and directions are plain ``numpy`` arrays of shape ``(3,)``.  A
triangle is a ``(3, 3)`` array whose rows are its vertices, and a mesh is a
stack of such triangles (non-indexed "triangle soup", ``3M`` vertices for
``M`` faces).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

EPS_RAY = 1e-6
"""Minimum accepted hit distance in meters (self-intersection guard)."""

MIN_AREA = 1e-12
_DET_EPS = 1e-14
_UNIT_TOL = 1e-9

# Fixed, slightly irrational directions for the ray-parity membership test.
_PARITY_DIRECTIONS = np.array(
    [
        [0.5773, 0.5774, 0.5776],
        [-0.3127, 0.7211, 0.6181],
        [0.8021, -0.4463, 0.3967],
        [-0.1903, -0.6677, -0.7196],
        [0.6359, 0.2088, -0.7430],
    ]
)
_PARITY_DIRECTIONS /= np.linalg.norm(_PARITY_DIRECTIONS, axis=1, keepdims=True)


def normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def cross_matrix(axis: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix ``K`` with ``K @ v == cross(axis, v)``."""
    x, y, z = axis
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rodrigues(axis: Sequence[float], angle: float) -> np.ndarray:
    """Rotation matrix for a right-handed turn of ``angle`` radians about ``axis``.

    Uses ``R = I + sin(angle) K + (1 - cos(angle)) K^2`` where ``K`` is the
    cross-product matrix of the unit axis.

    Raises:
        ValueError: if ``axis`` is not a unit vector (tolerance 1e-9).
    """
    axis = np.asarray(axis, dtype=float)
    if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > _UNIT_TOL:
        raise ValueError(f"rotation axis must be a unit 3-vector, got {axis!r}")
    k = cross_matrix(axis)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def _haar_axis_angle(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    # Uniform unit quaternions (Shoemake) give Haar-distributed rotations.
    u1, u2, u3 = rng.random((3, n))
    w = np.sqrt(1.0 - u1) * np.sin(2.0 * np.pi * u2)
    xyz = np.stack(
        [
            np.sqrt(1.0 - u1) * np.cos(2.0 * np.pi * u2),
            np.sqrt(u1) * np.sin(2.0 * np.pi * u3),
            np.sqrt(u1) * np.cos(2.0 * np.pi * u3),
        ],
        axis=1,
    )
    # q and -q are the same rotation; pick w >= 0 so the angle is in [0, pi].
    sign = np.where(w < 0.0, -1.0, 1.0)
    w = w * sign
    xyz = xyz * sign[:, None]
    s = np.linalg.norm(xyz, axis=1)
    angle = 2.0 * np.arctan2(s, w)
    axis = np.empty_like(xyz)
    small = s < 1e-300
    axis[~small] = xyz[~small] / s[~small, None]
    axis[small] = (0.0, 0.0, 1.0)
    return axis, angle


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Draw one rotation uniformly from SO(3), built through :func:`rodrigues`."""
    axis, angle = _haar_axis_angle(rng, 1)
    return rodrigues(axis[0], float(angle[0]))


def random_rotations(rng: np.random.Generator, n: int) -> np.ndarray:
    """Vectorized :func:`random_rotation`; returns an ``(n, 3, 3)`` stack.

    Consumes the generator exactly like ``n`` successive single draws would
    not (draws are batched), so mixing the two forms changes the stream.
    """
    axis, angle = _haar_axis_angle(rng, n)
    x, y, z = axis.T
    zero = np.zeros(n)
    k = np.stack(
        [
            np.stack([zero, -z, y], axis=1),
            np.stack([z, zero, -x], axis=1),
            np.stack([-y, x, zero], axis=1),
        ],
        axis=1,
    )
    s = np.sin(angle)[:, None, None]
    c = np.cos(angle)[:, None, None]
    return np.eye(3)[None] + s * k + (1.0 - c) * (k @ k)


def triangle_areas(tris: np.ndarray) -> np.ndarray:
    tris = np.asarray(tris, dtype=float)
    n = np.cross(tris[..., 1, :] - tris[..., 0, :], tris[..., 2, :] - tris[..., 0, :])
    return 0.5 * np.linalg.norm(n, axis=-1)


def triangle_normals(tris: np.ndarray) -> np.ndarray:
    """Unit normals following the right-hand rule on vertex order."""
    tris = np.asarray(tris, dtype=float)
    n = np.cross(tris[..., 1, :] - tris[..., 0, :], tris[..., 2, :] - tris[..., 0, :])
    return n / np.linalg.norm(n, axis=-1, keepdims=True)


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=float)
        direction = np.asarray(self.direction, dtype=float)
        norm = np.linalg.norm(direction)
        if not np.all(np.isfinite(origin)) or not np.isfinite(norm) or norm == 0.0:
            raise ValueError("ray needs a finite origin and a non-zero direction")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "direction", direction / norm)


@dataclass(frozen=True, eq=False)
class TriSoupMesh:
    """Immutable, non-indexed triangle mesh.

    Attributes:
        faces: ``(M, 3, 3)`` array, ``faces[i, j]`` is vertex ``j`` of face ``i``.
    """

    faces: np.ndarray

    def __post_init__(self):
        faces = np.array(self.faces, dtype=float).reshape(-1, 3, 3)
        if not np.all(np.isfinite(faces)):
            raise ValueError("mesh contains non-finite coordinates")
        bad = np.flatnonzero(triangle_areas(faces) <= MIN_AREA)
        if bad.size:
            raise ValueError(f"degenerate faces (area <= {MIN_AREA} m^2): {bad[:10].tolist()}")
        faces.setflags(write=False)
        object.__setattr__(self, "faces", faces)

    @classmethod
    def from_indexed(cls, vertices: np.ndarray, faces: np.ndarray) -> "TriSoupMesh":
        return cls(np.asarray(vertices, dtype=float)[np.asarray(faces)])

    def __len__(self) -> int:
        return len(self.faces)

    @property
    def vertices(self) -> np.ndarray:
        """All ``3M`` vertices in face order."""
        return self.faces.reshape(-1, 3)

    @property
    def centroids(self) -> np.ndarray:
        return self.faces.mean(axis=1)

    @property
    def areas(self) -> np.ndarray:
        return triangle_areas(self.faces)

    @property
    def normals(self) -> np.ndarray:
        return triangle_normals(self.faces)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.vertices
        return v.min(axis=0), v.max(axis=0)

    def transformed(self, matrix=None, offset=None) -> "TriSoupMesh":
        """Apply ``v -> matrix @ v + offset`` to every vertex."""
        f = self.faces
        if matrix is not None:
            f = f @ np.asarray(matrix, dtype=float).T
        if offset is not None:
            f = f + np.asarray(offset, dtype=float)
        return TriSoupMesh(f)

    def scaled(self, factor: float, about=(0.0, 0.0, 0.0)) -> "TriSoupMesh":
        about = np.asarray(about, dtype=float)
        return TriSoupMesh((self.faces - about) * factor + about)


# --------------------------------------------------------------------------
# Ray / triangle intersection
# --------------------------------------------------------------------------


def intersect_batch(origins, directions, tris, eps: float = EPS_RAY):
    """Broadcasting Moller-Trumbore test.

    ``origins``/``directions`` have shape ``(..., 3)`` and ``tris`` has shape
    ``(..., 3, 3)``; leading dimensions broadcast against each other.

    Returns:
        ``(hit, t, u, v)`` arrays.  ``t`` is ``inf`` where ``hit`` is false.
    """
    origins = np.asarray(origins, dtype=float)
    directions = np.asarray(directions, dtype=float)
    tris = np.asarray(tris, dtype=float)
    a = tris[..., 0, :]
    e1 = tris[..., 1, :] - a
    e2 = tris[..., 2, :] - a
    p = np.cross(directions, e2)
    det = np.einsum("...i,...i->...", e1, p)
    area2 = np.linalg.norm(np.cross(e1, e2), axis=-1)
    ok = (np.abs(det) > _DET_EPS * np.maximum(area2, 1.0)) & (area2 > 2.0 * MIN_AREA)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
        s = origins - a
        u = np.einsum("...i,...i->...", s, p) * inv
        q = np.cross(s, e1)
        v = np.einsum("...i,...i->...", directions, q) * inv
        t = np.einsum("...i,...i->...", e2, q) * inv
    hit = ok & (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0) & (t > eps)
    t = np.where(hit, t, np.inf)
    return hit, t, u, v


class Hit(NamedTuple):
    t: float
    u: float
    v: float


def ray_triangle_intersect(ray: Ray, tri: np.ndarray) -> Hit | None:
    """Nearest forward hit of ``ray`` on ``tri`` or ``None``.

    Hits closer than :data:`EPS_RAY` and degenerate triangles count as misses.
    """
    hit, t, u, v = intersect_batch(ray.origin, ray.direction, np.asarray(tri, dtype=float))
    if not bool(hit):
        return None
    return Hit(float(t), float(u), float(v))


# --------------------------------------------------------------------------
# Closed-mesh queries
# --------------------------------------------------------------------------


def mesh_volume(mesh: TriSoupMesh) -> float:
    """Enclosed volume ``|sum a.(b x c)| / 6`` of a closed, consistently oriented mesh."""
    return abs(signed_volume(mesh.faces))


def signed_volume(faces: np.ndarray) -> float:
    f = np.asarray(faces, dtype=float)
    return float(np.einsum("ij,ij->i", f[:, 0], np.cross(f[:, 1], f[:, 2])).sum() / 6.0)


def volume_centroid(faces: np.ndarray) -> np.ndarray:
    """Center of mass of the solid bounded by a closed triangle soup."""
    f = np.asarray(faces, dtype=float)
    vol6 = np.einsum("ij,ij->i", f[:, 0], np.cross(f[:, 1], f[:, 2]))
    total = vol6.sum()
    return (vol6[:, None] * f.sum(axis=1)).sum(axis=0) / (4.0 * total)


def is_closed(mesh: TriSoupMesh, decimals: int = 9) -> bool:
    """True if every undirected edge is shared by exactly two faces."""
    v = np.round(mesh.vertices, decimals)
    _, idx = np.unique(v, axis=0, return_inverse=True)
    tri = idx.reshape(-1, 3)
    edges = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    edges.sort(axis=1)
    _, counts = np.unique(edges, axis=0, return_counts=True)
    return bool(np.all(counts == 2))


def points_in_mesh(points: np.ndarray, mesh: TriSoupMesh, chunk: int = 2048) -> np.ndarray:
    """Vectorized ray-parity membership test for many points.

    Each point casts a ray along a fixed jittered direction and counts face
    crossings; odd means inside.  Points whose ray grazes an edge or starts on
    a face are re-cast along the next direction (bounded retries, no error).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros(len(pts), dtype=bool)
    faces = mesh.faces
    for start in range(0, len(pts), chunk):
        block = pts[start:start + chunk]
        pending = np.arange(len(block))
        result = np.zeros(len(block), dtype=bool)
        for attempt, d in enumerate(_PARITY_DIRECTIONS):
            p = block[pending]
            inside, ambiguous = _parity(p, d, faces)
            result[pending] = inside
            if attempt == len(_PARITY_DIRECTIONS) - 1:
                break
            pending = pending[ambiguous]
            if pending.size == 0:
                break
        out[start:start + chunk] = result
    return out


def _parity(points, direction, faces, tol: float = 1e-10):
    a = faces[None, :, 0, :]
    e1 = faces[None, :, 1, :] - a
    e2 = faces[None, :, 2, :] - a
    d = direction[None, None, :]
    p = np.cross(d, e2)
    det = np.einsum("...i,...i->...", e1, p)
    parallel = np.abs(det) < _DET_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / np.where(parallel, 1.0, det)
        s = points[:, None, :] - a
        u = np.einsum("...i,...i->...", s, p) * inv
        q = np.cross(s, e1)
        v = np.einsum("...i,...i->...", np.broadcast_to(d, q.shape), q) * inv
        t = np.einsum("...i,...i->...", e2, q) * inv
    w = 1.0 - u - v
    inside_tri = (u >= 0) & (v >= 0) & (w >= 0) & ~parallel
    crossing = inside_tri & (t > 0.0)
    near_edge = inside_tri & ((u < tol) | (v < tol) | (w < tol))
    on_face = inside_tri & (np.abs(t) < tol)
    ambiguous = np.any(near_edge | on_face, axis=1)
    return (crossing.sum(axis=1) % 2 == 1), ambiguous


def point_in_mesh(p: Sequence[float], mesh: TriSoupMesh) -> bool:
    return bool(points_in_mesh(np.asarray(p, dtype=float)[None, :], mesh)[0])


def self_intersects(vertices: np.ndarray, faces: np.ndarray) -> bool:
    """True if two non-adjacent faces of an indexed mesh intersect.

    Tests every edge against every face not sharing a vertex with it; two
    triangles in general position intersect iff an edge of one pierces the
    other.
    """
    vertices = np.asarray(vertices, dtype=float)
    faces = np.asarray(faces)
    edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    edges.sort(axis=1)
    edges = np.unique(edges, axis=0)
    tris = vertices[faces]
    p0 = vertices[edges[:, 0]]
    seg = vertices[edges[:, 1]] - p0
    length = np.linalg.norm(seg, axis=1)
    hit, t, _, _ = intersect_batch(
        p0[:, None, :], (seg / length[:, None])[:, None, :], tris[None, :, :, :], eps=0.0
    )
    hit &= t < length[:, None]
    shares = (edges[:, None, :, None] == faces[None, :, None, :]).any(axis=(2, 3))
    return bool(np.any(hit & ~shares))


# --------------------------------------------------------------------------
# Icosphere
# --------------------------------------------------------------------------


def icosphere(subdivisions: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Unit icosphere as ``(vertices, faces)`` with outward orientation.

    Level ``k`` has ``20 * 4**k`` faces.
    """
    if subdivisions < 0:
        raise ValueError("subdivisions must be >= 0")
    phi = (1.0 + 5.0 ** 0.5) / 2.0
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    vlist = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i: int, j: int) -> int:
            key = (i, j) if i < j else (j, i)
            if key not in cache:
                m = vlist[i] + vlist[j]
                vlist.append(m / np.linalg.norm(m))
                cache[key] = len(vlist) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return np.array(vlist), np.array(faces, dtype=np.int64)


# --------------------------------------------------------------------------
# Bounding volume hierarchy
# --------------------------------------------------------------------------

LEAF_SIZE = 4


@dataclass(frozen=True, eq=False)
class Bvh:
    """Flat binary BVH over a triangle array.

    Leaves own the slice ``order[start:start + count]`` of face indices;
    internal nodes have ``count == 0`` and children ``left``/``right``.
    """

    faces: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    left: np.ndarray
    right: np.ndarray
    start: np.ndarray
    count: np.ndarray
    order: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.lo)


def bvh_build(faces, leaf_size: int = LEAF_SIZE) -> Bvh:
    """Median split on the longest axis of the centroid bounds."""
    faces = np.asarray(faces.faces if isinstance(faces, TriSoupMesh) else faces, dtype=float)
    faces = faces.reshape(-1, 3, 3)
    if len(faces) == 0:
        raise ValueError("cannot build a BVH over zero faces")
    centroids = faces.mean(axis=1)
    flo = faces.min(axis=1)
    fhi = faces.max(axis=1)
    order = np.arange(len(faces))
    lo, hi, left, right, start, count = [], [], [], [], [], []

    def new_node() -> int:
        for arr in (lo, hi):
            arr.append(None)
        for arr in (left, right, start, count):
            arr.append(-1)
        return len(lo) - 1

    root = new_node()
    stack = [(root, 0, len(faces))]
    while stack:
        node, s, e = stack.pop()
        idx = order[s:e]
        lo[node] = flo[idx].min(axis=0)
        hi[node] = fhi[idx].max(axis=0)
        if e - s <= leaf_size:
            start[node], count[node] = s, e - s
            continue
        c = centroids[idx]
        axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        # Stable sort keeps the build deterministic for tied centroids.
        order[s:e] = idx[np.argsort(c[:, axis], kind="stable")]
        mid = (s + e) // 2
        l_node, r_node = new_node(), new_node()
        left[node], right[node], count[node] = l_node, r_node, 0
        stack.append((r_node, mid, e))
        stack.append((l_node, s, mid))
    # Pad boxes so flat, axis-aligned faces are never culled by rounding.
    lo_arr = np.array(lo)
    hi_arr = np.array(hi)
    pad = 1e-9 * max(1.0, float(np.abs(faces).max()))
    return Bvh(
        faces=faces,
        lo=lo_arr - pad,
        hi=hi_arr + pad,
        left=np.array(left),
        right=np.array(right),
        start=np.array(start),
        count=np.array(count),
        order=order,
    )


def _slab(lo, hi, origins, inv_dir, t_max):
    with np.errstate(invalid="ignore", over="ignore"):
        t1 = (lo - origins) * inv_dir
        t2 = (hi - origins) * inv_dir
    near = np.nanmax(np.fmin(t1, t2), axis=-1)
    far = np.nanmin(np.fmax(t1, t2), axis=-1)
    return (near <= far) & (far >= 0.0) & (near <= t_max)


def bvh_intersect_many(bvh: Bvh, origins, directions, t_max=None, eps: float = EPS_RAY):
    """All hits of many rays, traversing the tree breadth-first in lock-step.

    Args:
        origins, directions: ``(R, 3)`` arrays; directions must be unit length.
        t_max: optional ``(R,)`` upper bound on accepted ``t`` (exclusive).

    Returns:
        ``(ray_index, face_index, t)`` arrays sorted by ray then ``t``.
    """
    origins = np.atleast_2d(np.asarray(origins, dtype=float))
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    n = len(origins)
    t_max = np.full(n, np.inf) if t_max is None else np.broadcast_to(np.asarray(t_max, float), (n,))
    with np.errstate(divide="ignore"):
        inv_dir = 1.0 / directions

    rays = np.arange(n)
    nodes = np.zeros(n, dtype=np.int64)
    cand_rays, cand_faces = [], []
    while rays.size:
        keep = _slab(bvh.lo[nodes], bvh.hi[nodes], origins[rays], inv_dir[rays], t_max[rays])
        rays, nodes = rays[keep], nodes[keep]
        leaf = bvh.count[nodes] > 0
        if leaf.any():
            lr, ln = rays[leaf], nodes[leaf]
            cnt = bvh.count[ln]
            rep_rays = np.repeat(lr, cnt)
            offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
            cand_rays.append(rep_rays)
            cand_faces.append(bvh.order[np.repeat(bvh.start[ln], cnt) + offs])
        inner = ~leaf
        rays = np.concatenate([rays[inner], rays[inner]])
        nodes = np.concatenate([bvh.left[nodes[inner]], bvh.right[nodes[inner]]])

    if not cand_rays:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy(), np.zeros(0)
    cr = np.concatenate(cand_rays)
    cf = np.concatenate(cand_faces)
    hit, t, _, _ = intersect_batch(origins[cr], directions[cr], bvh.faces[cf], eps=eps)
    hit &= t < t_max[cr]
    cr, cf, t = cr[hit], cf[hit], t[hit]
    sort = np.lexsort((cf, t, cr))
    return cr[sort], cf[sort], t[sort]


class FaceHit(NamedTuple):
    t: float
    face: int


def bvh_intersect(bvh: Bvh, ray: Ray, t_max: float = np.inf) -> list[FaceHit]:
    """All forward hits of one ray, sorted ascending in ``t``."""
    _, faces, t = bvh_intersect_many(bvh, ray.origin[None], ray.direction[None], np.array([t_max]))
    return [FaceHit(float(ti), int(fi)) for ti, fi in zip(t, faces)]


def naive_intersect(faces: np.ndarray, ray: Ray, t_max: float = np.inf) -> list[FaceHit]:
    """Reference O(M) scan used to cross-check the BVH."""
    hit, t, _, _ = intersect_batch(ray.origin, ray.direction, np.asarray(faces, dtype=float))
    hit &= t < t_max
    idx = np.flatnonzero(hit)
    idx = idx[np.lexsort((idx, t[idx]))]
    return [FaceHit(float(t[i]), int(i)) for i in idx]


# --------------------------------------------------------------------------
# Wavefront OBJ
# --------------------------------------------------------------------------


def write_obj(path, objects: dict[str, TriSoupMesh]) -> None:
    """Write one or more named triangle soups as ``o``/``v``/``f`` records.

    Every triangle gets its own three vertices; indices are 1-based and
    global across objects.
    """
    lines = []
    base = 1
    for name, mesh in objects.items():
        lines.append(f"o {name}")
        lines.extend(f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.vertices)
        for i in range(len(mesh)):
            j = base + 3 * i
            lines.append(f"f {j} {j + 1} {j + 2}")
        base += 3 * len(mesh)
    Path(path).write_text("\n".join(lines) + "\n")


def read_obj(path) -> dict[str, TriSoupMesh]:
    """Read an OBJ written by :func:`write_obj` (or any triangulated OBJ).

    ``f`` entries may use the ``v/vt/vn`` form and negative indices.  Faces
    with more than three vertices are fan-triangulated.
    """
    verts: list[list[float]] = []
    groups: dict[str, list[tuple[int, int, int]]] = {}
    name = "default"
    for raw in Path(path).read_text().splitlines():
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] in ("o", "g"):
            name = parts[1] if len(parts) > 1 else "default"
        elif parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            idx = []
            for tok in parts[1:]:
                i = int(tok.split("/")[0])
                idx.append(i - 1 if i > 0 else len(verts) + i)
            for k in range(1, len(idx) - 1):
                groups.setdefault(name, []).append((idx[0], idx[k], idx[k + 1]))
    v = np.array(verts, dtype=float)
    return {k: TriSoupMesh(v[np.array(f)]) for k, f in groups.items()}
