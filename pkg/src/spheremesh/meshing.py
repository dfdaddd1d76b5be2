"""Meshing a parameterized cloud: spherical Delaunay triangulation,
induced triangulations, interpolation through the parameterization,
quad meshes from a cube-sphere template, and multilevel icosphere
representations.
"""

import numpy as np
from scipy.spatial import cKDTree

from .errors import MeshError
from .hull import convex_hull
from .mesh import SurfaceMesh

_BARY_TOL = 1e-10
_VERTEX_SNAP = 1e-12


def spherical_delaunay(points):
    """Delaunay triangulation of unit-sphere points.

    Realized as the boundary of the 3D convex hull, which coincides
    with the spherical Delaunay triangulation for points on a sphere.
    Every input point must end up a hull vertex.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 4:
        raise MeshError("need at least 4 points on the sphere")
    norms = np.linalg.norm(pts, axis=1)
    if np.abs(norms - 1.0).max() > 1e-6:
        raise MeshError("points are not on the unit sphere")
    faces = convex_hull(pts)
    used = np.unique(faces)
    if used.size != len(pts):
        missing = np.setdiff1d(np.arange(len(pts)), used)
        raise MeshError(
            f"{missing.size} points (e.g. {missing[0]}) were absorbed by "
            "the hull; coincident or degenerate spherical positions"
        )
    return SurfaceMesh(pts, faces)


def sphere_triangulation(sphere_map):
    """Spherical Delaunay mesh of a parameterization, reusing the hull
    the pipeline already built when available (so induced and spherical
    meshes always share one connectivity)."""
    faces = sphere_map.delaunay_faces
    if faces is None:
        return spherical_delaunay(sphere_map.images)
    if np.unique(faces).size != sphere_map.n:
        raise MeshError("cached triangulation does not cover all points")
    return SurfaceMesh(sphere_map.images, faces)


def induce_mesh(cloud, sphere_map):
    """Triangulation of the original cloud induced by its spherical
    parameterization (same connectivity as the spherical Delaunay mesh)."""
    return SurfaceMesh(cloud.points, sphere_triangulation(sphere_map).faces)


class SphereInterpolator:
    """Maps unit-sphere samples to cloud-space positions.

    A sample direction is located on the parameterization's spherical
    Delaunay hull (central ray against the candidate faces nearest by
    centroid direction, falling back to a full scan), and its
    barycentric weights transfer to the corresponding original cloud
    points.  Samples that defeat the strict test numerically are
    snapped to the least-violating face and counted in ``snapped``.
    """

    def __init__(self, sphere_map, candidates=16):
        self.images = np.asarray(sphere_map.images, dtype=np.float64)
        self.cloud_points = sphere_map.cloud.points
        self.mesh = sphere_triangulation(sphere_map)
        self.candidates = candidates
        self.snapped = 0
        f = self.mesh.faces
        self._corners = self.images[f]  # (F, 3, 3)
        centroids = self._corners.mean(axis=1)
        self._centroid_tree = cKDTree(
            centroids / np.linalg.norm(centroids, axis=1, keepdims=True)
        )
        a, b, c = self._corners[:, 0], self._corners[:, 1], self._corners[:, 2]
        self._normals = np.cross(b - a, c - a)
        self._nn = np.einsum("ij,ij->i", self._normals, self._normals)
        self._offsets = np.einsum("ij,ij->i", self._normals, a)

    def _bary(self, face_ids, x):
        """Barycentric coordinates of plane points x in the given faces."""
        a = self._corners[face_ids, 0]
        b = self._corners[face_ids, 1]
        c = self._corners[face_ids, 2]
        n = self._normals[face_ids]
        nn = self._nn[face_ids]
        beta = np.einsum("ij,ij->i", np.cross(x - a, c - a), n) / nn
        gamma = np.einsum("ij,ij->i", np.cross(b - a, x - a), n) / nn
        return np.stack([1.0 - beta - gamma, beta, gamma], axis=1)

    def _try_faces(self, face_ids, s):
        """Ray-from-origin test of one sample against candidate faces;
        returns (face, bary) or None."""
        denom = self._normals[face_ids] @ s
        ok = denom > 0
        if not ok.any():
            return None
        face_ids = face_ids[ok]
        t = self._offsets[face_ids] / denom[ok]
        x = t[:, None] * s
        bary = self._bary(face_ids, x)
        hits = np.flatnonzero((t > 0) & (bary.min(axis=1) >= -_BARY_TOL))
        if hits.size == 0:
            return None
        h = hits[0]
        return int(face_ids[h]), bary[h]

    def locate(self, samples):
        """(face id, barycentric weights) per unit-sphere sample."""
        s = np.asarray(samples, dtype=np.float64)
        s = s / np.linalg.norm(s, axis=1, keepdims=True)
        m = len(s)
        k = min(self.candidates, self.mesh.n_faces)
        _, cand = self._centroid_tree.query(s, k=k)
        cand = np.atleast_2d(cand)
        faces_out = np.empty(m, dtype=np.intp)
        bary_out = np.empty((m, 3))
        all_faces = np.arange(self.mesh.n_faces)
        for i in range(m):
            hit = self._try_faces(cand[i], s[i])
            if hit is None:
                hit = self._try_faces(all_faces, s[i])
            if hit is None:
                hit = self._snap(s[i])
            faces_out[i], bary_out[i] = hit
        return faces_out, bary_out

    def _snap(self, s):
        denom = self._normals @ s
        ok = denom > 0
        t = np.where(ok, self._offsets / np.where(ok, denom, 1.0), 0.0)
        x = t[:, None] * s
        bary = self._bary(np.arange(self.mesh.n_faces), x)
        worst = bary.min(axis=1)
        worst[~ok] = -np.inf
        fid = int(np.argmax(worst))
        clamped = np.clip(bary[fid], 0.0, None)
        self.snapped += 1
        return fid, clamped / clamped.sum()

    def __call__(self, samples):
        """Cloud-space positions of unit-sphere samples."""
        faces, bary = self.locate(samples)
        verts = self.mesh.faces[faces]
        # a sample sitting on a parameterization image returns that
        # cloud point bit-exactly
        top = bary.argmax(axis=1)
        exact = bary[np.arange(len(bary)), top] >= 1.0 - _VERTEX_SNAP
        out = np.einsum(
            "ij,ijk->ik", bary, self.cloud_points[verts]
        )
        if exact.any():
            rows = np.flatnonzero(exact)
            out[rows] = self.cloud_points[verts[rows, top[rows]]]
        return out


def interpolate_to_cloud(sphere_map, samples):
    """One-shot interpolation of sphere samples onto the cloud."""
    return SphereInterpolator(sphere_map)(samples)


def cube_sphere(resolution):
    """Equiangular cube-sphere quad template on the unit sphere.

    6 * resolution^2 quads over 6 * resolution^2 + 2 vertices, all
    quads oriented outward.
    """
    if resolution < 1:
        raise MeshError("resolution must be at least 1")
    r = resolution
    vert_ids = {}
    verts = []

    def vid(key):
        if key not in vert_ids:
            vert_ids[key] = len(verts)
            p = np.tan(0.25 * np.pi * np.array(key, dtype=np.float64) / r)
            verts.append(p / np.linalg.norm(p))
        return vert_ids[key]

    # (u axis, v axis) per (axis, sign) so that u x v points outward
    axes = {
        (0, 1): (1, 2), (0, -1): (2, 1),
        (1, 1): (2, 0), (1, -1): (0, 2),
        (2, 1): (0, 1), (2, -1): (1, 0),
    }
    steps = [-r + 2 * j for j in range(r + 1)]
    faces = []
    for (axis, sign), (ua, va) in axes.items():
        for j in range(r):
            for kk in range(r):
                quad = []
                for du, dv in ((0, 0), (1, 0), (1, 1), (0, 1)):
                    key = [0, 0, 0]
                    key[axis] = sign * r
                    key[ua] = steps[j + du]
                    key[va] = steps[kk + dv]
                    quad.append(vid(tuple(key)))
                faces.append(quad)
    return SurfaceMesh(np.array(verts), np.array(faces, dtype=np.intp))


def quad_mesh(sphere_map, resolution):
    """Closed quad mesh over the cloud via the cube-sphere template."""
    template = cube_sphere(resolution)
    positions = interpolate_to_cloud(sphere_map, template.vertices)
    return SurfaceMesh(positions, template.faces)


_ICO_T = (1.0 + np.sqrt(5.0)) / 2.0
ICOSAHEDRON_VERTICES = np.array(
    [
        [-1, _ICO_T, 0], [1, _ICO_T, 0], [-1, -_ICO_T, 0], [1, -_ICO_T, 0],
        [0, -1, _ICO_T], [0, 1, _ICO_T], [0, -1, -_ICO_T], [0, 1, -_ICO_T],
        [_ICO_T, 0, -1], [_ICO_T, 0, 1], [-_ICO_T, 0, -1], [-_ICO_T, 0, 1],
    ],
    dtype=np.float64,
)
ICOSAHEDRON_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ],
    dtype=np.intp,
)


def icosphere(subdivisions=0):
    """Loop-subdivided icosahedron renormalized to the unit sphere.

    Vertex counts run 12, 42, 162, 642, 2562, ... (x4 faces per level).
    """
    verts = ICOSAHEDRON_VERTICES / np.linalg.norm(
        ICOSAHEDRON_VERTICES, axis=1, keepdims=True
    )
    mesh = SurfaceMesh(verts, ICOSAHEDRON_FACES)
    for _ in range(subdivisions):
        mesh = loop_subdivide(mesh)
        mesh = SurfaceMesh(
            mesh.vertices / np.linalg.norm(mesh.vertices, axis=1, keepdims=True),
            mesh.faces,
        )
    return mesh


def loop_subdivide(mesh):
    """One round of Loop subdivision of a closed triangle mesh."""
    if mesh.arity != 3:
        raise MeshError("loop subdivision needs a triangle mesh")
    v = mesh.vertices
    f = mesh.faces
    inc = mesh.edge_face_incidence()

    edge_vertex = {}
    new_points = []
    for edge, places in inc.items():
        if len(places) != 2:
            raise MeshError("loop subdivision needs a closed mesh")
        a, b = edge
        opposite = []
        for fid, e in places:
            opposite.append(f[fid, (e + 2) % 3])
        pos = 0.375 * (v[a] + v[b]) + 0.125 * (
            v[opposite[0]] + v[opposite[1]]
        )
        edge_vertex[edge] = len(v) + len(new_points)
        new_points.append(pos)

    # even-vertex smoothing with the valence-dependent beta
    neighbors = {}
    for a, b in inc:
        neighbors.setdefault(a, set()).add(b)
        neighbors.setdefault(b, set()).add(a)
    smoothed = np.empty_like(v)
    for i in range(len(v)):
        ring = sorted(neighbors[i])
        n = len(ring)
        beta = (0.625 - (0.375 + 0.25 * np.cos(2.0 * np.pi / n)) ** 2) / n
        smoothed[i] = (1.0 - n * beta) * v[i] + beta * v[ring].sum(axis=0)

    def mid(a, b):
        return edge_vertex[(a, b) if a < b else (b, a)]

    new_faces = []
    for a, b, c in f:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        new_faces.extend(
            [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        )
    all_verts = np.vstack([smoothed, np.array(new_points)])
    return SurfaceMesh(all_verts, np.array(new_faces, dtype=np.intp))


def multilevel(sphere_map, levels, base_subdivisions=3):
    """Multilevel cloud representations from progressively subdivided
    icospheres pushed through the parameterization.

    With the default 3 pre-subdivisions the vertex counts run
    642, 2562, 10242, 40962, 163842, ...; ``levels`` counts additional
    subdivisions beyond the base, so levels + 1 meshes come back.
    """
    if levels < 0:
        raise MeshError("levels must be nonnegative")
    interp = SphereInterpolator(sphere_map)
    sphere = icosphere(base_subdivisions)
    out = []
    for level in range(levels + 1):
        out.append(SurfaceMesh(interp(sphere.vertices), sphere.faces))
        if level < levels:
            sphere = loop_subdivide(sphere)
            sphere = SurfaceMesh(
                sphere.vertices
                / np.linalg.norm(sphere.vertices, axis=1, keepdims=True),
                sphere.faces,
            )
    return out
