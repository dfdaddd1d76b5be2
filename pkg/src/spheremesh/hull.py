"""Incremental 3D convex hull with a conflict graph.

Points are inserted in a seeded random order; each undecided point
remembers which current faces it lies strictly above (its conflicts),
so every insertion touches only the visible region.  For point sets on
the unit sphere the hull boundary is exactly the spherical Delaunay
triangulation, which is how the meshing layer uses it.

Near-coplanar degeneracies are resolved by a strict visibility test:
a point within ``eps`` of a face plane does not see that face, and a
point strictly outside the hull always sees some other face, so exact
cocircular quadruples get a valid (insertion-order dependent but
deterministic) diagonal.
"""

import numpy as np

from .errors import MeshError

EPS_SCALE = 1e-12


def convex_hull(points, seed=0):
    """Faces of the convex hull, outward oriented.

    Parameters
    ----------
    points : (n, 3) array_like, n >= 4, not all coplanar.
    seed : int
        Seed of the insertion order (fixed seed keeps runs bit-identical).

    Returns
    -------
    faces : (F, 3) int ndarray
        Vertex ids per face, counterclockwise seen from outside.

    Raises
    ------
    MeshError
        Fewer than 4 points or a degenerate (coplanar) point set.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n = pts.shape[0]
    if n < 4:
        raise MeshError(f"convex hull needs at least 4 points, got {n}")
    eps = EPS_SCALE * max(float(np.abs(pts).max()), 1.0)

    first = _initial_simplex(pts, eps)
    builder = _Builder(pts, eps)
    builder.seed_simplex(first)

    rng = np.random.default_rng(seed)
    rest = np.setdiff1d(np.arange(n), first)
    for p in rng.permutation(rest):
        builder.insert(int(p))
    return builder.faces()


def _initial_simplex(pts, eps):
    i0 = int(np.lexsort(pts.T[::-1])[0])
    d = np.linalg.norm(pts - pts[i0], axis=1)
    i1 = int(np.argmax(d))
    if d[i1] <= eps:
        raise MeshError("degenerate point set: all points coincide")
    axis = (pts[i1] - pts[i0]) / d[i1]
    off = pts - pts[i0]
    perp = np.linalg.norm(off - np.outer(off @ axis, axis), axis=1)
    i2 = int(np.argmax(perp))
    if perp[i2] <= eps:
        raise MeshError("degenerate point set: all points collinear")
    normal = np.cross(pts[i1] - pts[i0], pts[i2] - pts[i0])
    normal /= np.linalg.norm(normal)
    height = np.abs(off @ normal)
    i3 = int(np.argmax(height))
    if height[i3] <= eps:
        raise MeshError("degenerate point set: all points coplanar")
    return np.array([i0, i1, i2, i3])


class _Builder:
    def __init__(self, pts, eps):
        self.pts = pts
        self.eps = eps
        self.tri = []  # (a, b, c) per face
        self.nbr = []  # neighbor face across edges (a,b), (b,c), (c,a)
        self.normal = []
        self.offset = []
        self.alive = []
        self.conflicts = []  # point ids strictly above the face, fixed at birth
        self.point_faces = {}  # point id -> face ids it has conflicted with
        self.absorbed = 0

    def seed_simplex(self, ids):
        pts = self.pts
        a, b, c, d = ids
        if np.dot(np.cross(pts[b] - pts[a], pts[c] - pts[a]), pts[d] - pts[a]) > 0:
            b, c = c, b
        tris = [(a, b, c), (a, d, b), (b, d, c), (c, d, a)]
        candidates = np.setdiff1d(np.arange(len(pts)), np.array(ids))
        for t in tris:
            self._new_face(t, candidates)
        # wire neighbors by shared directed edges
        edge_owner = {}
        for f, t in enumerate(self.tri):
            for e in range(3):
                edge_owner[(t[e], t[(e + 1) % 3])] = f
        for f, t in enumerate(self.tri):
            for e in range(3):
                self.nbr[f][e] = edge_owner[(t[(e + 1) % 3], t[e])]

    def _new_face(self, verts, candidates):
        pts = self.pts
        a, b, c = verts
        normal = np.cross(pts[b] - pts[a], pts[c] - pts[a])
        norm = np.linalg.norm(normal)
        if norm > 0:
            normal = normal / norm
        offset = float(normal @ pts[a])
        fid = len(self.tri)
        if len(candidates):
            above = candidates[pts[candidates] @ normal - offset > self.eps]
        else:
            above = candidates
        self.tri.append(tuple(int(v) for v in verts))
        self.nbr.append([-1, -1, -1])
        self.normal.append(normal)
        self.offset.append(offset)
        self.alive.append(True)
        self.conflicts.append(above)
        for p in above:
            self.point_faces.setdefault(int(p), []).append(fid)
        return fid

    def insert(self, p):
        seeds = [f for f in self.point_faces.pop(p, ()) if self.alive[f]]
        if not seeds:
            self.absorbed += 1
            return
        visible = self._visible_region(p, seeds)
        if not visible:
            return
        horizon = self._clean_horizon(p, visible)

        candidates = np.array([], dtype=np.intp)
        for f in visible:
            candidates = np.union1d(candidates, self.conflicts[f])
        for _, _, g, _ in horizon:
            candidates = np.union1d(candidates, self.conflicts[g])
        candidates = candidates[candidates != p]

        for f in visible:
            self.alive[f] = False
        edge_pos = {}
        for u, v, g, _ in horizon:
            fid = self._new_face((u, v, p), candidates)
            self.nbr[fid][0] = g
            t = self.tri[g]
            self.nbr[g][t.index(v)] = fid  # g's edge (v, u)
            edge_pos[(v, p)] = (fid, 1)
            edge_pos[(p, u)] = (fid, 2)
        for (u, v), (fid, e) in edge_pos.items():
            self.nbr[fid][e] = edge_pos[(v, u)][0]

    def _visible_region(self, p, seeds):
        """Flood-fill the faces strictly visible from p, starting at the
        conflict seeds (the region of an outside point is edge-connected,
        but the conflict lists alone can miss marginal faces)."""
        pt = self.pts[p]
        visible = set()
        stack = list(seeds)
        while stack:
            f = stack.pop()
            if f in visible or not self.alive[f]:
                continue
            if pt @ self.normal[f] - self.offset[f] > self.eps:
                visible.add(f)
                stack.extend(self.nbr[f])
        if not visible:
            # every seed sits within eps of its plane: treat as interior
            self.absorbed += 1
        return visible

    def _clean_horizon(self, p, visible):
        """Horizon edges of the visible region, enlarging it over
        near-coplanar neighbors until the boundary is a disjoint union
        of vertex-simple loops (pinches break the cone stitching)."""
        if not visible:
            return []
        pt = self.pts[p]
        for _ in range(100):
            horizon = []
            for f in visible:
                t = self.tri[f]
                for e in range(3):
                    g = self.nbr[f][e]
                    if g not in visible:
                        horizon.append((t[e], t[(e + 1) % 3], g, f))
            sources = [u for u, _, _, _ in horizon]
            if len(set(sources)) == len(sources):
                return horizon
            # pinched vertex: swallow the least-far invisible face next
            # to the boundary and retry
            ring = {g for _, _, g, _ in horizon}
            extra = max(ring, key=lambda g: pt @ self.normal[g] - self.offset[g])
            if pt @ self.normal[extra] - self.offset[extra] < -10.0 * self.eps:
                raise MeshError(
                    "convex hull horizon is pinched beyond repair "
                    "(degenerate point configuration)"
                )
            visible.add(extra)
        raise MeshError("convex hull horizon failed to stabilize")

    def faces(self):
        out = np.array(
            [t for t, ok in zip(self.tri, self.alive) if ok], dtype=np.intp
        )
        return out
