import numpy as np
import pytest


def uniform_sphere(n, seed=0):
    """Seeded uniform samples on the unit sphere."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def disk_grid(spacing, jitter=0.0, seed=0):
    """Planar grid covering the unit disk, optional jitter, plus an exact
    boundary ring.  Returns (points3d, boundary_mask)."""
    rng = np.random.default_rng(seed)
    ax = np.arange(-1.0, 1.0 + spacing / 2, spacing)
    xx, yy = np.meshgrid(ax, ax)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    if jitter:
        pts = pts + rng.uniform(-jitter * spacing, jitter * spacing, pts.shape)
    inside = np.hypot(pts[:, 0], pts[:, 1]) < 1.0 - 0.7 * spacing
    pts = pts[inside]
    m = int(np.ceil(2 * np.pi / spacing))
    theta = 2 * np.pi * np.arange(m) / m
    ring = np.column_stack([np.cos(theta), np.sin(theta)])
    plane = np.vstack([pts, ring])
    boundary = np.zeros(len(plane), dtype=bool)
    boundary[len(pts):] = True
    pts3 = np.column_stack([plane, np.zeros(len(plane))])
    return pts3, boundary


@pytest.fixture(scope="session")
def sphere_cloud_10k():
    from spheremesh import PointCloud

    return PointCloud(uniform_sphere(10000, seed=7))
