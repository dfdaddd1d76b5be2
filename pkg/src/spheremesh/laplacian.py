"""Moving-least-squares derivative estimation and the discrete
Laplace-Beltrami operator on point clouds.

Each point's neighborhood is the graph of a height function f over its
tangent frame.  A weighted least-squares fit in the degree-2 basis
{1, x, y, x^2, xy, y^2} turns neighbor samples into derivative estimates
at the center, and the surface Laplacian follows from the graph metric.

Coefficient derivation
----------------------
For a graph (x, y, f(x, y)) the metric is

    g = [[1 + p^2, p q], [p q, 1 + q^2]],    W^2 = det g = 1 + p^2 + q^2,

with p = f_x, q = f_y, and the Laplace-Beltrami operator in divergence
form is  (1/W) sum_ij d_i (g^ij W d_j u).  Expanding the outer
derivatives (product and chain rule, with r = f_xx, s = f_xy, t = f_yy)
and collecting the coefficients of u_x, u_y, u_xx, u_xy, u_yy gives

    K  = (1 + q^2) r - 2 p q s + (1 + p^2) t        (curvature numerator)
    a1 = -p K / W^4          a2 = -q K / W^4
    a3 = (1 + q^2) / W^2     a4 = -2 p q / W^2      a5 = (1 + p^2) / W^2

so that  Delta u = a1 u_x + a2 u_y + a3 u_xx + a4 u_xy + a5 u_yy.
K / (2 W^3) is the mean curvature of the graph, which mean_curvature()
in the metrics module reuses.  A flat patch (p = q = 0, K = 0) reduces
to the planar Laplacian u_xx + u_yy; the expansion is cross-checked in
the tests by central differences of the divergence form and by the
sphere eigenvalue identity Delta x_i = -2 x_i.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .cloud import build_frames, build_index
from .errors import IllConditionedStencilError
from .weights import Weight, stencil_weights

BASIS_DIM = 6  # {1, x, y, x^2, xy, y^2}
MIN_STENCIL = 7  # must exceed the basis dimension
MAX_CONDITION = 1e12
DEFAULT_K = 25


def design_matrix(coords):
    """Evaluate the degree-2 basis at in-plane coordinates (..., k, 2)."""
    x = coords[..., 0]
    y = coords[..., 1]
    return np.stack(
        [np.ones_like(x), x, y, x * x, x * y, y * y], axis=-1
    )


def _fit_matrices(coords, dists, weight_spec):
    """Batched weighted LS: G maps neighbor samples to basis coefficients.

    The minimizer of sum_i w_i (A c - b)_i^2 is computed through the SVD
    of sqrt(D) A over in-plane coordinates scaled to unit extent, which
    reproduces span members to machine precision where forming the
    normal equations A^T D A would lose half the digits; the returned
    map is unscaled back to the input coordinates.

    Parameters
    ----------
    coords : (n, k, 2), dists : (n, k), weight_spec : Weight

    Returns
    -------
    G : (n, 6, k) ndarray
        ``coeffs = G @ samples`` are the basis coefficients over the
        unscaled coordinates.
    cond : (n,) ndarray
        Condition numbers at the normal-matrix (A^T D A) scale.
    """
    n, k = dists.shape
    if k < MIN_STENCIL:
        raise IllConditionedStencilError(
            f"stencil size {k} below minimum {MIN_STENCIL}"
        )
    extent = np.abs(coords).max(axis=(1, 2))
    if np.any(extent <= 0):
        raise IllConditionedStencilError("stencil has zero in-plane extent")
    a = design_matrix(coords / extent[:, None, None])
    sqrt_w = np.sqrt(stencil_weights(weight_spec, dists))
    u, s, vt = np.linalg.svd(sqrt_w[:, :, None] * a, full_matrices=False)
    smin = s[:, -1]
    cond = np.where(smin > 0, (s[:, 0] / np.where(smin > 0, smin, 1.0)) ** 2, np.inf)
    bad = np.flatnonzero(~(cond < MAX_CONDITION))
    if bad.size:
        raise IllConditionedStencilError(
            f"ill-conditioned stencil at point {bad[0]} "
            f"(condition {cond[bad[0]]:.3g}); retry with larger k"
        )
    pinv = (vt.transpose(0, 2, 1) / s[:, None, :]) @ u.transpose(0, 2, 1)
    g = pinv * sqrt_w[:, None, :]
    # undo the coordinate scaling: degree-1 terms by 1/e, degree-2 by 1/e^2
    unscale = np.concatenate(
        [np.ones((n, 1)), 1.0 / extent[:, None].repeat(2, 1),
         1.0 / (extent * extent)[:, None].repeat(3, 1)], axis=1
    )
    return g * unscale[:, :, None], cond


@dataclass
class MlsFit:
    """Weighted LS fit of one stencil and its derivative functionals.

    ``derivative_rows`` has five rows (d/dx, d/dy, d2/dx2, d2/dxdy,
    d2/dy2 at the center) acting on neighbor sample vectors.
    """

    center: int
    coefficients: np.ndarray  # (6,)
    stencil: np.ndarray  # (k,) point ids
    derivative_rows: np.ndarray  # (5, k)


def _derivative_rows(g):
    """Derivative functionals from the coefficient map G (..., 6, k)."""
    return np.stack(
        [
            g[..., 1, :],
            g[..., 2, :],
            2.0 * g[..., 3, :],
            g[..., 4, :],
            2.0 * g[..., 5, :],
        ],
        axis=-2,
    )


def mls_fit(frame, weight_spec=Weight("proposed")):
    """Fit the frame's height function; return coefficients and the
    derivative rows for arbitrary samples on the same stencil."""
    g, _ = _fit_matrices(
        frame.local_coords[None], frame.neighbor_dists[None], weight_spec
    )
    coeffs = g[0] @ frame.heights
    return MlsFit(
        center=frame.center,
        coefficients=coeffs,
        stencil=frame.neighbor_ids,
        derivative_rows=_derivative_rows(g[0]),
    )


def lb_coefficients(p, q, r, s, t):
    """Closed-form Laplace-Beltrami coefficients for a graph metric.

    See the module docstring for the derivation.  Inputs are the first
    and second derivatives of the height function at the center;
    broadcasting over arrays is supported.

    Returns
    -------
    (a1, a2, a3, a4, a5) multiplying u_x, u_y, u_xx, u_xy, u_yy.
    """
    w2 = 1.0 + p * p + q * q
    k = (1.0 + q * q) * r - 2.0 * p * q * s + (1.0 + p * p) * t
    return (
        -p * k / (w2 * w2),
        -q * k / (w2 * w2),
        (1.0 + q * q) / w2,
        -2.0 * p * q / w2,
        (1.0 + p * p) / w2,
    )


def lb_row(frame, fit):
    """One row of the discrete LB operator as (stencil ids, values).

    The metric terms come from the height-function fit; the same
    derivative rows then act on arbitrary function samples.
    """
    c = fit.coefficients
    alphas = lb_coefficients(c[1], c[2], 2.0 * c[3], c[4], 2.0 * c[5])
    values = sum(a * row for a, row in zip(alphas, fit.derivative_rows))
    return fit.stencil, values


class SparseOperator:
    """Row-compressed n-by-n operator holding the discrete LB matrix.

    Row s has nonzeros only on the k-stencil of point s.  The matrix
    annihilates constants up to the LS ridge (tested, not enforced).
    """

    def __init__(self, matrix, stencils=None):
        self.matrix = matrix.tocsr()
        self.stencils = stencils

    @property
    def n(self):
        return self.matrix.shape[0]

    def row(self, i):
        """(column ids, values) of row i."""
        sl = slice(self.matrix.indptr[i], self.matrix.indptr[i + 1])
        return self.matrix.indices[sl], self.matrix.data[sl]

    def apply(self, u):
        return self.matrix @ u


def assemble_lb(cloud, k=DEFAULT_K, weight_spec=Weight("proposed"), index=None):
    """Assemble the discrete Laplace-Beltrami operator of a cloud.

    The cloud is centered and scaled to bounding radius 1 internally so
    all fit tolerances are scale-free; rows are mapped back to the
    original scale (uniform scaling by 1/sigma multiplies the surface
    Laplacian by sigma^2).

    Parameters
    ----------
    cloud : PointCloud
    k : int
        Stencil size (neighbors including the center).
    weight_spec : Weight
    index : SpatialIndex, optional
        Reuse an existing index over ``cloud``.

    Returns
    -------
    SparseOperator
    """
    normalized, _, radius = cloud.normalized()
    if index is None:
        index = build_index(cloud)
    # neighbor sets and their (distance, id) order are invariant under the
    # uniform rescaling, so the raw-cloud index can be queried directly
    nbr_idx, nbr_dist = index.knn_arrays(k)
    frames = build_frames(normalized.points, nbr_idx, nbr_dist / radius)
    return assemble_lb_from_frames(frames, weight_spec, scale=radius)


def assemble_lb_from_frames(frames, weight_spec=Weight("proposed"), scale=1.0):
    """Assemble the LB operator from prebuilt frames (coordinates already
    in whatever scale the frames carry; ``scale`` maps rows back)."""
    n, k = frames.heights.shape
    g, _ = _fit_matrices(frames.coords, frames.neighbor_dists, weight_spec)
    coeffs = np.einsum("npk,nk->np", g, frames.heights)
    p, q = coeffs[:, 1], coeffs[:, 2]
    r, s, t = 2.0 * coeffs[:, 3], coeffs[:, 4], 2.0 * coeffs[:, 5]
    a1, a2, a3, a4, a5 = lb_coefficients(p, q, r, s, t)
    rows = (
        a1[:, None] * g[:, 1, :]
        + a2[:, None] * g[:, 2, :]
        + a3[:, None] * 2.0 * g[:, 3, :]
        + a4[:, None] * g[:, 4, :]
        + a5[:, None] * 2.0 * g[:, 5, :]
    )
    rows = rows / (scale * scale)
    indptr = np.arange(0, n * k + 1, k)
    matrix = sparse.csr_matrix(
        (rows.ravel(), frames.neighbor_ids.ravel(), indptr), shape=(n, n)
    )
    matrix.sum_duplicates()
    return SparseOperator(matrix, stencils=frames.neighbor_ids)
