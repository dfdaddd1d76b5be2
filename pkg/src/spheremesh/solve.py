"""Constrained Laplace solves: Delta_PC u = 0 with Dirichlet-pinned points.

The reduced system (free rows and columns, pinned values moved to the
right-hand side) is non-symmetric, so the default path is a direct
sparse LU; a preconditioned restarted-GMRES path can be selected for
very large systems.  Complex fields are solved as two real solves
sharing one factorization.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import linalg as spla

from .errors import SolveError

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 2000


@dataclass
class ConstrainedSystem:
    """A Laplace system with a nonempty set of pinned points."""

    operator: object  # SparseOperator
    pinned_ids: np.ndarray
    pinned_values: np.ndarray
    free_ids: np.ndarray = field(default=None)

    def __post_init__(self):
        self.pinned_ids = np.asarray(self.pinned_ids, dtype=np.intp)
        self.pinned_values = np.asarray(self.pinned_values, dtype=np.complex128)
        if self.pinned_ids.size == 0:
            raise SolveError("pinned set is empty")
        if np.unique(self.pinned_ids).size != self.pinned_ids.size:
            raise SolveError("pinned ids repeat")
        if self.free_ids is None:
            mask = np.ones(self.operator.n, dtype=bool)
            mask[self.pinned_ids] = False
            self.free_ids = np.flatnonzero(mask)


def solve(system, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, method="direct"):
    """Solve the constrained system; returns the full complex field.

    Pinned entries are reproduced exactly.  The free-row residual of the
    returned field is checked against ``tol`` times the right-hand-side
    scale.

    Raises
    ------
    SolveError
        Singular reduced system, iterative non-convergence, or a
        residual beyond tolerance.
    """
    op = system.operator
    n = op.n
    out = np.zeros(n, dtype=np.complex128)
    out[system.pinned_ids] = system.pinned_values
    free = system.free_ids
    if free.size == 0:
        return out

    matrix = op.matrix.tocsc()
    a = matrix[free][:, free]
    b = matrix[free][:, system.pinned_ids]
    rhs = -(b @ system.pinned_values)
    scale = float(np.abs(rhs).max()) if rhs.size else 0.0

    if method == "direct":
        try:
            lu = spla.splu(a.tocsc())
        except RuntimeError as exc:  # SuperLU signals exact singularity this way
            raise SolveError(f"underdetermined: {exc}") from exc
        bound = max(tol * scale, 1e-300)
        x = _refined(lu, a, rhs.real, bound) + 1j * _refined(lu, a, rhs.imag, bound)
    elif method == "iterative":
        x = _solve_gmres(a, rhs, tol, max_iter)
    else:
        raise ValueError(f"unknown solver method {method!r}")

    if not np.isfinite(x).all():
        raise SolveError("underdetermined: factorization produced non-finite values")
    out[free] = x
    residual = float(np.abs(op.matrix[free] @ out).max())
    if residual > max(tol * scale, 1e-300):
        raise SolveError(
            f"residual {residual:.3g} exceeds tolerance {tol:g} * {scale:.3g}",
            residual=residual,
        )
    return out


def _refined(lu, a, b, bound):
    """LU solve plus iterative refinement until the residual meets bound."""
    x = lu.solve(b)
    for _ in range(3):
        r = b - a @ x
        if np.abs(r).max() <= bound:
            break
        x = x + lu.solve(r)
    return x


def _solve_gmres(a, rhs, tol, max_iter):
    try:
        ilu = spla.spilu(a.tocsc(), drop_tol=1e-6, fill_factor=30)
    except RuntimeError as exc:
        raise SolveError(f"underdetermined: {exc}") from exc
    precond = spla.LinearOperator(a.shape, ilu.solve)
    parts = []
    for part in (rhs.real, rhs.imag):
        x, info = spla.gmres(
            a, part, rtol=tol, atol=0.0, restart=50, maxiter=max_iter, M=precond
        )
        if info != 0:
            res = float(np.abs(a @ x - part).max())
            raise SolveError(
                f"GMRES did not converge within {max_iter} iterations "
                f"(residual {res:.3g})",
                residual=res,
            )
        parts.append(x)
    return parts[0] + 1j * parts[1]
