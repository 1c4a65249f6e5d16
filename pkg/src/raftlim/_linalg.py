"""Preconditioned conjugate-gradient wrapper with failure reporting."""

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .errors import SolverFailure


def solve_spd(A, b, x0=None, diag=None, tol=1e-10, maxiter=10000, label="spd"):
    """Solve A x = b for symmetric positive (semi)definite A by CG.

    Parameters
    ----------
    A : sparse matrix or LinearOperator
    b : ndarray
    x0 : ndarray, optional
        Warm start.
    diag : ndarray, optional
        Diagonal of A for Jacobi preconditioning. Entries <= 0 fall back
        to 1 so the preconditioner stays positive.
    tol : float
        Relative residual target.
    maxiter : int
    label : str
        Used in the failure report.

    Returns
    -------
    x : ndarray
    iterations : int
    """
    n = b.shape[0]
    count = {"it": 0}

    def _cb(_):
        count["it"] += 1

    M = None
    if diag is not None:
        d = np.where(diag > 0.0, diag, 1.0)
        inv = 1.0 / d
        M = LinearOperator((n, n), matvec=lambda v: inv * v)

    x, info = cg(A, b, x0=x0, rtol=tol, atol=0.0, maxiter=maxiter,
                 M=M, callback=_cb)
    if info != 0:
        bn = float(np.linalg.norm(b))
        rn = float(np.linalg.norm(b - A @ x)) if bn > 0 else 0.0
        raise SolverFailure(label, count["it"], rn / bn if bn > 0 else rn)
    return x, count["it"]
