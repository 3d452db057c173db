"""Dense matrix and operator kernels for the pilot design stack.

All routines work on complex128 ndarrays.  A pilot matrix is B x n
(training length by transmit antennas); acting on vectorized channels
lifts it by a Kronecker identity block, and the adjoint of that lift is
the block partial trace.  Both directions are needed by every gradient
computation downstream, so they live here together with the shift
matrices that express correlation lags and two small iterative solvers.
"""

import warnings

import numpy as np
import scipy.linalg


def kron(a, b):
    """Kronecker product of two 2-D arrays.

    Parameters
    ----------
    a, b : ndarray
        Input matrices.

    Returns
    -------
    ndarray
        Matrix of shape (a.shape[0]*b.shape[0], a.shape[1]*b.shape[1])
        with blocks a[i, j] * b.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("kron expects 2-D arrays")
    out = a[:, None, :, None] * b[None, :, None, :]
    return out.reshape(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1])


def embed_pilot(p, n_r):
    """Lift a pilot matrix to the operator acting on vectorized channels.

    For P of shape (B, n_T) returns P (x) I_{n_R} of shape
    (B*n_R, n_T*n_R) without calling a general Kronecker routine.

    Parameters
    ----------
    p : ndarray
        Pilot matrix, B x n_T.
    n_r : int
        Number of receive antennas.

    Returns
    -------
    ndarray
        The embedded operator, complex128.
    """
    p = np.asarray(p, dtype=np.complex128)
    if p.ndim != 2:
        raise ValueError("pilot matrix must be 2-D")
    if n_r < 1:
        raise ValueError("n_r must be positive")
    b, n_t = p.shape
    out = np.zeros((b, n_r, n_t, n_r), dtype=np.complex128)
    rr = np.arange(n_r)
    out[:, rr, :, rr] = p[None, :, :]
    return out.reshape(b * n_r, n_t * n_r)


def adjoint_embed(z, n_r):
    """Adjoint of :func:`embed_pilot`: block partial trace.

    Satisfies <embed_pilot(P, n_r), Z> = <P, adjoint_embed(Z, n_r)> for
    the trace inner product <A, B> = trace(A^H B).

    Parameters
    ----------
    z : ndarray
        Matrix of shape (B*n_r, n_T*n_r).
    n_r : int
        Receive antenna count used in the embedding.

    Returns
    -------
    ndarray
        B x n_T matrix whose (b, t) entry is the trace of the (b, t)
        block of z.
    """
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim != 2:
        raise ValueError("z must be 2-D")
    if n_r < 1:
        raise ValueError("n_r must be positive")
    if z.shape[0] % n_r or z.shape[1] % n_r:
        raise ValueError(
            f"shape {z.shape} is not divisible into {n_r}x{n_r} blocks"
        )
    b = z.shape[0] // n_r
    n_t = z.shape[1] // n_r
    return np.einsum("irjr->ij", z.reshape(b, n_r, n_t, n_r))


def shift_matrix(b, i):
    """Shift (lag) matrix J_i of size b x b.

    Entry (a, c) equals 1 when c - a = i, so J_i x advances x by i
    samples with zero fill and J_{-i} = J_i().T.

    Parameters
    ----------
    b : int
        Matrix size (training length).
    i : int
        Lag, |i| < b.

    Returns
    -------
    ndarray
        Real float64 shift matrix.
    """
    if b < 1:
        raise ValueError("b must be positive")
    if abs(i) >= b:
        raise ValueError(f"lag {i} out of range for size {b}")
    return np.eye(b, k=i)


def power_iteration_opnorm(apply_op, shape, tol=1e-8, max_iter=1000):
    """Largest eigenvalue of a self-adjoint PSD operator given by its action.

    Parameters
    ----------
    apply_op : callable
        Maps an ndarray of the given shape to another of the same shape.
        Must be linear, self-adjoint and positive semidefinite with
        respect to the trace inner product.
    shape : tuple of int
        Shape of the operator's domain elements.
    tol : float
        Relative residual ||T v - lam v|| / lam at which to stop.
    max_iter : int
        Iteration cap; on hitting it a warning is issued and the best
        estimate returned.

    Returns
    -------
    float
        Estimated operator norm (top eigenvalue).
    """
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ValueError("degenerate start vector")
    v = v / nv
    lam = 0.0
    for _ in range(max_iter):
        w = apply_op(v)
        lam = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw <= 1e-300:
            return 0.0
        res = np.linalg.norm(w - lam * v)
        if res <= tol * max(abs(lam), 1e-300):
            return lam
        v = w / nw
    warnings.warn(
        f"power iteration did not reach tol={tol} in {max_iter} iterations; "
        f"returning best estimate {lam:.6e}",
        RuntimeWarning,
        stacklevel=2,
    )
    return lam


def hermitian_solve(a, rhs):
    """Solve A X = RHS for Hermitian positive definite A via Cholesky.

    A single diagonal jitter of 1e-12 * trace(A)/n is added if the first
    factorization fails; a second failure raises.

    Parameters
    ----------
    a : ndarray
        Hermitian positive (semi)definite matrix.
    rhs : ndarray
        Right-hand side, vector or matrix.

    Returns
    -------
    ndarray
        Solution with the shape of rhs.
    """
    a = np.asarray(a, dtype=np.complex128)
    rhs = np.asarray(rhs, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("a must be square")
    if rhs.shape[0] != a.shape[0]:
        raise ValueError("rhs does not conform with a")
    try:
        c, low = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        jitter = 1e-12 * float(np.trace(a).real) / a.shape[0]
        a_j = a + jitter * np.eye(a.shape[0])
        try:
            c, low = scipy.linalg.cho_factor(a_j, lower=True, check_finite=False)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as err:
            raise np.linalg.LinAlgError(
                "matrix is singular even after diagonal jitter"
            ) from err
    return scipy.linalg.cho_solve((c, low), rhs, check_finite=False)
