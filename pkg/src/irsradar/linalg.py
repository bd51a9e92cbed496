"""Dense complex linear-algebra helpers.

Every routine works on plain ``numpy`` arrays. Vectorization is column-major
throughout: ``vec`` stacks columns, ``unvec`` inverts it.
"""

import numpy as np

_HERMITIAN_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when array shapes do not conform."""


def kron(a, b):
    """Kronecker product ``a ⊗ b``."""
    return np.kron(np.atleast_2d(a), np.atleast_2d(b))


def vec(a):
    """Stack the columns of ``a`` into a 1-D array."""
    a = np.asarray(a)
    if a.ndim == 1:
        return a.copy()
    return a.reshape(-1, order="F")


def unvec(c, rows, cols):
    """Reshape ``c`` into a ``rows x cols`` matrix so that ``vec(result) == c``."""
    c = np.asarray(c).reshape(-1)
    if c.size != rows * cols:
        raise DimensionError(
            f"cannot reshape vector of length {c.size} into {rows}x{cols}"
        )
    return c.reshape(rows, cols, order="F")


def commutation_matrix(p, q):
    """Return the ``pq x pq`` permutation ``K`` with ``K @ vec(A) == vec(A.T)``.

    ``A`` is any ``p x q`` matrix.
    """
    if p < 1 or q < 1:
        raise DimensionError("commutation matrix needs p, q >= 1")
    # vec(A)[i + j*p] = A[i, j]  and  vec(A.T)[j + i*q] = A[i, j]
    i, j = np.meshgrid(np.arange(p), np.arange(q), indexing="ij")
    rows = (j + i * q).ravel()
    cols = (i + j * p).ravel()
    k = np.zeros((p * q, p * q))
    k[rows, cols] = 1.0
    return k


def block_diag(blocks):
    """Assemble a block-diagonal matrix from a non-empty list of 2-D blocks."""
    blocks = [np.atleast_2d(b) for b in blocks]
    if not blocks:
        raise DimensionError("block_diag needs at least one block")
    n_rows = sum(b.shape[0] for b in blocks)
    n_cols = sum(b.shape[1] for b in blocks)
    dtype = np.result_type(*blocks)
    out = np.zeros((n_rows, n_cols), dtype=dtype)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def hermitian_part(a, tol=_HERMITIAN_TOL):
    """Return ``(a + a^H) / 2`` after checking ``a`` is Hermitian to ``tol`` (relative)."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    scale = max(np.max(np.abs(a)), 1.0) if a.size else 1.0
    if np.max(np.abs(a - a.conj().T)) > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return 0.5 * (a + a.conj().T)


def hermitian_extreme_eigs(a, tol=_HERMITIAN_TOL):
    """Smallest and largest eigenvalue of a Hermitian matrix.

    The input is symmetrized before the dense eigensolve, so roundoff-level
    asymmetry is tolerated.

    Returns
    -------
    (float, float)
        ``(min_eig, max_eig)``.
    """
    w = np.linalg.eigvalsh(hermitian_part(a, tol))
    return float(w[0]), float(w[-1])


def unit_modulus_project(z):
    """Map every entry to ``exp(j*arg(z))``; exact zeros go to 1."""
    z = np.asarray(z, dtype=complex)
    mag = np.abs(z)
    out = np.ones_like(z)
    nz = mag > 0
    # divide by the larger component first so |w| lies in [1, sqrt(2)];
    # a direct z / |z| breaks down for subnormal and near-overflow entries
    re, im = z[nz].real, z[nz].imag
    big = np.maximum(np.abs(re), np.abs(im))
    w = re / big + 1j * (im / big)
    out[nz] = w / np.abs(w)
    # entries already on the circle (to a few ulps) pass through untouched
    keep = np.abs(mag - 1.0) <= 4 * np.finfo(float).eps
    out[keep] = z[keep]
    return out


def is_unimodular(z, tol=1e-12):
    z = np.asarray(z)
    return bool(np.all(np.isfinite(z)) and np.all(np.abs(np.abs(z) - 1.0) <= tol))
