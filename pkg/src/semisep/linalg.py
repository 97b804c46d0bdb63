"""Dense complex linear algebra primitives.

Determinants via pivoted LU, matrix 2-modified determinants, Hermitian
eigendecomposition with a contract check, and polar factorization used to
split a potential into left/right factors.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import ContractError, DimensionError

__all__ = [
    "as_cmatrix",
    "det",
    "det2_matrix",
    "herm_eigs",
    "polar_factor",
]

HERMITICITY_RTOL = 1e-10


def as_cmatrix(m, name="matrix"):
    """Validate and return ``m`` as a 2-D complex array with finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ContractError(f"{name} contains non-finite entries")
    return a


def _require_square(a, name):
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")


def _is_lower_triangular(a):
    return not np.any(np.triu(a, 1))


def _is_upper_triangular(a):
    return not np.any(np.tril(a, -1))


def det(m) -> complex:
    """Determinant of a square complex matrix.

    Uses a pivoted LU factorization; triangular inputs short-circuit to the
    product of their diagonal, which keeps them exact.
    """
    a = as_cmatrix(m, "det input")
    _require_square(a, "det input")
    if a.shape[0] == 0:
        return 1.0 + 0.0j
    if _is_lower_triangular(a) or _is_upper_triangular(a):
        return complex(np.prod(np.diag(a)))
    lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    sign = 1.0 if np.sum(piv != np.arange(a.shape[0])) % 2 == 0 else -1.0
    return complex(sign * np.prod(np.diag(lu)))


def det2_matrix(m) -> complex:
    """2-modified determinant of I - M for a square matrix M.

    Returns det(I - M) * exp(tr M), which equals the product of
    (1 - lambda_i) e^{lambda_i} over the eigenvalues of M.
    """
    a = as_cmatrix(m, "det2 input")
    _require_square(a, "det2 input")
    eye = np.eye(a.shape[0], dtype=complex)
    return det(eye - a) * complex(np.exp(np.trace(a)))


def herm_eigs(m, rtol: float = HERMITICITY_RTOL):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Raises ContractError when ``||M - M*||`` exceeds ``rtol`` relative to
    ``||M||`` (the violation norm is reported in the message).
    """
    a = as_cmatrix(m, "herm_eigs input")
    _require_square(a, "herm_eigs input")
    defect = np.linalg.norm(a - a.conj().T)
    scale = max(np.linalg.norm(a), 1.0)
    if defect > rtol * scale:
        raise ContractError(
            f"matrix is not Hermitian: ||M - M*|| = {defect:.3e} "
            f"exceeds {rtol:.1e} * {scale:.3e}"
        )
    evals, evecs = np.linalg.eigh(0.5 * (a + a.conj().T))
    return evals, evecs


def polar_factor(vx, rtol: float = HERMITICITY_RTOL):
    """Split a square matrix V into (u, v) with u @ v = V and v = |V|^{1/2}.

    v is the Hermitian PSD principal square root of |V| = (V* V)^{1/2} and
    u = U_V |V|^{1/2} with U_V the partial isometry of the polar
    decomposition, zero-extended on ker |V|.  Hermitian inputs take the
    eigendecomposition route, so u = sign(V) |V|^{1/2} and u, v commute;
    general inputs go through the SVD.
    """
    a = as_cmatrix(vx, "polar input")
    _require_square(a, "polar input")
    n = a.shape[0]
    if n == 0:
        return a.copy(), a.copy()
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros_like(a), np.zeros_like(a)
    if np.linalg.norm(a - a.conj().T) <= rtol * scale:
        lam, q = np.linalg.eigh(0.5 * (a + a.conj().T))
        root = np.sqrt(np.abs(lam))
        u = (q * (np.sign(lam) * root)) @ q.conj().T
        v = (q * root) @ q.conj().T
        return u, v
    w, sig, zh = np.linalg.svd(a)
    # zero-extension of the isometry on the kernel of |V|
    keep = sig > sig[0] * 1e-14
    root = np.sqrt(sig)
    u = (w[:, keep] * root[keep]) @ zh[keep, :]
    v = (zh.conj().T * root) @ zh
    return u, v
