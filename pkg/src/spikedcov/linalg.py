"""
Dense symmetric linear algebra used by the sampler and the estimators.

Orthogonal matrices act on the left through row-pair rotations, so every
primitive here works on plain ``numpy`` arrays and returns new arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .exceptions import InputError, InvariantError

__all__ = [
    "ORTHO_TOL",
    "Spectrum",
    "TwoByTwoEig",
    "apply_signed_rotation",
    "eig2x2_with_angle",
    "haar_sample",
    "jacobi_eigh",
    "orthogonality_defect",
    "reorthonormalize",
    "spectral_decompose",
]

ORTHO_TOL = 1e-8


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in descending order with matching eigenvector columns."""

    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.float64]

    def reconstruct(self) -> NDArray[np.float64]:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


@dataclass(frozen=True)
class TwoByTwoEig:
    """``[[a, b], [b, d]] = R(omega) diag(s1, s2) R(omega)^T`` with ``s1 >= s2``."""

    s1: float
    s2: float
    omega: float

    def reconstruct(self) -> NDArray[np.float64]:
        co, so = math.cos(self.omega), math.sin(self.omega)
        r = np.array([[co, -so], [so, co]])
        return r @ np.diag([self.s1, self.s2]) @ r.T


def orthogonality_defect(g: NDArray[np.float64]) -> float:
    """Frobenius norm of ``G^T G - I``."""
    g = np.asarray(g, dtype=np.float64)
    return float(np.linalg.norm(g.T @ g - np.eye(g.shape[1])))


def _as_symmetric(m) -> NDArray[np.float64]:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError("matrix has non-finite entries")
    scale = max(float(np.max(np.abs(m))), 1.0)
    if np.max(np.abs(m - m.T)) > 1e-10 * scale:
        raise InputError("matrix is not symmetric")
    return m


def _fix_signs(vectors: NDArray[np.float64]) -> NDArray[np.float64]:
    # largest-magnitude entry of every column made positive
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _sorted_spectrum(w: NDArray[np.float64], v: NDArray[np.float64]) -> Spectrum:
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order].copy(), _fix_signs(v[:, order]))


def spectral_decompose(m, method: str = "lapack") -> Spectrum:
    """Full eigendecomposition of a real symmetric matrix.

    Parameters
    ----------
    m : array_like, shape (p, p)
        Symmetric matrix with finite entries.
    method : {"lapack", "jacobi"}
        ``"lapack"`` calls ``numpy.linalg.eigh``; ``"jacobi"`` runs the
        cyclic Jacobi iteration of :func:`jacobi_eigh` (slow, reference only).

    Returns
    -------
    Spectrum
        Descending eigenvalues. Each eigenvector has its largest-magnitude
        entry positive; ties keep the solver's order.
    """
    m = _as_symmetric(m)
    if method == "lapack":
        w, v = np.linalg.eigh(m)
    elif method == "jacobi":
        w, v = jacobi_eigh(m)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _sorted_spectrum(w, v)


def eig2x2_with_angle(a: float, b: float, d: float) -> TwoByTwoEig:
    """Closed-form eigendecomposition of the symmetric matrix ``[[a, b], [b, d]]``.

    The rotation angle is half of ``atan2(2b, a - d)`` and lies in (-pi/2, pi/2].
    """
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    r = math.hypot(half, b)
    omega = 0.5 * math.atan2(2.0 * b, a - d)
    if omega <= -0.5 * math.pi:
        omega += math.pi
    return TwoByTwoEig(mean + r, mean - r, omega)


def apply_signed_rotation(
    g: NDArray[np.float64],
    i: int,
    j: int,
    theta: float,
    eps1: int = 1,
    eps2: int = 1,
) -> NDArray[np.float64]:
    """Replace rows ``i, j`` of ``g`` by ``diag(eps1, eps2) R(theta)`` applied to them.

    ``R(theta) = [[cos, -sin], [sin, cos]]``. Returns a new array.
    """
    if i == j:
        raise IndexError("rotation rows must differ")
    if eps1 not in (-1, 1) or eps2 not in (-1, 1):
        raise ValueError("signs must be +1 or -1")
    out = np.array(g, dtype=np.float64, copy=True)
    ct, st = math.cos(theta), math.sin(theta)
    ri, rj = out[i].copy(), out[j].copy()
    out[i] = eps1 * (ct * ri - st * rj)
    out[j] = eps2 * (st * ri + ct * rj)
    return out


def reorthonormalize(g: NDArray[np.float64], tol: float = 1e-3) -> NDArray[np.float64]:
    """Orthogonal factor of the QR decomposition of ``g`` with ``diag(R) > 0``.

    Raises InvariantError when ``||G^T G - I||_F >= tol``: drift that large
    means something other than round-off went wrong.
    """
    g = np.asarray(g, dtype=np.float64)
    defect = orthogonality_defect(g)
    if not defect < tol:
        raise InvariantError(f"matrix too far from orthogonal (defect {defect:.3e})")
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def haar_sample(p: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Draw a Haar-distributed ``p x p`` orthogonal matrix."""
    if p < 1:
        raise ValueError("dimension must be positive")
    z = rng.standard_normal((p, p))
    q, r = np.linalg.qr(z)
    return q * np.sign(np.diag(r))


def haar_sample_batch(size: int, p: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """``size`` independent Haar matrices stacked along the first axis."""
    z = rng.standard_normal((size, p, p))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diagonal(r, axis1=1, axis2=2))
    return q * d[:, None, :]


def jacobi_eigh(
    m: NDArray[np.float64], tol: float = 1e-14, max_sweeps: int = 100
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Cyclic Jacobi eigensolver built from 2x2 rotations.

    Returns unsorted eigenvalues and eigenvector columns, like ``eigh``.
    """
    a = np.array(m, dtype=np.float64, copy=True)
    p = a.shape[0]
    v = np.eye(p)
    norm = np.linalg.norm(a)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * max(norm, 1e-300):
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                if a[i, j] == 0.0:
                    continue
                e = eig2x2_with_angle(a[i, i], a[i, j], a[j, j])
                co, so = math.cos(e.omega), math.sin(e.omega)
                # columns i, j of the rotation hold the 2x2 eigenvectors
                ci, cj = a[:, i].copy(), a[:, j].copy()
                a[:, i] = co * ci + so * cj
                a[:, j] = -so * ci + co * cj
                ri, rj = a[i, :].copy(), a[j, :].copy()
                a[i, :] = co * ri + so * rj
                a[j, :] = -so * ri + co * rj
                a[i, j] = a[j, i] = 0.0
                vi, vj = v[:, i].copy(), v[:, j].copy()
                v[:, i] = co * vi + so * vj
                v[:, j] = -so * vi + co * vj
    return np.diag(a).copy(), v
