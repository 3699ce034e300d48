"""Singular values of tall matrices via a Jacobi eigensolver on the Gram matrix.

The default path never calls LAPACK's eigen/SVD drivers: the Gram matrix is
diagonalized by cyclic Jacobi rotations. Sweeps use the round-robin
("tournament") ordering, in which every round rotates ``k // 2`` disjoint
index pairs; disjoint rotations commute, so a whole round is applied as a
single orthogonal similarity transform. Every pair is still visited exactly
once per sweep.

The ``BIDIAGONAL`` method delegates to ``numpy.linalg.svd`` (Householder
bidiagonalization followed by divide-and-conquer) and exists as an
independent cross-check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NumericalFailure

MAX_SWEEPS = 50
OFF_DIAG_RTOL = 1e-14
SYMMETRY_TOL = 1e-12


class SvdMethod(str, enum.Enum):
    GRAM_EIGEN = "gram_eigen"
    BIDIAGONAL = "bidiagonal"


@dataclass(frozen=True)
class SingularSpectrum:
    values: np.ndarray
    method: SvdMethod

    @property
    def nuclear_norm(self) -> float:
        return float(np.sum(self.values))


def _round_robin_rounds(k: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings for one sweep; each round is a pair of index arrays (p, q), p < q."""
    m = k + (k % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < k and b < k:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        # Keep players[0] fixed, rotate the rest one position.
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def symmetric_eigenvalues(S: np.ndarray) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix, sorted descending.

    Raises:
        InvalidInput: non-square, non-finite, or asymmetric beyond 1e-12.
        NumericalFailure: off-diagonal mass not below ``1e-14 * ||S||_F``
            after 50 sweeps.
    """
    a = np.array(S, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix contains non-finite entries")
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL:
        raise InvalidInput("matrix is not symmetric")
    k = a.shape[0]
    a = 0.5 * (a + a.T)
    if k == 1:
        return a[0].copy()

    target = OFF_DIAG_RTOL * float(np.linalg.norm(a))
    rounds = _round_robin_rounds(k)
    eye = np.eye(k)
    for _ in range(MAX_SWEEPS):
        if _off_diagonal_norm(a) <= target:
            break
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            with np.errstate(over="ignore"):
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                abs_theta = np.abs(theta)
                # For huge theta, t ~ 1/(2 theta); the masked theta**2 may overflow.
                big = abs_theta > 1e150
                root = np.sqrt(np.where(big, 1.0, theta * theta) + 1.0)
            t = np.where(big, 0.5 / np.where(big, theta, 1.0),
                         np.sign(theta) / (abs_theta + np.where(big, 0.0, root)))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            J = eye.copy()
            J[p, p] = c
            J[q, q] = c
            J[p, q] = s
            J[q, p] = -s
            a = J.T @ a @ J
            a = 0.5 * (a + a.T)
            # Rotation zeroes the pivot exactly in exact arithmetic.
            a[p, q] = 0.0
            a[q, p] = 0.0
    else:
        if _off_diagonal_norm(a) > target:
            raise NumericalFailure(
                f"Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
            )
    return np.sort(np.diag(a))[::-1].copy()


def singular_values(M: np.ndarray, method: SvdMethod | str = SvdMethod.GRAM_EIGEN) -> SingularSpectrum:
    """The ``min(n, k)`` singular values of ``M``, sorted descending.

    ``GRAM_EIGEN`` forms the smaller Gram matrix (``M.T @ M`` when ``n >= k``)
    and takes square roots of its eigenvalues. Eigenvalues below the
    round-off floor ``size * eps * max_eigenvalue`` are indistinguishable
    from zero and are set to it, so rank-deficient inputs do not pick up
    spurious ``sqrt(eps)``-sized singular values.
    """
    m = np.asarray(M, dtype=np.float64)
    if m.ndim != 2 or 0 in m.shape:
        raise InvalidInput(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInput("matrix contains non-finite entries")
    method = SvdMethod(method)
    if method is SvdMethod.BIDIAGONAL:
        vals = np.linalg.svd(m, compute_uv=False)
    else:
        gram = m.T @ m if m.shape[0] >= m.shape[1] else m @ m.T
        gram = 0.5 * (gram + gram.T)
        lam = symmetric_eigenvalues(gram)
        floor = gram.shape[0] * np.finfo(np.float64).eps * max(float(np.max(lam)), 0.0)
        vals = np.sqrt(np.where(lam > floor, lam, 0.0))
    vals = np.sort(vals)[::-1].copy()
    vals.setflags(write=False)
    return SingularSpectrum(vals, method)
