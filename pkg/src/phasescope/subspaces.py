"""Linear subspace geometry for conormal analysis.

A SubspaceSpec holds an n-dimensional subspace Y of R^d through an
orthonormal column basis, together with the derived objects used by the
conormal machinery: the complement basis, the projectors, the conormal
space N(Y) = Y x Y-perp inside phase space R^{2d}, and the default
transversal V = N(Y-perp).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch, SingularMatrix


@dataclass(frozen=True, eq=False)
class SubspaceSpec:
    dim: int
    basis: np.ndarray  # (d, n) orthonormal columns; n may be 0
    basis_perp: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=np.float64).reshape(self.dim, -1)
        object.__setattr__(self, "basis", B)
        if self.basis_perp is None:
            object.__setattr__(self, "basis_perp", _complement(B, self.dim))
        gram = B.T @ B
        if gram.size and np.max(np.abs(gram - np.eye(B.shape[1]))) > 1e-12:
            raise SingularMatrix("subspace basis is not orthonormal")

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    @property
    def projector_perp(self) -> np.ndarray:
        return np.eye(self.dim) - self.projector

    def perp(self) -> "SubspaceSpec":
        return SubspaceSpec(self.dim, self.basis_perp, self.basis)

    def conormal_basis(self) -> np.ndarray:
        """Orthonormal (2d, d) basis of N(Y) = Y x Y-perp in (x, xi) space."""
        d, n = self.dim, self.n
        out = np.zeros((2 * d, d))
        out[:d, :n] = self.basis
        out[d:, n:] = self.basis_perp
        return out

    def transversal_basis(self) -> np.ndarray:
        """Orthonormal (2d, d) basis of V = N(Y-perp) = Y-perp x Y."""
        d, n = self.dim, self.n
        out = np.zeros((2 * d, d))
        out[:d, : d - n] = self.basis_perp
        out[d:, d - n :] = self.basis
        return out

    def rotation(self) -> np.ndarray:
        """Orthogonal U = [Y basis | Y-perp basis]; U^t Y = R^n x {0}."""
        return np.concatenate([self.basis, self.basis_perp], axis=1)

    def map(self, A: np.ndarray) -> "SubspaceSpec":
        """Image subspace A(Y) for invertible A."""
        A = np.asarray(A, dtype=np.float64)
        if A.shape != (self.dim, self.dim):
            raise DimensionMismatch("subspace map must be square of matching size")
        if self.n == 0:
            return SubspaceSpec(self.dim, np.zeros((self.dim, 0)))
        return make_subspace((A @ self.basis).T, self.dim)


def make_subspace(vectors, dim: int | None = None) -> SubspaceSpec:
    """Orthonormalize spanning vectors (rows) into a SubspaceSpec."""
    V = np.asarray(vectors, dtype=np.float64)
    if V.size == 0:
        if dim is None:
            raise DimensionMismatch("an empty basis needs an explicit dimension")
        return SubspaceSpec(dim, np.zeros((dim, 0)))
    if V.ndim == 1:
        V = V[None, :]
    d = V.shape[1]
    if dim is not None and dim != d:
        raise DimensionMismatch(f"vectors have length {d}, expected {dim}")
    B = V.T  # columns
    q, r = np.linalg.qr(B)
    diag = np.abs(np.diag(r))
    if np.min(diag) < 1e-10 * max(1.0, np.max(diag)):
        raise SingularMatrix("basis vectors are linearly dependent")
    # fix signs so the decomposition does not depend on vector ordering quirks
    signs = np.sign(np.diag(r))
    q = q * signs[None, :]
    return SubspaceSpec(d, q)


def _complement(B: np.ndarray, d: int) -> np.ndarray:
    n = B.shape[1]
    if n == d:
        return np.zeros((d, 0))
    if n == 0:
        return np.eye(d)
    q, _ = np.linalg.qr(np.concatenate([B, np.eye(d)], axis=1))
    comp = q[:, n:d]
    # canonical signs: largest-magnitude entry of each column positive
    for j in range(comp.shape[1]):
        k = int(np.argmax(np.abs(comp[:, j])))
        if comp[k, j] < 0:
            comp[:, j] = -comp[:, j]
    return comp


def dist_conormal(points: np.ndarray, Y: SubspaceSpec) -> np.ndarray:
    """Distance from phase-space points (..., 2d) to N(Y).

    dist^2((x, xi), N(Y)) = |pi_{Y-perp} x|^2 + |pi_Y xi|^2.
    """
    pts = np.asarray(points, dtype=np.float64)
    d = Y.dim
    if pts.shape[-1] != 2 * d:
        raise DimensionMismatch("points must have 2d phase-space coordinates")
    x = pts[..., :d]
    xi = pts[..., d:]
    a = x @ Y.projector_perp.T
    b = xi @ Y.projector.T
    return np.sqrt(np.sum(a * a, axis=-1) + np.sum(b * b, axis=-1))


def dist_transversal(points: np.ndarray, Y: SubspaceSpec) -> np.ndarray:
    """Distance from phase-space points to V = N(Y-perp)."""
    pts = np.asarray(points, dtype=np.float64)
    d = Y.dim
    x = pts[..., :d]
    xi = pts[..., d:]
    a = x @ Y.projector.T
    b = xi @ Y.projector_perp.T
    return np.sqrt(np.sum(a * a, axis=-1) + np.sum(b * b, axis=-1))


def dist_to_span(points: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Distance from points (..., m) to the column span of basis (m, k)."""
    pts = np.asarray(points, dtype=np.float64)
    if basis.size == 0:
        return np.sqrt(np.sum(pts * pts, axis=-1))
    coeff = pts @ basis
    proj = coeff @ basis.T
    res = pts - proj
    return np.sqrt(np.sum(res * res, axis=-1))
