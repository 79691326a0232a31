"""Dense linear-algebra kernels.

Row orthonormalization, compressed Gram matrices over a column subset,
extreme eigenvalues of small symmetric matrices via full Jacobi
diagonalization, the isometry deviation functional, and the on-disk matrix
text format. Matrices are float64 numpy arrays in row-major order; every
function here is pure and never mutates its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptySubset,
    IndexOutOfRange,
    MatrixFormatError,
    NoConvergence,
    NotOrthonormal,
    NotSymmetric,
    RankDeficient,
)

DEFAULT_ORTHO_TOL = 1e-10
DEFAULT_EIG_TOL = 1e-10
SYMMETRY_TOL = 1e-12
MAX_JACOBI_SWEEPS = 60


def as_matrix(m) -> np.ndarray:
    """Validate and return ``m`` as a finite 2-d float64 array."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise MatrixFormatError("expected a nonempty 2-d matrix")
    if not np.all(np.isfinite(a)):
        raise MatrixFormatError("matrix entries must be finite")
    return a


@dataclass(frozen=True, eq=False)
class OrthoRowMatrix:
    """n x M matrix whose rows are orthonormal, validated on construction.

    Inputs that miss the tolerance are rejected, never silently
    re-orthonormalized; run :func:`orthonormalize_rows` first if that is
    what you want.
    """

    mat: np.ndarray
    ortho_tol: float = DEFAULT_ORTHO_TOL

    def __post_init__(self):
        a = as_matrix(self.mat)
        n, m = a.shape
        if n > m:
            raise NotOrthonormal(f"need n <= M, got {n}x{m}")
        err = float(np.max(np.abs(a @ a.T - np.eye(n))))
        if err > self.ortho_tol:
            raise NotOrthonormal(
                f"rows not orthonormal: max |A A^T - I| = {err:.3e} exceeds "
                f"{self.ortho_tol:.3e}"
            )
        object.__setattr__(self, "mat", a)

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    @property
    def m(self) -> int:
        return self.mat.shape[1]


@dataclass(frozen=True)
class SubsetIndex:
    """Strictly increasing 1-based column indices into a width-``m`` matrix."""

    indices: tuple[int, ...]
    m: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise IndexOutOfRange("indices must be strictly increasing")
        if idx and (idx[0] < 1 or idx[-1] > self.m):
            raise IndexOutOfRange(
                f"indices must lie in 1..{self.m}, got range "
                f"[{idx[0]}, {idx[-1]}]"
            )

    @classmethod
    def from_iterable(cls, indices, m: int) -> "SubsetIndex":
        """Sort ``indices`` and build a subset; duplicates are rejected."""
        return cls(tuple(sorted(int(i) for i in indices)), m)

    @classmethod
    def full(cls, m: int) -> "SubsetIndex":
        return cls(tuple(range(1, m + 1)), m)

    def zero_based(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp) - 1

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class SymEigExtremes:
    lambda_min: float
    lambda_max: float
    iterations: int
    residual: float


def orthonormalize_rows(m, tol: float = DEFAULT_ORTHO_TOL) -> OrthoRowMatrix:
    """Orthonormalize the rows of ``m``, preserving their span.

    Modified Gram-Schmidt with one re-orthogonalization pass per row
    ("twice is enough"). Raises RankDeficient if some row's residual norm
    falls to ``tol`` or below.
    """
    a = as_matrix(m).copy()
    n, cols = a.shape
    if n > cols:
        raise RankDeficient(f"more rows than columns ({n}x{cols})")
    for i in range(n):
        for _ in range(2):
            for j in range(i):
                a[i] -= (a[j] @ a[i]) * a[j]
        norm = float(np.linalg.norm(a[i]))
        if norm <= tol:
            raise RankDeficient(
                f"row {i + 1} is linearly dependent (residual norm {norm:.3e})"
            )
        a[i] /= norm
    return OrthoRowMatrix(a, tol)


def _round_robin_rounds(k: int) -> list[list[tuple[int, int]]]:
    """Partition all index pairs of 0..k-1 into rounds of disjoint pairs."""
    players: list[int | None] = list(range(k)) + ([None] if k % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a is not None and b is not None:
                pairs.append((min(a, b), max(a, b)))
        rounds.append(pairs)
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _off_diag_norm(a: np.ndarray) -> float:
    b = a.copy()
    np.fill_diagonal(b, 0.0)
    return float(np.linalg.norm(b))


def sym_eig_extremes(
    s,
    tol: float = DEFAULT_EIG_TOL,
    max_sweeps: int = MAX_JACOBI_SWEEPS,
) -> SymEigExtremes:
    """Extreme eigenvalues of a symmetric matrix by Jacobi diagonalization.

    Rotations are applied one round-robin round at a time (disjoint pairs
    fused into a single orthogonal factor), so each sweep is a handful of
    dense matmuls rather than k(k-1)/2 scalar updates. Sweeps continue
    until the off-diagonal Frobenius norm is at most ``tol`` (absolute);
    by Weyl's inequality the diagonal then carries every eigenvalue to
    within ``tol``.
    """
    a = as_matrix(s)
    k = a.shape[0]
    if a.shape[1] != k:
        raise NotSymmetric(f"matrix is {a.shape[0]}x{a.shape[1]}, not square")
    asym = float(np.max(np.abs(a - a.T)))
    if asym > SYMMETRY_TOL:
        raise NotSymmetric(f"asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:.3e}")
    a = 0.5 * (a + a.T)  # remove roundoff drift after the check passes
    if k == 1:
        v = float(a[0, 0])
        return SymEigExtremes(v, v, 0, 0.0)

    rounds = _round_robin_rounds(k)
    sweeps = 0
    off = _off_diag_norm(a)
    while off > tol:
        if sweeps >= max_sweeps:
            raise NoConvergence(
                f"off-diagonal norm {off:.3e} > {tol:.3e} after "
                f"{max_sweeps} sweeps"
            )
        for pairs in rounds:
            p = np.fromiter((x for x, _ in pairs), dtype=np.intp)
            q = np.fromiter((y for _, y in pairs), dtype=np.intp)
            apq = a[p, q]
            # pivots below 1e-200 cannot move any usable tolerance and
            # would overflow the tau quotient
            live = np.abs(apq) > 1e-200
            if not live.any():
                continue
            p, q, apq = p[live], q[live], apq[live]
            tau = (a[q, q] - a[p, p]) / (2.0 * apq)
            # hypot instead of sqrt(1 + tau^2): no overflow for huge tau
            t = np.sign(tau) / (np.abs(tau) + np.hypot(1.0, tau))
            t[tau == 0.0] = 1.0  # equal diagonal: rotate by 45 degrees
            c = 1.0 / np.sqrt(1.0 + t * t)
            sn = t * c
            rot = np.eye(k)
            rot[p, p] = c
            rot[q, q] = c
            rot[p, q] = sn
            rot[q, p] = -sn
            a = rot.T @ a @ rot
        a = 0.5 * (a + a.T)
        sweeps += 1
        off = _off_diag_norm(a)
    diag = np.diagonal(a)
    return SymEigExtremes(float(diag.min()), float(diag.max()), sweeps, off)


def _check_subset(a: OrthoRowMatrix, i: SubsetIndex) -> None:
    if len(i) == 0:
        raise EmptySubset("subset must contain at least one column index")
    if i.m != a.m:
        raise IndexOutOfRange(
            f"subset is over 1..{i.m} but matrix has {a.m} columns"
        )


def compressed_gram(a: OrthoRowMatrix, i: SubsetIndex) -> np.ndarray:
    """Gram matrix of the selected columns: G_pq = sum_{j in I} a_pj a_qj."""
    _check_subset(a, i)
    cols = a.mat[:, i.zero_based()]
    g = cols @ cols.T
    return 0.5 * (g + g.T)


def scaled_gram_extremes(
    a: OrthoRowMatrix, i: SubsetIndex, tol: float = DEFAULT_EIG_TOL
) -> SymEigExtremes:
    """Eigen extremes of (M/|I|) * A_I A_I^T."""
    scale = a.m / len(i)
    return sym_eig_extremes(scale * compressed_gram(a, i), tol)


def deviation(a: OrthoRowMatrix, i: SubsetIndex) -> float:
    """Spectral deviation of the rescaled subset Gram matrix from identity.

    Returns ``|| (M/|I|) A_I A_I^T - I ||_2``. A value <= eps certifies
    that sqrt(M/|I|) times the restriction to I of A^T x distorts every
    norm by a factor inside [1-eps, 1+eps].
    """
    ext = scaled_gram_extremes(a, i)
    return max(ext.lambda_max - 1.0, 1.0 - ext.lambda_min)


def write_matrix_text(path, m) -> None:
    """Write a matrix as `n M` header plus n rows of 17-significant-digit
    floats separated by single spaces."""
    a = as_matrix(m)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    for row in a:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_matrix_text(path) -> np.ndarray:
    """Parse the matrix text format; raises MatrixFormatError on any defect."""
    text = Path(path).read_text(encoding="ascii")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MatrixFormatError(f"{path}: empty matrix file")
    header = lines[0].split()
    if len(header) != 2:
        raise MatrixFormatError(f"{path}: header must be 'n M'")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError as exc:
        raise MatrixFormatError(f"{path}: non-integer header") from exc
    if n < 1 or m < 1:
        raise MatrixFormatError(f"{path}: dimensions must be positive")
    if len(lines) != n + 1:
        raise MatrixFormatError(
            f"{path}: expected {n} data rows, found {len(lines) - 1}"
        )
    rows = []
    for r, line in enumerate(lines[1:], start=1):
        fields = line.split()
        if len(fields) != m:
            raise MatrixFormatError(
                f"{path}: row {r} has {len(fields)} values, expected {m}"
            )
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise MatrixFormatError(f"{path}: row {r} has a non-number") from exc
    a = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise MatrixFormatError(f"{path}: non-finite entry")
    return a
