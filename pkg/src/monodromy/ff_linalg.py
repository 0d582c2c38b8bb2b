"""Exact dense linear algebra over a prime field F_p.

Everything is integer arithmetic modulo an odd prime, held in numpy int64
arrays; there is no floating point anywhere.  Matrices are immutable and
hashable so they can be used as dict keys and set members (group closures,
orbit transversals).  Subspaces are kept in reduced row echelon form, so
subspace equality is representation equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NonSplitSpectrum

__all__ = [
    "is_prime",
    "Matrix",
    "Subspace",
    "BilinearForm",
    "JordanData",
    "kernel",
    "jordan_type",
    "invariant_forms",
    "random_invertible",
]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _check_modulus(p: int) -> int:
    p = int(p)
    if p < 3 or not is_prime(p):
        raise ValueError(f"modulus must be an odd prime >= 3, got {p}")
    return p


# ---------------------------------------------------------------------------
# array-level routines (int64 arrays, entries reduced mod p)

def _rref(a: np.ndarray, p: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Reduced row echelon form and pivot columns of ``a`` mod ``p``."""
    r = np.array(a, dtype=np.int64) % p
    rows, cols = r.shape
    pivots = []
    rank = 0
    for j in range(cols):
        if rank == rows:
            break
        nz = np.nonzero(r[rank:, j])[0]
        if nz.size == 0:
            continue
        i = rank + int(nz[0])
        if i != rank:
            r[[rank, i]] = r[[i, rank]]
        inv = pow(int(r[rank, j]), -1, p)
        r[rank] = (r[rank] * inv) % p
        others = np.nonzero(r[:, j])[0]
        others = others[others != rank]
        if others.size:
            r[others] = (r[others] - np.outer(r[others, j], r[rank])) % p
        pivots.append(j)
        rank += 1
    return r, tuple(pivots)


def _rank(a: np.ndarray, p: int) -> int:
    return len(_rref(a, p)[1])


def _kernel_basis(a: np.ndarray, p: int) -> np.ndarray:
    """RREF basis of the right kernel {x : a x = 0}, rows are solutions."""
    r, pivots = _rref(a, p)
    cols = a.shape[1]
    free = [j for j in range(cols) if j not in set(pivots)]
    if not free:
        return np.zeros((0, cols), dtype=np.int64)
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for k, j in enumerate(free):
        basis[k, j] = 1
        for i, pj in enumerate(pivots):
            basis[k, pj] = (-r[i, j]) % p
    # canonicalize so equality of kernels is equality of arrays
    basis, _ = _rref(basis, p)
    return basis


def _inv(a: np.ndarray, p: int) -> np.ndarray:
    n = a.shape[0]
    aug = np.concatenate([a % p, np.eye(n, dtype=np.int64)], axis=1)
    r, pivots = _rref(aug, p)
    if len(pivots) < n or pivots[:n] != tuple(range(n)):
        raise ValueError("matrix is singular")
    return r[:, n:]


def _det(a: np.ndarray, p: int) -> int:
    m = np.array(a, dtype=np.int64) % p
    n = m.shape[0]
    det = 1
    for j in range(n):
        nz = np.nonzero(m[j:, j])[0]
        if nz.size == 0:
            return 0
        i = j + int(nz[0])
        if i != j:
            m[[j, i]] = m[[i, j]]
            det = -det
        piv = int(m[j, j])
        det = (det * piv) % p
        inv = pow(piv, -1, p)
        below = np.nonzero(m[j + 1:, j])[0]
        if below.size:
            rows = j + 1 + below
            factors = (m[rows, j] * inv) % p
            m[rows] = (m[rows] - np.outer(factors, m[j])) % p
    return det % p


def _matmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    return (a @ b) % p


# ---------------------------------------------------------------------------


class Matrix:
    """An immutable matrix over F_p.

    Entries are reduced into [0, p).  Arithmetic (``@``, ``+``, ``-``,
    integer ``*``, ``**``) stays exact; ``**`` accepts negative exponents
    for invertible matrices.
    """

    __slots__ = ("array", "p")

    def __init__(self, entries, p: int):
        p = _check_modulus(p)
        arr = np.asarray(entries, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("matrix entries must be two-dimensional")
        arr = arr % p
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)
        object.__setattr__(self, "p", p)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def identity(n: int, p: int) -> "Matrix":
        return Matrix(np.eye(n, dtype=np.int64), p)

    @staticmethod
    def zeros(rows: int, cols: int, p: int) -> "Matrix":
        return Matrix(np.zeros((rows, cols), dtype=np.int64), p)

    @staticmethod
    def scalar(c: int, n: int, p: int) -> "Matrix":
        return Matrix(np.eye(n, dtype=np.int64) * (c % p), p)

    @staticmethod
    def diagonal(entries: Sequence[int], p: int) -> "Matrix":
        return Matrix(np.diag(np.asarray(entries, dtype=np.int64)), p)

    # -- shape -------------------------------------------------------------

    @property
    def rows(self) -> int:
        return self.array.shape[0]

    @property
    def cols(self) -> int:
        return self.array.shape[1]

    @property
    def n(self) -> int:
        if self.rows != self.cols:
            raise ValueError("matrix is not square")
        return self.rows

    @property
    def T(self) -> "Matrix":
        return Matrix(self.array.T, self.p)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other: "Matrix") -> None:
        if not isinstance(other, Matrix):
            raise TypeError(f"expected Matrix, got {type(other).__name__}")
        if other.p != self.p:
            raise ValueError("mixed moduli")

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._coerce(other)
        return Matrix(self.array @ other.array, self.p)

    def __add__(self, other: "Matrix") -> "Matrix":
        self._coerce(other)
        return Matrix(self.array + other.array, self.p)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._coerce(other)
        return Matrix(self.array - other.array, self.p)

    def __neg__(self) -> "Matrix":
        return Matrix(-self.array, self.p)

    def __mul__(self, c: int) -> "Matrix":
        if not isinstance(c, (int, np.integer)):
            return NotImplemented
        return Matrix(self.array * (int(c) % self.p), self.p)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Matrix":
        n = self.n
        if k < 0:
            return self.inv() ** (-k)
        result = np.eye(n, dtype=np.int64)
        base = self.array
        while k:
            if k & 1:
                result = _matmul(result, base, self.p)
            base = _matmul(base, base, self.p)
            k >>= 1
        return Matrix(result, self.p)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Apply to a column vector (1-D int array), reduced mod p."""
        return (self.array @ np.asarray(vec, dtype=np.int64)) % self.p

    # -- queries -------------------------------------------------------------

    def det(self) -> int:
        return _det(self.array, self.p)

    def inv(self) -> "Matrix":
        return Matrix(_inv(self.array, self.p), self.p)

    def rank(self) -> int:
        return _rank(self.array, self.p)

    def is_identity(self) -> bool:
        return self.rows == self.cols and bool(
            np.array_equal(self.array, np.eye(self.rows, dtype=np.int64))
        )

    def is_zero(self) -> bool:
        return not self.array.any()

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.det() != 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Matrix)
            and self.p == other.p
            and self.array.shape == other.array.shape
            and bool(np.array_equal(self.array, other.array))
        )

    def __hash__(self) -> int:
        return hash((self.p, self.array.shape, self.array.tobytes()))

    def __repr__(self) -> str:
        rows = "; ".join(" ".join(str(int(x)) for x in row) for row in self.array)
        return f"Matrix([{rows}] mod {self.p})"


class Subspace:
    """A subspace of F_p^n stored as an RREF row basis (canonical form)."""

    __slots__ = ("ambient", "p", "basis")

    def __init__(self, basis, ambient: int, p: int):
        p = _check_modulus(p)
        arr = np.asarray(basis, dtype=np.int64).reshape(-1, ambient) % p
        reduced, pivots = _rref(arr, p)
        reduced = reduced[: len(pivots)]
        reduced.setflags(write=False)
        object.__setattr__(self, "ambient", int(ambient))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "basis", reduced)

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    @staticmethod
    def zero(ambient: int, p: int) -> "Subspace":
        return Subspace(np.zeros((0, ambient), dtype=np.int64), ambient, p)

    @staticmethod
    def full(ambient: int, p: int) -> "Subspace":
        return Subspace(np.eye(ambient, dtype=np.int64), ambient, p)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def reduce(self, vec: np.ndarray) -> np.ndarray:
        """Residue of ``vec`` after subtracting its projection on the basis."""
        v = np.asarray(vec, dtype=np.int64) % self.p
        for row in self.basis:
            lead = int(np.nonzero(row)[0][0])
            if v[lead]:
                v = (v - v[lead] * row) % self.p
        return v

    def contains(self, vec) -> bool:
        return not self.reduce(vec).any()

    def contains_space(self, other: "Subspace") -> bool:
        return all(self.contains(row) for row in other.basis)

    def sum(self, other: "Subspace") -> "Subspace":
        if (other.ambient, other.p) != (self.ambient, self.p):
            raise ValueError("mismatched ambient space")
        stacked = np.concatenate([self.basis, other.basis], axis=0)
        return Subspace(stacked, self.ambient, self.p)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.p == other.p
            and self.ambient == other.ambient
            and self.basis.shape == other.basis.shape
            and bool(np.array_equal(self.basis, other.basis))
        )

    def __hash__(self) -> int:
        return hash((self.p, self.ambient, self.basis.tobytes()))

    def __repr__(self) -> str:
        return f"Subspace(dim {self.dim} of F_{self.p}^{self.ambient})"


@dataclass(frozen=True)
class BilinearForm:
    """A bilinear pairing given by its Gram matrix, tagged with its parity.

    ``parity`` is ``"symmetric"`` (gram equals its transpose) or
    ``"alternating"`` (gram equals minus its transpose; the zero diagonal is
    automatic for odd p).
    """

    gram: Matrix
    parity: str

    def __post_init__(self):
        g = self.gram
        if g.rows != g.cols:
            raise ValueError("gram matrix must be square")
        if self.parity == "symmetric":
            if g.T != g:
                raise ValueError("gram matrix is not symmetric")
        elif self.parity == "alternating":
            if g.T != -g:
                raise ValueError("gram matrix is not antisymmetric")
            if np.diagonal(g.array).any():
                raise ValueError("alternating gram matrix has nonzero diagonal")
        else:
            raise ValueError(f"unknown parity {self.parity!r}")

    @property
    def p(self) -> int:
        return self.gram.p

    @property
    def dim(self) -> int:
        return self.gram.rows

    def evaluate(self, u, v) -> int:
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        return int((u @ self.gram.array @ v) % self.p)

    def is_nondegenerate(self) -> bool:
        return self.gram.det() != 0


class JordanData:
    """Multiset of (eigenvalue, block size) pairs of a split invertible matrix.

    Blocks are stored sorted, so equality is multiset equality.  The fixed
    space of the underlying matrix has dimension equal to the number of
    blocks with eigenvalue 1 (one fixed line per such block).
    """

    __slots__ = ("blocks", "p")

    def __init__(self, blocks: Iterable[tuple[int, int]], p: int):
        p = _check_modulus(p)
        norm = []
        for eig, size in blocks:
            eig = int(eig) % p
            size = int(size)
            if eig == 0:
                raise ValueError("eigenvalue 0 is not allowed (invertible matrices only)")
            if size < 1:
                raise ValueError("block sizes must be >= 1")
            norm.append((eig, size))
        object.__setattr__(self, "blocks", tuple(sorted(norm)))
        object.__setattr__(self, "p", p)

    def __setattr__(self, name, value):
        raise AttributeError("JordanData is immutable")

    @property
    def dim(self) -> int:
        return sum(size for _, size in self.blocks)

    @property
    def fixed_dim(self) -> int:
        return sum(1 for eig, _ in self.blocks if eig == 1)

    @property
    def codim_fixed(self) -> int:
        return self.dim - self.fixed_dim

    def trivial_count(self) -> int:
        return sum(1 for b in self.blocks if b == (1, 1))

    def nontrivial(self) -> "JordanData":
        return JordanData((b for b in self.blocks if b != (1, 1)), self.p)

    def tensor(self, c: int) -> "JordanData":
        c = int(c) % self.p
        if c == 0:
            raise ValueError("cannot tensor by 0")
        return JordanData((((eig * c) % self.p, size) for eig, size in self.blocks), self.p)

    def rank_of_power(self, a: int, k: int) -> int:
        """Rank of (A - a)^k reconstructed from the block data."""
        a = int(a) % self.p
        return sum(
            max(size - k, 0) if eig == a else size for eig, size in self.blocks
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, JordanData)
            and self.p == other.p
            and self.blocks == other.blocks
        )

    def __hash__(self) -> int:
        return hash((self.p, self.blocks))

    def __repr__(self) -> str:
        return f"JordanData({self.blocks!r} mod {self.p})"

    def __str__(self) -> str:
        return "".join(f"({eig},{size})" for eig, size in self.blocks) or "()"


# ---------------------------------------------------------------------------
# operations


def kernel(m: Matrix) -> Subspace:
    """The full solution space of M x = 0, in echelon form."""
    basis = _kernel_basis(m.array, m.p)
    return Subspace(basis, m.cols, m.p)


def jordan_type(a: Matrix) -> JordanData:
    """Jordan block data of an invertible matrix whose spectrum splits over F_p.

    Eigenvalues are found by scanning F_p^x; block sizes come from the rank
    sequence of (A - a)^k.  Raises NonSplitSpectrum when the generalized
    eigenspaces do not fill the space.
    """
    n = a.n
    p = a.p
    if a.det() == 0:
        raise ValueError("matrix is singular")
    blocks = []
    total = 0
    eye = np.eye(n, dtype=np.int64)
    for eig in range(1, p):
        b = (a.array - eig * eye) % p
        r1 = _rank(b, p)
        if r1 == n:
            continue
        ranks = [n, r1]
        power = b
        while ranks[-1] != ranks[-2]:
            power = _matmul(power, b, p)
            ranks.append(_rank(power, p))
        # ranks stabilized; count blocks of each exact size
        for k in range(1, len(ranks) - 1):
            geq_k = ranks[k - 1] - ranks[k]
            geq_k1 = ranks[k] - ranks[k + 1] if k + 1 < len(ranks) else 0
            for _ in range(geq_k - geq_k1):
                blocks.append((eig, k))
                total += k
    if total != n:
        raise NonSplitSpectrum(
            f"generalized eigenspaces span {total} of {n} dimensions over F_{p}"
        )
    return JordanData(blocks, p)


def invariant_forms(gens: Sequence[Matrix]) -> list[Matrix]:
    """Basis of the space of bilinear forms fixed by every generator.

    Returns all M with A^T M A = M for each A, found by solving the linear
    system on the n^2 matrix entries.  The empty list means there is no
    nonzero invariant form.
    """
    gens = list(gens)
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].n
    p = gens[0].p
    for g in gens:
        if g.p != p or g.n != n:
            raise ValueError("generators must share size and modulus")
        if g.det() == 0:
            raise ValueError("generators must be invertible")
    eye = np.eye(n * n, dtype=np.int64)
    rows = []
    for g in gens:
        at = g.array.T
        rows.append((np.kron(at, at) - eye) % p)
    system = np.concatenate(rows, axis=0)
    basis = _kernel_basis(system, p)
    return [Matrix(row.reshape(n, n), p) for row in basis]


def random_invertible(n: int, p: int, rng) -> Matrix:
    """Uniform-ish random invertible matrix, by rejection sampling."""
    while True:
        arr = np.array(
            [[rng.randrange(p) for _ in range(n)] for _ in range(n)], dtype=np.int64
        )
        if _det(arr, p) != 0:
            return Matrix(arr, p)
