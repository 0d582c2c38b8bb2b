"""Middle convolution on punctured tuples of invertible matrices over F_p.

A tuple assigns one invertible matrix to each finite puncture; the matrix
at infinity is always derived so that the ordered product over all
punctures is the identity.  The convolution MC_lambda is realized as the
block construction on the r*n-dimensional space followed by the quotient
by its two canonical invariant subspaces.  The contract it must satisfy is
the local calculus: the output rank equals ``predict_rank`` and the
nontrivial Jordan blocks at each finite puncture transform by
``map_local_jordan``; a wrong-rank quotient is a hard error rather than a
silently wrong answer.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from .errors import DegenerateQuotient, NotInCategory
from .ff_linalg import JordanData, Matrix, _kernel_basis, _rref, jordan_type

__all__ = [
    "Label",
    "PuncturedTuple",
    "middle_convolve",
    "predict_rank",
    "map_local_jordan",
    "twist_quadratic",
    "INFINITY",
]

Label = Union[int, str]

INFINITY = "infinity"


def _canonical_order(punctures: Sequence[Label]) -> list[int]:
    """Sort key order: residue labels ascending, then symbols as given."""
    residues = [(lab, i) for i, lab in enumerate(punctures) if isinstance(lab, int)]
    symbols = [(lab, i) for i, lab in enumerate(punctures) if not isinstance(lab, int)]
    residues.sort(key=lambda t: t[0])
    return [i for _, i in residues] + [i for _, i in symbols]


def _validate_label(label: Label, p: int) -> Label:
    if isinstance(label, (int, np.integer)):
        label = int(label)
        if not 0 <= label < p:
            raise ValueError(f"residue label {label} outside [0, {p})")
        return label
    if isinstance(label, str):
        if not label or label.isdigit() or label == INFINITY or any(c.isspace() for c in label):
            raise ValueError(f"bad symbolic label {label!r}")
        return label
    raise TypeError(f"labels are residues or symbols, got {type(label).__name__}")


class PuncturedTuple:
    """Ordered finite punctures with one invertible matrix each.

    The constructor normalizes the puncture order (residues ascending, then
    symbols in the order given) and derives the matrix at infinity as the
    inverse of the ordered product, so the product over all punctures
    including infinity is the identity by construction.
    """

    __slots__ = ("p", "rank", "punctures", "matrices", "infinity_matrix")

    def __init__(self, punctures: Sequence[Label], matrices: Sequence[Matrix]):
        if len(punctures) != len(matrices):
            raise ValueError("one matrix per puncture")
        if not punctures:
            raise ValueError("need at least one puncture")
        p = matrices[0].p
        n = matrices[0].n
        labels = [_validate_label(lab, p) for lab in punctures]
        if len(set(labels)) != len(labels):
            raise ValueError("puncture labels repeat")
        for m in matrices:
            if m.p != p or m.n != n:
                raise ValueError("matrices must share size and modulus")
            if m.det() == 0:
                raise ValueError("puncture matrices must be invertible")
        order = _canonical_order(labels)
        labels = [labels[i] for i in order]
        mats = [matrices[i] for i in order]
        product = Matrix.identity(n, p)
        for m in mats:
            product = product @ m
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "rank", n)
        object.__setattr__(self, "punctures", tuple(labels))
        object.__setattr__(self, "matrices", tuple(mats))
        object.__setattr__(self, "infinity_matrix", product.inv())

    def __setattr__(self, name, value):
        raise AttributeError("PuncturedTuple is immutable")

    def matrix_at(self, label: Label) -> Matrix:
        if label == INFINITY:
            return self.infinity_matrix
        return self.matrices[self.punctures.index(label)]

    def jordan_at(self, label: Label) -> JordanData:
        return jordan_type(self.matrix_at(label))

    def local_data(self) -> dict[Label, JordanData]:
        """Jordan data at every puncture, infinity included."""
        data = {lab: jordan_type(m) for lab, m in zip(self.punctures, self.matrices)}
        data[INFINITY] = jordan_type(self.infinity_matrix)
        return data

    def nontrivial_count(self) -> int:
        return sum(1 for m in self.matrices if not m.is_identity())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PuncturedTuple)
            and self.p == other.p
            and self.rank == other.rank
            and self.punctures == other.punctures
            and self.matrices == other.matrices
        )

    def __hash__(self) -> int:
        return hash((self.p, self.punctures, self.matrices))

    def __repr__(self) -> str:
        return (
            f"PuncturedTuple(rank {self.rank}, punctures {list(self.punctures)},"
            f" F_{self.p})"
        )


def predict_rank(
    finite: Sequence[JordanData], infinity: JordanData, lam: int
) -> int:
    """Rank of the convolution from local data alone.

    Sum over finite punctures of the codimension of the fixed space, minus
    the dimension of the fixed space of the infinity data tensored by
    lambda (the number of infinity blocks with eigenvalue 1/lambda).
    """
    p = infinity.p
    lam = int(lam) % p
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    dims = {d.dim for d in finite} | {infinity.dim}
    if len(dims) != 1:
        raise ValueError("local data dimensions disagree across punctures")
    codims = sum(d.codim_fixed for d in finite)
    return codims - infinity.tensor(lam).fixed_dim


def map_local_jordan(data: JordanData, lam: int) -> JordanData:
    """Image of the nontrivial Jordan blocks under the convolution block map.

    For lambda = 1 the blocks are unchanged.  Otherwise unipotent blocks
    shrink by one and acquire eigenvalue lambda, blocks with eigenvalue
    1/lambda grow by one and become unipotent, and everything else is
    scaled by lambda.  Trivial blocks are bookkeeping handled by
    ``predict_rank``, not by this map.
    """
    p = data.p
    lam = int(lam) % p
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    nontrivial = data.nontrivial()
    if lam == 1:
        return nontrivial
    lam_inv = pow(lam, -1, p)
    out = []
    for eig, size in nontrivial.blocks:
        if eig == 1:
            out.append((lam, size - 1))
        elif eig == lam_inv:
            out.append((1, size + 1))
        else:
            out.append(((eig * lam) % p, size))
    return JordanData(out, p)


def middle_convolve(t: PuncturedTuple, lam: int) -> PuncturedTuple:
    """The middle convolution MC_lambda of a punctured tuple.

    Builds the block matrices B_k on the r*n-dimensional space (identity
    off the k-th block row; on it, lambda(A_j - 1) for j < k, lambda A_k at
    j = k, and A_j - 1 for j > k), then quotients by the blockwise kernels
    of A_k - 1 and the common fixed space of the B_k.  The quotient
    dimension is checked against the local rank formula; a mismatch raises
    DegenerateQuotient.
    """
    p = t.p
    lam = int(lam) % p
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    r = len(t.punctures)
    n = t.rank
    if n == 1 and t.nontrivial_count() < 2:
        raise NotInCategory(
            "rank-1 tuples need at least two nontrivial finite punctures"
        )
    big = r * n
    eye_n = np.eye(n, dtype=np.int64)
    arrays = [m.array for m in t.matrices]

    blocks = []
    for k in range(r):
        b = np.eye(big, dtype=np.int64)
        row = slice(k * n, (k + 1) * n)
        for j in range(r):
            col = slice(j * n, (j + 1) * n)
            if j < k:
                b[row, col] = (lam * (arrays[j] - eye_n)) % p
            elif j == k:
                b[row, col] = (lam * arrays[k]) % p
            else:
                b[row, col] = (arrays[j] - eye_n) % p
        blocks.append(b)

    # blockwise kernels of A_k - 1, embedded in the k-th block
    kernel_rows = []
    for k in range(r):
        kb = _kernel_basis((arrays[k] - eye_n) % p, p)
        for v in kb:
            row = np.zeros(big, dtype=np.int64)
            row[k * n : (k + 1) * n] = v
            kernel_rows.append(row)

    # common fixed space of the B_k
    stacked = np.concatenate([(b - np.eye(big, dtype=np.int64)) % p for b in blocks])
    fixed_rows = list(_kernel_basis(stacked, p))

    junk = kernel_rows + fixed_rows
    if junk:
        junk_basis, pivots = _rref(np.stack(junk), p)
        junk_basis = junk_basis[: len(pivots)]
    else:
        junk_basis = np.zeros((0, big), dtype=np.int64)
        pivots = ()

    # the quotient must see exactly the predicted dimension: the input rank
    # for the identity convolution, otherwise the local rank formula.  The
    # infinity term follows the generator orientation in which the finite
    # blocks transform by lambda: the lambda-eigenspace of the derived
    # infinity matrix is removed.  For the quadratic case lambda = -1 (all
    # packaged families) this is the same count as predict_rank.
    if lam == 1:
        expected = n
    else:
        expected = sum(n - _kernel_basis((a - eye_n) % p, p).shape[0] for a in arrays)
        inf_shift = (pow(lam, -1, p) * t.infinity_matrix.array - eye_n) % p
        expected -= _kernel_basis(inf_shift, p).shape[0]
    out_dim = big - junk_basis.shape[0]
    if out_dim != expected:
        raise DegenerateQuotient(
            f"quotient dimension {out_dim} != predicted rank {expected}"
        )
    if out_dim == 0:
        raise NotInCategory("convolution output collapses to rank 0")

    # invariance of the junk space under every B_k (theorem; cheap guard)
    for b in blocks:
        for row in junk_basis:
            img = (b @ row) % p
            for jrow, piv in zip(junk_basis, pivots):
                if img[piv]:
                    img = (img - img[piv] * jrow) % p
            if img.any():
                raise DegenerateQuotient("quotient subspace is not invariant")

    pivot_set = set(pivots)
    coords = [j for j in range(big) if j not in pivot_set]

    def project(vec: np.ndarray) -> np.ndarray:
        v = vec % p
        for jrow, piv in zip(junk_basis, pivots):
            if v[piv]:
                v = (v - v[piv] * jrow) % p
        return v[coords]

    out_mats = []
    for b in blocks:
        cols = [project((b[:, c]) % p) for c in coords]
        out_mats.append(Matrix(np.stack(cols, axis=1), p))

    try:
        return PuncturedTuple(t.punctures, out_mats)
    except ValueError as exc:
        raise DegenerateQuotient(f"quotient matrices are degenerate: {exc}") from exc


def twist_quadratic(t: PuncturedTuple, points: Sequence[Label]) -> PuncturedTuple:
    """Quadratic twist at the given points.

    Existing punctures in the list get their matrix negated; new points are
    inserted with matrix -identity.  A puncture whose matrix becomes the
    identity (twisting a -identity point a second time) stops being a
    puncture and is dropped.  The matrix at infinity is re-derived and
    picks up a sign (-1)^(number of points).
    """
    labels = [_validate_label(lab, t.p) for lab in points]
    if len(set(labels)) != len(labels):
        raise ValueError("twist points repeat")
    new_punctures = list(t.punctures)
    new_matrices = [m for m in t.matrices]
    minus_one = -Matrix.identity(t.rank, t.p)
    for lab in labels:
        if lab in new_punctures:
            i = new_punctures.index(lab)
            new_matrices[i] = -new_matrices[i]
            if new_matrices[i].is_identity():
                del new_punctures[i]
                del new_matrices[i]
        else:
            new_punctures.append(lab)
            new_matrices.append(minus_one)
    return PuncturedTuple(new_punctures, new_matrices)
