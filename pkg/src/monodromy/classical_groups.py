"""Bilinear-form geometry and the element taxonomy of isometry groups.

An isometry of a non-degenerate pairing is classified by its drop (the
codimension of its fixed space): drop-1 elements are reflections
(determinant -1) or transvections (determinant +1), and a non-trivial
unipotent element with (g-1)^2 = 0 is an isotropic shear.  The module also
computes spinor norms by constructive reflection factorization and the
standard orders of the finite symplectic and orthogonal groups.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InternalFactorizationFailure, NotAnIsometry, PrecedenceViolation
from .ff_linalg import BilinearForm, Matrix, _rank, _rref

__all__ = [
    "IDENTITY",
    "REFLECTION",
    "TRANSVECTION",
    "ISOTROPIC_SHEAR",
    "OTHER",
    "ElementClass",
    "FormSpace",
    "GroupOrders",
    "is_isometry",
    "drop",
    "classify_element",
    "square_class",
    "spinor_norm",
    "isometry_group_orders",
    "subgroup_class",
    "reflection",
    "transvection",
    "siegel_shear",
    "random_isometry",
    "anisotropic_vectors",
    "isotropic_vectors",
]

IDENTITY = "Identity"
REFLECTION = "Reflection"
TRANSVECTION = "Transvection"
ISOTROPIC_SHEAR = "IsotropicShear"
OTHER = "Other"


@dataclass(frozen=True)
class ElementClass:
    tag: str
    drop: int

    def __str__(self) -> str:
        return f"{self.tag}(drop={self.drop})"


class FormSpace:
    """F_p^n together with a non-degenerate symmetric or alternating pairing."""

    __slots__ = ("form",)

    def __init__(self, form: BilinearForm):
        if not form.is_nondegenerate():
            raise ValueError("the pairing must be non-degenerate")
        if form.parity == "alternating" and form.dim % 2 != 0:
            raise ValueError("alternating spaces have even dimension")
        object.__setattr__(self, "form", form)

    def __setattr__(self, name, value):
        raise AttributeError("FormSpace is immutable")

    @property
    def dim(self) -> int:
        return self.form.dim

    @property
    def p(self) -> int:
        return self.form.p

    @property
    def parity(self) -> str:
        return self.form.parity

    @property
    def gram(self) -> Matrix:
        return self.form.gram

    def pair(self, u, v) -> int:
        return self.form.evaluate(u, v)

    def q(self, v) -> int:
        return self.form.evaluate(v, v)

    # -- standard models -----------------------------------------------------

    @staticmethod
    def symplectic(dim: int, p: int) -> "FormSpace":
        """Standard alternating space: <e_i, f_j> = delta_ij on e's then f's."""
        if dim % 2 != 0:
            raise ValueError("symplectic dimension must be even")
        m = dim // 2
        g = np.zeros((dim, dim), dtype=np.int64)
        g[:m, m:] = np.eye(m, dtype=np.int64)
        g[m:, :m] = -np.eye(m, dtype=np.int64)
        return FormSpace(BilinearForm(Matrix(g, p), "alternating"))

    @staticmethod
    def dot(dim: int, p: int) -> "FormSpace":
        """Standard symmetric space with the identity Gram matrix."""
        return FormSpace(BilinearForm(Matrix.identity(dim, p), "symmetric"))

    @staticmethod
    def hyperbolic(dim: int, p: int) -> "FormSpace":
        """Symmetric space of maximal Witt index: <e_i, f_j> = delta_ij."""
        if dim % 2 != 0:
            raise ValueError("hyperbolic dimension must be even")
        m = dim // 2
        g = np.zeros((dim, dim), dtype=np.int64)
        g[:m, m:] = np.eye(m, dtype=np.int64)
        g[m:, :m] = np.eye(m, dtype=np.int64)
        return FormSpace(BilinearForm(Matrix(g, p), "symmetric"))

    @staticmethod
    def from_gram(gram: Matrix) -> "FormSpace":
        if gram.T == gram:
            return FormSpace(BilinearForm(gram, "symmetric"))
        if gram.T == -gram:
            return FormSpace(BilinearForm(gram, "alternating"))
        raise ValueError("gram matrix is neither symmetric nor antisymmetric")

    def __eq__(self, other) -> bool:
        return isinstance(other, FormSpace) and self.form == other.form

    def __hash__(self) -> int:
        return hash(self.form)

    def __repr__(self) -> str:
        kind = "Sp" if self.parity == "alternating" else "O"
        return f"FormSpace({kind}_{self.dim} over F_{self.p})"


def is_isometry(g: Matrix, space: FormSpace) -> bool:
    gram = space.gram
    return g.T @ gram @ g == gram


def _require_isometry(g: Matrix, space: FormSpace) -> None:
    if g.p != space.p or g.rows != space.dim or g.cols != space.dim:
        raise NotAnIsometry("matrix does not match the space")
    if not is_isometry(g, space):
        raise NotAnIsometry("matrix does not preserve the pairing")


def drop(g: Matrix, space: FormSpace) -> int:
    """Codimension of the fixed space, i.e. rank(g - 1)."""
    _require_isometry(g, space)
    return (g - Matrix.identity(space.dim, space.p)).rank()


def classify_element(g: Matrix, space: FormSpace) -> ElementClass:
    """Tag an isometry as Identity / Reflection / Transvection / IsotropicShear / Other.

    Drop-1 elements split by determinant; the shear tag applies to
    non-trivial unipotent g with (g-1)^2 = 0, whose image is automatically
    totally isotropic.
    """
    _require_isometry(g, space)
    p = space.p
    one = Matrix.identity(space.dim, p)
    b = g - one
    d = b.rank()
    if d == 0:
        return ElementClass(IDENTITY, 0)
    if d == 1:
        det = g.det()
        if det == p - 1:
            return ElementClass(REFLECTION, 1)
        if det == 1:
            return ElementClass(TRANSVECTION, 1)
        raise NotAnIsometry("drop-1 isometry with determinant != +-1")
    if (b @ b).is_zero():
        # the image of g-1 is totally isotropic: a consequence of the
        # isometry identity, checked here as an internal sanity guard
        image = _rref(b.array.T, p)[0][:d]
        assert not ((image @ space.gram.array @ image.T) % p).any()
        assert space.parity == "alternating" or space.dim >= 4
        return ElementClass(ISOTROPIC_SHEAR, d)
    return ElementClass(OTHER, d)


def square_class(a: int, p: int) -> int:
    """+1 for nonzero squares mod p, -1 for nonsquares (Euler's criterion)."""
    a = int(a) % p
    if a == 0:
        raise ValueError("0 has no square class")
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _anisotropic_candidates(space: FormSpace):
    """Deterministic stream of vectors v with <v,v> != 0."""
    n, p = space.dim, space.p
    eye = np.eye(n, dtype=np.int64)
    for i in range(n):
        yield eye[i]
    for i in range(n):
        for j in range(i + 1, n):
            for c in range(1, p):
                yield (eye[i] + c * eye[j]) % p
    # exhaustive fallback (tiny spaces only reach this)
    for idx in range(1, p**n):
        v = np.array([(idx // p**k) % p for k in range(n)], dtype=np.int64)
        yield v


def anisotropic_vectors(space: FormSpace, count: int) -> list[np.ndarray]:
    """The first ``count`` anisotropic vectors in a fixed scan order."""
    out = []
    seen = set()
    for v in _anisotropic_candidates(space):
        if space.q(v) == 0:
            continue
        key = v.tobytes()
        if key in seen:
            continue
        seen.add(key)
        out.append(v)
        if len(out) == count:
            break
    return out


def isotropic_vectors(space: FormSpace, count: int) -> list[np.ndarray]:
    """The first ``count`` nonzero isotropic vectors in a fixed scan order."""
    n, p = space.dim, space.p
    out = []
    for idx in range(1, p**n):
        v = np.array([(idx // p**k) % p for k in range(n)], dtype=np.int64)
        if space.q(v) == 0:
            out.append(v)
            if len(out) == count:
                break
    return out


def reflection(space: FormSpace, root: np.ndarray) -> Matrix:
    """The reflection x -> x - 2<x,r>/<r,r> r in an anisotropic root r."""
    if space.parity != "symmetric":
        raise ValueError("reflections live in orthogonal groups")
    p = space.p
    r = np.asarray(root, dtype=np.int64) % p
    qr = space.q(r)
    if qr == 0:
        raise ValueError("root must be anisotropic")
    c = (2 * pow(qr, -1, p)) % p
    m = (np.eye(space.dim, dtype=np.int64) - c * np.outer(r, space.gram.array @ r)) % p
    return Matrix(m, p)


def transvection(space: FormSpace, v: np.ndarray, c: int = 1) -> Matrix:
    """The symplectic transvection x -> x + c <x,v> v."""
    if space.parity != "alternating":
        raise ValueError("transvections live in symplectic groups")
    p = space.p
    v = np.asarray(v, dtype=np.int64) % p
    if not v.any():
        raise ValueError("direction must be nonzero")
    m = (
        np.eye(space.dim, dtype=np.int64)
        + (c % p) * np.outer(v, space.gram.array.T @ v)
    ) % p
    return Matrix(m, p)


def siegel_shear(space: FormSpace, u: np.ndarray, w: np.ndarray) -> Matrix:
    """The isotropic shear x -> x + <x,u> w - <x,w> u.

    Needs u, w spanning a totally isotropic plane (so a symmetric space must
    have Witt index >= 2).
    """
    p = space.p
    u = np.asarray(u, dtype=np.int64) % p
    w = np.asarray(w, dtype=np.int64) % p
    if space.q(u) or space.q(w) or space.pair(u, w):
        raise ValueError("u and w must span a totally isotropic plane")
    gt = space.gram.array.T
    m = (np.eye(space.dim, dtype=np.int64) + np.outer(w, gt @ u) - np.outer(u, gt @ w)) % p
    return Matrix(m, p)


def random_isometry(space: FormSpace, rng, length: int = 6) -> Matrix:
    """Product of ``length`` random reflections or transvections."""
    p = space.p
    out = Matrix.identity(space.dim, p)
    if space.parity == "symmetric":
        pool = anisotropic_vectors(space, 4 * space.dim)
        for _ in range(length):
            out = out @ reflection(space, pool[rng.randrange(len(pool))])
    else:
        n = space.dim
        for _ in range(length):
            v = np.array([rng.randrange(p) for _ in range(n)], dtype=np.int64)
            if not v.any():
                v[rng.randrange(n)] = 1
            out = out @ transvection(space, v, rng.randrange(1, p))
    return out


def spinor_norm(g: Matrix, space: FormSpace) -> int:
    """Spinor norm of an orthogonal isometry, valued in {+1, -1}.

    Factors g into reflections constructively: each round pins one
    anisotropic vector v (orthogonal to the previously pinned ones) by
    reflecting in g v - v when that displacement is anisotropic, and
    otherwise in g v + v followed by v (one of the two is always
    anisotropic since their norms sum to 4<v,v>).  At most 2*dim
    reflections are used; the norm is the product of the square classes of
    <r,r> over the roots, independent of the factorization found.
    """
    if space.parity != "symmetric":
        raise ValueError("spinor norm is defined on orthogonal groups")
    _require_isometry(g, space)
    p = space.p
    n = space.dim
    one = Matrix.identity(n, p)
    gram = space.gram.array
    residue = g
    norm = 1
    pinned: list[np.ndarray] = []
    reflections_used = 0
    while residue != one:
        if reflections_used >= 2 * n:
            raise InternalFactorizationFailure(
                f"no reflection factorization within {2 * n} reflections"
            )
        v = None
        for cand in _vector_stream(n, p):
            if space.q(cand) == 0:
                continue
            if any((cand @ gram @ u) % p for u in pinned):
                continue
            if (residue.apply(cand) != cand).any():
                v = cand
                break
        if v is None:
            raise InternalFactorizationFailure(
                "residue is not the identity but fixes every candidate vector"
            )
        image = residue.apply(v)
        diff = (image - v) % p
        if space.q(diff) != 0:
            norm *= square_class(space.q(diff), p)
            residue = reflection(space, diff) @ residue
            reflections_used += 1
        else:
            total = (image + v) % p
            norm *= square_class(space.q(total), p) * square_class(space.q(v), p)
            residue = reflection(space, v) @ reflection(space, total) @ residue
            reflections_used += 2
        pinned.append(v)
    return norm


def _vector_stream(n: int, p: int):
    """All vectors of F_p^n, cheap sparse ones first."""
    eye = np.eye(n, dtype=np.int64)
    for i in range(n):
        yield eye[i]
    for i in range(n):
        for j in range(i + 1, n):
            for c in range(1, p):
                yield (eye[i] + c * eye[j]) % p
    for idx in range(1, p**n):
        yield np.array([(idx // p**k) % p for k in range(n)], dtype=np.int64)


@dataclass(frozen=True)
class GroupOrders:
    """Order data of the full isometry group of a space.

    ``index_classes`` is the index of the derived subgroup in the full
    group: 1 in the symplectic case, 4 in the orthogonal case (2 for the
    degenerate one-dimensional orthogonal space).
    """

    full_order: int
    derived_order: int
    index_classes: int


def _witt_sign(space: FormSpace) -> int:
    """+1 for the hyperbolic (plus) type, -1 for the minus type, even dim."""
    m = space.dim // 2
    disc = (space.gram.det() * pow(-1, m, space.p)) % space.p
    return square_class(disc, space.p)


def isometry_group_orders(space: FormSpace) -> GroupOrders:
    """|Sp(V)| or |O(V)| together with the order of the derived subgroup."""
    p, n = space.p, space.dim
    if space.parity == "alternating":
        m = n // 2
        full = p ** (m * m)
        for i in range(1, m + 1):
            full *= p ** (2 * i) - 1
        return GroupOrders(full, full, 1)
    if n == 1:
        return GroupOrders(2, 1, 2)
    if n % 2 == 1:
        m = n // 2
        full = 2 * p ** (m * m)
        for i in range(1, m + 1):
            full *= p ** (2 * i) - 1
    else:
        m = n // 2
        eps = _witt_sign(space)
        full = 2 * p ** (m * (m - 1)) * (p**m - eps)
        for i in range(1, m):
            full *= p ** (2 * i) - 1
    return GroupOrders(full, full // 4, 4)


_CLASS_BY_IMAGE = {
    frozenset({(1, 1)}): "Omega",
    frozenset({(1, 1), (-1, 1)}): "KerSpinor",
    frozenset({(1, 1), (-1, -1)}): "KerSpinorDet",
    frozenset({(1, 1), (1, -1)}): "SO",
    frozenset({(1, 1), (1, -1), (-1, 1), (-1, -1)}): "FullO",
}


def subgroup_class(
    gens: Sequence[Matrix], space: FormSpace, derived_verified: bool = False
) -> str:
    """Which of the overgroups of the derived subgroup <gens> is.

    Computes the image of (determinant, spinor norm) on the generators in
    {+-1} x {+-1}; because both maps are homomorphisms this determines the
    subgroup once the derived subgroup is known to be contained, which the
    caller must have verified separately (see group_engine.contains_derived).
    """
    if not derived_verified:
        raise PrecedenceViolation(
            "subgroup_class requires the caller to have verified containment "
            "of the derived subgroup first"
        )
    if space.parity != "symmetric":
        raise ValueError("subgroup_class applies to orthogonal spaces")
    p = space.p
    image = {(1, 1)}
    for g in gens:
        _require_isometry(g, space)
        det = g.det()
        d = 1 if det == 1 else -1
        if det not in (1, p - 1):
            raise NotAnIsometry("isometry with determinant != +-1")
        pair = (d, spinor_norm(g, space))
        # close the image under the group law of {+-1} x {+-1}
        new = {(a * pair[0], b * pair[1]) for a, b in image}
        image |= new
    return _CLASS_BY_IMAGE.get(frozenset(image), "Other")
