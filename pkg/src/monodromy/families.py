"""Builders for the two packaged monodromy families.

``hyperelliptic_system`` produces the rank-2g tuple of the mod-p torsion
monodromy of a one-parameter hyperelliptic family: the quadratic
convolution of the rank-one tuple with monodromy -1 at each branch point.
Every finite local matrix is a symplectic transvection and the invariant
pairing is alternating.

``twist_family_system`` produces the quadratic-twist family over the base
curve with multiplicative locus {0, 1}: the base rank-2 tuple is twisted
by -1 at the roots of the twisting polynomial and convolved again.  The
invariant pairing is symmetric, with a reflection at each multiplicative
point and an isotropic shear at each root.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .classical_groups import (
    ElementClass,
    FormSpace,
    ISOTROPIC_SHEAR,
    REFLECTION,
    TRANSVECTION,
    classify_element,
)
from .convolution import Label, PuncturedTuple, middle_convolve, twist_quadratic
from .errors import BadLocus, NegativeDimension
from .ff_linalg import BilinearForm, Matrix, invariant_forms, is_prime

__all__ = [
    "MonodromySystem",
    "kummer_tuple",
    "hyperelliptic_system",
    "twist_family_system",
    "dim_formula",
    "discover_pairing",
]


@dataclass(frozen=True)
class MonodromySystem:
    """A punctured tuple with its discovered pairing and local taxonomy."""

    tuple: PuncturedTuple
    pairing: BilinearForm
    classifications: tuple[ElementClass, ...]
    expected_dim: int

    @property
    def space(self) -> FormSpace:
        return FormSpace(self.pairing)

    @property
    def generators(self) -> tuple[Matrix, ...]:
        return self.tuple.matrices

    def classification_at(self, label: Label) -> ElementClass:
        return self.classifications[self.tuple.punctures.index(label)]


def discover_pairing(t: PuncturedTuple) -> BilinearForm:
    """The invariant pairing of a tuple whose invariant-form space is a line.

    Raises ValueError when the space of invariant forms is not
    one-dimensional or its generator is degenerate.
    """
    basis = invariant_forms(t.matrices)
    if len(basis) != 1:
        raise ValueError(
            f"invariant-form space has dimension {len(basis)}, expected 1"
        )
    gram = basis[0]
    if gram.det() == 0:
        raise ValueError("invariant form is degenerate")
    if gram.T == gram:
        return BilinearForm(gram, "symmetric")
    if gram.T == -gram:
        return BilinearForm(gram, "alternating")
    raise ValueError("invariant form has no parity")


def kummer_tuple(points: Sequence[Label], p: int) -> PuncturedTuple:
    """Rank-one tuple with local monodromy -1 at each given point."""
    if not is_prime(p) or p < 3:
        raise ValueError(f"modulus must be an odd prime, got {p}")
    if len(points) < 2:
        raise ValueError("need at least two points")
    minus_one = Matrix([[p - 1]], p)
    return PuncturedTuple(list(points), [minus_one] * len(points))


def _default_branch_points(count: int, p: int) -> list[Label]:
    """Residues 0..count-1 while they fit, symbolic labels past that."""
    return [i if i < p else f"t{i}" for i in range(count)]


def hyperelliptic_system(
    genus: int, p: int, points: Optional[Sequence[Label]] = None
) -> MonodromySystem:
    """Monodromy of the genus-g family branched at 2g points plus a moving one.

    The output has rank 2g, a one-dimensional alternating invariant pairing,
    and a transvection at every finite puncture.
    """
    if genus < 1:
        raise ValueError("genus must be >= 1")
    if points is None:
        points = _default_branch_points(2 * genus, p)
    if len(points) != 2 * genus:
        raise ValueError(f"need exactly {2 * genus} branch points")
    base = kummer_tuple(points, p)
    out = middle_convolve(base, p - 1)
    if out.rank != 2 * genus:
        raise AssertionError("convolution rank disagrees with 2g")
    pairing = discover_pairing(out)
    if pairing.parity != "alternating":
        raise AssertionError("hyperelliptic pairing must be alternating")
    space = FormSpace(pairing)
    classes = tuple(classify_element(m, space) for m in out.matrices)
    if any(c.tag != TRANSVECTION for c in classes):
        raise AssertionError("every finite local matrix must be a transvection")
    return MonodromySystem(out, pairing, classes, 2 * genus)


def twist_family_system(g_roots: Sequence[Label], p: int) -> MonodromySystem:
    """Quadratic twists of the rank-2 family with multiplicative locus {0, 1}.

    ``g_roots`` are the roots of the fixed part of the twisting polynomial;
    with d = len(g_roots) + 1 the output dimension is 2d for even d and
    2d - 1 for odd d.  Classifications: Reflection at 0 and 1, IsotropicShear
    at every root.
    """
    if not is_prime(p) or p < 5:
        raise ValueError(f"modulus must be a prime >= 5, got {p}")
    roots = list(g_roots)
    if not roots:
        raise BadLocus("need at least one root (d >= 2)")
    if len(set(roots)) != len(roots):
        raise BadLocus("twist roots repeat")
    for lab in roots:
        if lab in (0, 1):
            raise BadLocus("twist roots must avoid the multiplicative locus {0, 1}")
    base = hyperelliptic_system(1, p, [0, 1]).tuple
    twisted = twist_quadratic(base, roots)
    out = middle_convolve(twisted, p - 1)
    d = len(roots) + 1
    expected = 2 * d if d % 2 == 0 else 2 * d - 1
    if out.rank != expected:
        raise AssertionError(f"twist family rank {out.rank} != expected {expected}")
    pairing = discover_pairing(out)
    if pairing.parity != "symmetric":
        raise AssertionError("twist-family pairing must be symmetric")
    space = FormSpace(pairing)
    classes = tuple(classify_element(m, space) for m in out.matrices)
    for lab, cls in zip(out.punctures, classes):
        want = REFLECTION if lab in (0, 1) else ISOTROPIC_SHEAR
        if cls.tag != want:
            raise AssertionError(f"puncture {lab} classified {cls.tag}, wanted {want}")
    return MonodromySystem(out, pairing, classes, expected)


def dim_formula(deg_m: int, deg_a: int, genus: int) -> int:
    """deg(M) + 2 deg(A) + 4 (genus - 1), rejecting the invalid regime."""
    if deg_m < 0 or deg_a < 0 or genus < 0:
        raise ValueError("degrees and genus must be non-negative")
    value = deg_m + 2 * deg_a + 4 * (genus - 1)
    if value < 0:
        raise NegativeDimension(f"dimension formula gave {value}")
    return value
