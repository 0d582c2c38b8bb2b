"""Element taxonomy, spinor norms, and isometry-group orders."""

import itertools
from random import Random

import numpy as np
import pytest

from monodromy.classical_groups import (
    FormSpace,
    IDENTITY,
    ISOTROPIC_SHEAR,
    OTHER,
    REFLECTION,
    TRANSVECTION,
    anisotropic_vectors,
    classify_element,
    drop,
    is_isometry,
    isometry_group_orders,
    random_isometry,
    reflection,
    siegel_shear,
    spinor_norm,
    square_class,
    subgroup_class,
    transvection,
)
from monodromy.errors import NotAnIsometry, PrecedenceViolation
from monodromy.ff_linalg import Matrix
from monodromy.group_engine import derived_subgroup_generators, naive_closure


def brute_force_isometries(space, chunk=200_000):
    """All isometries by scanning every matrix; only for tiny spaces."""
    n, p = space.dim, space.p
    g = space.gram.array
    found = []
    batch = []
    for entries in itertools.product(range(p), repeat=n * n):
        batch.append(entries)
        if len(batch) == chunk:
            found.extend(_filter_isometries(batch, g, n, p))
            batch = []
    if batch:
        found.extend(_filter_isometries(batch, g, n, p))
    return found


def _filter_isometries(batch, g, n, p):
    arr = np.array(batch, dtype=np.int64).reshape(-1, n, n)
    prod = np.einsum("nji,jk,nkl->nil", arr, g, arr) % p
    mask = (prod == g).all(axis=(1, 2))
    return [Matrix(m, p) for m in arr[mask]]


def siegel_element_on_hyperbolic_o4(p=5):
    """f1 -> f1 + e2, f2 -> f2 - e1, fixing e1, e2 (basis order e1 e2 f1 f2)."""
    m = np.eye(4, dtype=np.int64)
    m[1, 2] = 1
    m[0, 3] = -1
    return Matrix(m, p)


class TestFormSpace:
    def test_standard_models(self):
        assert FormSpace.symplectic(4, 3).parity == "alternating"
        assert FormSpace.dot(3, 5).parity == "symmetric"
        assert FormSpace.hyperbolic(4, 5).parity == "symmetric"

    def test_alternating_needs_even_dim(self):
        with pytest.raises(ValueError):
            FormSpace.symplectic(3, 5)

    def test_degenerate_rejected(self):
        from monodromy.ff_linalg import BilinearForm

        with pytest.raises(ValueError):
            FormSpace(BilinearForm(Matrix([[1, 0], [0, 0]], 5), "symmetric"))

    def test_from_gram_infers_parity(self):
        assert FormSpace.from_gram(Matrix([[0, 1], [4, 0]], 5)).parity == "alternating"
        assert FormSpace.from_gram(Matrix.identity(2, 5)).parity == "symmetric"


class TestDrop:
    def test_identity(self):
        assert drop(Matrix.identity(3, 5), FormSpace.dot(3, 5)) == 0

    def test_diagonal_reflection(self):
        assert drop(Matrix.diagonal([-1, 1, 1], 5), FormSpace.dot(3, 5)) == 1

    def test_siegel_element(self):
        space = FormSpace.hyperbolic(4, 5)
        sigma = siegel_element_on_hyperbolic_o4()
        assert is_isometry(sigma, space)
        assert drop(sigma, space) == 2

    def test_non_isometry_rejected(self):
        with pytest.raises(NotAnIsometry):
            drop(Matrix([[2, 0], [0, 1]], 5), FormSpace.dot(2, 5))


class TestClassify:
    def test_transvection(self):
        space = FormSpace.from_gram(Matrix([[0, 1], [4, 0]], 5))
        cls = classify_element(Matrix([[1, 1], [0, 1]], 5), space)
        assert cls.tag == TRANSVECTION and cls.drop == 1

    def test_reflection(self):
        cls = classify_element(Matrix.diagonal([-1, 1, 1], 5), FormSpace.dot(3, 5))
        assert cls.tag == REFLECTION and cls.drop == 1

    def test_siegel_element_is_isotropic_shear(self):
        space = FormSpace.hyperbolic(4, 5)
        sigma = siegel_element_on_hyperbolic_o4()
        cls = classify_element(sigma, space)
        assert cls.tag == ISOTROPIC_SHEAR and cls.drop == 2
        # the isotropy of the image, spelled out: e1, e2 span it
        assert space.pair([1, 0, 0, 0], [0, 1, 0, 0]) == 0
        assert space.q([1, 0, 0, 0]) == 0 and space.q([0, 1, 0, 0]) == 0

    def test_identity_and_other(self):
        space = FormSpace.dot(3, 5)
        assert classify_element(Matrix.identity(3, 5), space).tag == IDENTITY
        assert classify_element(Matrix.scalar(-1, 3, 5), space).tag == OTHER

    def test_no_transvections_or_shears_in_o3_f5(self):
        # exhaustive over the whole group, via reflection closure
        space = FormSpace.dot(3, 5)
        refls = [reflection(space, r) for r in anisotropic_vectors(space, 40)]
        group = naive_closure(refls)
        assert len(group) == 240
        tags = {classify_element(m, space).tag for m in group}
        assert TRANSVECTION not in tags
        assert ISOTROPIC_SHEAR not in tags  # symmetric shears need dim >= 4


class TestBuilders:
    def test_reflection_is_involution_fixing_perp(self):
        space = FormSpace.dot(3, 5)
        for r in anisotropic_vectors(space, 10):
            s = reflection(space, r)
            assert is_isometry(s, space)
            assert (s @ s).is_identity()
            assert classify_element(s, space).tag == REFLECTION
            assert np.array_equal(s.apply(r), (-np.asarray(r)) % 5)

    def test_transvection_preserves_form(self):
        space = FormSpace.symplectic(4, 3)
        rng = Random(0)
        for _ in range(20):
            v = np.array([rng.randrange(3) for _ in range(4)], dtype=np.int64)
            if not v.any():
                continue
            t = transvection(space, v, rng.randrange(1, 3))
            assert is_isometry(t, space)
            assert classify_element(t, space).tag == TRANSVECTION

    def test_siegel_shear_builder(self):
        space = FormSpace.hyperbolic(4, 5)
        e1 = np.array([1, 0, 0, 0])
        e2 = np.array([0, 1, 0, 0])
        s = siegel_shear(space, e1, e2)
        assert is_isometry(s, space)
        assert classify_element(s, space).tag == ISOTROPIC_SHEAR

    def test_random_isometry_is_isometry(self):
        rng = Random(1)
        for space in (FormSpace.dot(3, 5), FormSpace.symplectic(2, 7)):
            for _ in range(10):
                assert is_isometry(random_isometry(space, rng), space)


class TestSpinorNorm:
    def test_identity_is_trivial(self):
        assert spinor_norm(Matrix.identity(3, 5), FormSpace.dot(3, 5)) == 1

    def test_single_reflection_square_classes(self):
        space = FormSpace.dot(3, 5)
        square_root = np.array([1, 0, 0])  # q = 1, a square
        nonsquare_root = np.array([1, 1, 0])  # q = 2, a nonsquare mod 5
        assert square_class(1, 5) == 1 and square_class(2, 5) == -1
        assert spinor_norm(reflection(space, square_root), space) == 1
        assert spinor_norm(reflection(space, nonsquare_root), space) == -1

    def test_depends_only_on_root_square_class(self):
        space = FormSpace.dot(3, 5)
        for r in anisotropic_vectors(space, 20):
            s = reflection(space, r)
            assert spinor_norm(s, space) == square_class(space.q(r), 5)

    def test_minus_identity_o3_f5(self):
        # explicit 3-reflection factorization through the orthogonal basis
        space = FormSpace.dot(3, 5)
        eye = np.eye(3, dtype=np.int64)
        product = reflection(space, eye[0]) @ reflection(space, eye[1]) @ reflection(
            space, eye[2]
        )
        assert product == Matrix.scalar(-1, 3, 5)
        assert spinor_norm(Matrix.scalar(-1, 3, 5), space) == 1

    @pytest.mark.parametrize(
        "space",
        [FormSpace.dot(3, 5), FormSpace.dot(4, 5), FormSpace.hyperbolic(4, 7)],
    )
    def test_agrees_with_random_factorizations(self, space):
        # oracle: build gamma as an explicit product of reflections with
        # known roots; the spinor norm must equal the product of the root
        # square classes, whatever factorization spinor_norm itself found
        rng = Random(2)
        pool = anisotropic_vectors(space, 30)
        for _ in range(40):
            expected = 1
            g = Matrix.identity(space.dim, space.p)
            for _ in range(rng.randrange(1, 7)):
                r = pool[rng.randrange(len(pool))]
                g = g @ reflection(space, r)
                expected *= square_class(space.q(r), space.p)
            assert spinor_norm(g, space) == expected

    def test_multiplicative(self):
        rng = Random(3)
        space = FormSpace.dot(4, 5)
        for _ in range(25):
            a = random_isometry(space, rng)
            b = random_isometry(space, rng)
            assert spinor_norm(a @ b, space) == spinor_norm(a, space) * spinor_norm(
                b, space
            )


class TestGroupOrders:
    def test_sp2_f3_brute_force(self):
        space = FormSpace.symplectic(2, 3)
        assert len(brute_force_isometries(space)) == 24
        assert isometry_group_orders(space).full_order == 24

    def test_o3_f5_brute_force(self):
        space = FormSpace.dot(3, 5)
        assert len(brute_force_isometries(space)) == 240
        assert isometry_group_orders(space).full_order == 240

    @pytest.mark.parametrize(
        "space,expected",
        [
            (FormSpace.symplectic(2, 3), 24),
            (FormSpace.symplectic(2, 5), 120),
            (FormSpace.symplectic(4, 3), 51840),
            (FormSpace.dot(3, 3), 48),
            (FormSpace.dot(3, 5), 240),
            (FormSpace.hyperbolic(2, 5), 8),  # O_2^+: dihedral of order 2(p-1)
            (FormSpace.dot(2, 5), 8),  # disc -1 is a square mod 5: plus type
            (FormSpace.from_gram(Matrix.diagonal([1, 2], 5)), 12),  # minus type
            (FormSpace.hyperbolic(4, 5), 28800),
            (FormSpace.dot(4, 5), 28800),  # disc 1: plus type
            (FormSpace.from_gram(Matrix.diagonal([1, 1, 1, 2], 5)), 31200),
            (FormSpace.dot(5, 5), 18720000),
        ],
    )
    def test_order_formulas(self, space, expected):
        assert isometry_group_orders(space).full_order == expected

    def test_sp4_f3_closure_cross_check(self):
        space = FormSpace.symplectic(4, 3)
        gens = derived_subgroup_generators(space)
        assert len(naive_closure(gens)) == 51840

    @pytest.mark.parametrize(
        "space",
        [
            FormSpace.symplectic(2, 3),
            FormSpace.symplectic(2, 5),
            FormSpace.dot(2, 3),
            FormSpace.hyperbolic(2, 3),
            FormSpace.dot(3, 3),
            FormSpace.symplectic(4, 3),
            FormSpace.dot(4, 3),
            FormSpace.hyperbolic(4, 3),
            FormSpace.hyperbolic(4, 5),
            FormSpace.from_gram(Matrix.diagonal([1, 1, 1, 2], 5)),
        ],
    )
    def test_order_matches_group_closure(self, space):
        # enumerate the full isometry group from pseudoreflection generators
        if space.parity == "alternating":
            gens = _all_transvections(space)
        else:
            gens = [reflection(space, r) for r in anisotropic_vectors(space, 80)]
        orders = isometry_group_orders(space)
        assert len(naive_closure(gens)) == orders.full_order

    def test_derived_index(self):
        assert isometry_group_orders(FormSpace.symplectic(4, 5)).index_classes == 1
        assert isometry_group_orders(FormSpace.dot(4, 5)).index_classes == 4


def _all_transvections(space):
    out = []
    seen = set()
    n, p = space.dim, space.p
    for entries in itertools.product(range(p), repeat=n):
        v = np.array(entries, dtype=np.int64)
        if not v.any():
            continue
        t = transvection(space, v, 1)
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


class TestSubgroupClass:
    def test_requires_precondition_flag(self):
        space = FormSpace.dot(3, 5)
        with pytest.raises(PrecedenceViolation):
            subgroup_class([Matrix.identity(3, 5)], space)

    def test_reflections_of_both_square_classes_give_full_o(self):
        space = FormSpace.dot(3, 5)
        gens = [
            reflection(space, np.array([1, 0, 0])),  # square class +1
            reflection(space, np.array([1, 1, 0])),  # square class -1
        ]
        assert subgroup_class(gens, space, derived_verified=True) == "FullO"

    def test_omega_generators_plus_square_reflection_give_ker_spinor(self):
        space = FormSpace.dot(3, 5)
        gens = list(derived_subgroup_generators(space))
        gens.append(reflection(space, np.array([1, 0, 0])))
        assert subgroup_class(gens, space, derived_verified=True) == "KerSpinor"

    def test_omega_generators_alone(self):
        space = FormSpace.dot(3, 5)
        gens = derived_subgroup_generators(space)
        assert subgroup_class(gens, space, derived_verified=True) == "Omega"

    def test_so_image(self):
        space = FormSpace.dot(3, 5)
        # product of reflections in roots of different square classes:
        # determinant +1, spinor norm -1
        g = reflection(space, np.array([1, 0, 0])) @ reflection(
            space, np.array([1, 1, 0])
        )
        gens = list(derived_subgroup_generators(space)) + [g]
        assert subgroup_class(gens, space, derived_verified=True) == "SO"
