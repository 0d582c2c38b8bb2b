"""Big-monodromy certificates and their exact cross-validation.

``certify`` evaluates the generator criterion on a hypothesis set: bounded
drops, orders prime to (r+1)! or pseudoreflection off the exempt subset, a
cardinality bound on the exempt subset, irreducibility, and the presence
of the witness element (a transvection in the alternating case, a
reflection and an isotropic shear in the symmetric case).  A full pass
certifies that the generated group contains the derived subgroup of the
isometry group.  ``cross_validate`` recomputes the subgroup exactly and
reports agreement; the criterion is sufficient but not necessary, so
"NotCertified but exactly big" is fine while the converse is a soundness
failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .classical_groups import (
    ElementClass,
    FormSpace,
    ISOTROPIC_SHEAR,
    REFLECTION,
    TRANSVECTION,
    classify_element,
    is_isometry,
    isometry_group_orders,
    subgroup_class,
)
from .errors import Inconclusive, NotAnIsometry, OrderOverflow
from .ff_linalg import Matrix, _kernel_basis, _rref
from .group_engine import (
    GeneratedGroup,
    contains_derived,
    element_order,
    is_irreducible,
)
from .families import MonodromySystem

__all__ = [
    "Hypotheses",
    "CheckResult",
    "Conclusion",
    "Certificate",
    "CrossReport",
    "ProbeWitness",
    "certify",
    "cross_validate",
    "commutator_probe",
]


@dataclass(frozen=True)
class Hypotheses:
    """A generator set with its exempt subset and drop bound."""

    space: FormSpace
    generators: tuple[Matrix, ...]
    s0: frozenset[int] = frozenset()
    r: int = 1

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "s0", frozenset(self.s0))
        if not self.generators:
            raise ValueError("need at least one generator")
        if self.r < 1:
            raise ValueError("r must be >= 1")
        for i in self.s0:
            if not 0 <= i < len(self.generators):
                raise ValueError(f"exempt index {i} out of range")
        for g in self.generators:
            if not is_isometry(g, self.space):
                raise NotAnIsometry("all generators must preserve the pairing")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class Conclusion:
    kind: str  # "FullSp" | "OrthogonalBig" | "NotCertified"
    refinement: Optional[str] = None  # orthogonal subgroup class, when known
    reason: Optional[str] = None  # first failing check, when NotCertified

    def __str__(self) -> str:
        if self.kind == "NotCertified":
            return f"NotCertified({self.reason})"
        if self.kind == "OrthogonalBig" and self.refinement not in (None, "unrefined"):
            return f"OrthogonalBig({self.refinement})"
        return self.kind


@dataclass(frozen=True)
class Certificate:
    checks: tuple[CheckResult, ...]
    conclusion: Conclusion

    @property
    def certified(self) -> bool:
        return self.conclusion.kind != "NotCertified"


def _classify_all(h: Hypotheses) -> list[ElementClass]:
    return [classify_element(g, h.space) for g in h.generators]


def certify(
    h: Hypotheses,
    seed: int = 0,
    limit: int = 10**7,
    derived_established: bool = False,
) -> Certificate:
    """Evaluate the generator criterion and return the certificate.

    Witness elements are only searched among the generators themselves,
    never among products; the packaged families always expose them as
    inertia generators, and a missing witness comes back as
    NotCertified(no-witness) rather than a group search.
    """
    space = h.space
    checks: list[CheckResult] = []
    classes = _classify_all(h)
    symmetric = space.parity == "symmetric"

    min_prime = 5 if symmetric else 3
    checks.append(
        CheckResult(
            "prime_bound",
            space.p >= min_prime,
            f"p={space.p} needs >= {min_prime} for {space.parity} spaces",
        )
    )

    group = GeneratedGroup(h.generators, seed=seed, limit=limit)
    try:
        report = is_irreducible(group)
        checks.append(
            CheckResult(
                "irreducibility",
                report.irreducible,
                f"method={report.method}"
                + ("" if report.irreducible else f" witness_dim={report.witness.dim}"),
            )
        )
    except Inconclusive as exc:
        checks.append(
            CheckResult("irreducibility", False, f"inconclusive after {exc.trials} trials")
        )

    drops = [c.drop for c in classes]
    checks.append(
        CheckResult(
            "drop_bound",
            all(d <= h.r for d in drops),
            f"max_drop={max(drops)} r={h.r}",
        )
    )

    bound = math.factorial(h.r + 1)
    bad = []
    for i, (g, cls) in enumerate(zip(h.generators, classes)):
        if i in h.s0:
            continue
        if cls.tag in (REFLECTION, TRANSVECTION):
            continue
        try:
            order = element_order(g)
        except OrderOverflow:
            bad.append(f"{i}:order-overflow")
            continue
        if math.gcd(order, bound) != 1:
            bad.append(f"{i}:order={order}")
    checks.append(
        CheckResult(
            "order_or_pseudoreflection",
            not bad,
            f"(r+1)!={bound}" + (f" offenders={','.join(bad)}" if bad else ""),
        )
    )

    checks.append(
        CheckResult(
            "exempt_bound",
            2 * (h.r + 1) * len(h.s0) <= space.dim,
            f"2(r+1)|S0|={2 * (h.r + 1) * len(h.s0)} dim={space.dim}",
        )
    )

    tags = {c.tag for c in classes}
    if symmetric:
        ok = REFLECTION in tags and ISOTROPIC_SHEAR in tags
        detail = "generators only; need a reflection and an isotropic shear"
    else:
        ok = TRANSVECTION in tags
        detail = "generators only; need a transvection"
    checks.append(CheckResult("witness_elements", ok, detail))

    failed = [c for c in checks if not c.passed]
    if failed:
        conclusion = Conclusion("NotCertified", reason=failed[0].name)
    elif symmetric:
        refinement = (
            subgroup_class(h.generators, space, derived_verified=True)
            if derived_established
            else "unrefined"
        )
        conclusion = Conclusion("OrthogonalBig", refinement=refinement)
    else:
        conclusion = Conclusion("FullSp")
    return Certificate(tuple(checks), conclusion)


_BIG_ORTHOGONAL_CLASSES = {"FullO", "KerSpinor", "KerSpinorDet"}


@dataclass(frozen=True)
class CrossReport:
    certificate: Certificate
    exact_order: int
    exact_contains_derived: bool
    exact_class: Optional[str]
    agreement: bool


def cross_validate(h: Hypotheses, seed: int = 0, limit: int = 10**7) -> CrossReport:
    """Exact subgroup computation set against the certificate.

    Disagreement means the certificate claimed big monodromy and the exact
    computation refutes it; a NotCertified certificate never disagrees (the
    criterion is sufficient, not necessary).
    """
    group = GeneratedGroup(h.generators, seed=seed, limit=limit)
    exact_order = group.order()
    derived = contains_derived(group, h.space)
    exact_class = None
    if h.space.parity == "symmetric" and derived:
        exact_class = subgroup_class(h.generators, h.space, derived_verified=True)
    cert = certify(h, seed=seed, limit=limit, derived_established=derived)

    agreement = True
    if cert.certified:
        if not derived:
            agreement = False
        elif cert.conclusion.kind == "FullSp":
            agreement = exact_order == isometry_group_orders(h.space).full_order
        else:
            agreement = exact_class in _BIG_ORTHOGONAL_CLASSES
    return CrossReport(cert, exact_order, derived, exact_class, agreement)


# ---------------------------------------------------------------------------
# the commutator probe


@dataclass(frozen=True)
class ProbeWitness:
    """A non-commuting reflection/shear pair with a long commutator.

    ``basis`` rows span the three-dimensional subspace (x, y, z) on which
    the pair acts in the canonical triangular shape; ``restrictions`` holds
    the restricted matrices of the reflection, the shear, and their
    commutator in that basis.
    """

    reflection_index: int
    shear_index: int
    commutator: Matrix
    order: int
    basis: Matrix
    restrictions: dict


def _solve_in_span(rows: np.ndarray, vec: np.ndarray, p: int) -> Optional[np.ndarray]:
    """Coordinates of ``vec`` in the row span, or None if outside."""
    system = np.concatenate([rows.T, vec.reshape(-1, 1)], axis=1) % p
    reduced, pivots = _rref(system, p)
    k = rows.shape[0]
    if k in pivots:
        return None
    coords = np.zeros(k, dtype=np.int64)
    for i, piv in enumerate(pivots):
        coords[piv] = reduced[i, -1]
    return coords


def commutator_probe(system: MonodromySystem) -> Optional[ProbeWitness]:
    """Search generator pairs for a reflection/shear commutator of order >= p.

    Returns the first non-commuting pair whose commutator has order at
    least p, together with the three-dimensional restriction data in the
    basis (x, y, z) = (shear displacement of the root, a shear-fixed vector
    moved onto the root, the root).  Commuting pairs (root inside the fixed
    space of the shear) are skipped.  Returns None when no pair qualifies.
    """
    space = system.space
    p = space.p
    mats = system.tuple.matrices
    refl_idx = [i for i, c in enumerate(system.classifications) if c.tag == REFLECTION]
    shear_idx = [
        i for i, c in enumerate(system.classifications) if c.tag == ISOTROPIC_SHEAR
    ]
    if not refl_idx or not shear_idx:
        raise ValueError("need a reflection and an isotropic shear among generators")
    eye = np.eye(space.dim, dtype=np.int64)
    for i in refl_idx:
        rho = mats[i]
        rho_shift = (rho.array - eye) % p
        # the root line of the reflection
        root_rows = _rref(rho_shift.T, p)[0][:1]
        z = root_rows[0]
        for j in shear_idx:
            sigma = mats[j]
            if rho @ sigma == sigma @ rho:
                continue
            # y: a sigma-fixed vector with (rho - 1) y = c z, rescaled so c = 1
            y = None
            for cand in _kernel_basis((sigma.array - eye) % p, p):
                img = (rho_shift @ cand) % p
                coeffs = _solve_in_span(root_rows, img, p)
                if coeffs is not None and coeffs[0] % p:
                    y = (cand * pow(int(coeffs[0]), -1, p)) % p
                    break
            if y is None:
                continue
            x = ((sigma.array - eye) @ z) % p
            basis_rows = np.stack([x, y, z])
            if _rref(basis_rows, p)[0][:3].shape[0] < 3 or len(_rref(basis_rows, p)[1]) < 3:
                continue
            comm = rho @ sigma @ rho @ sigma.inv()
            order = element_order(comm)
            if order < p:
                continue
            restrictions = {}
            good = True
            for name, m in (("reflection", rho), ("shear", sigma), ("commutator", comm)):
                cols = []
                for b in basis_rows:
                    coords = _solve_in_span(basis_rows, (m.array @ b) % p, p)
                    if coords is None:
                        good = False
                        break
                    cols.append(coords)
                if not good:
                    break
                restrictions[name] = Matrix(np.stack(cols, axis=1), p)
            if not good:
                continue
            return ProbeWitness(
                reflection_index=i,
                shear_index=j,
                commutator=comm,
                order=order,
                basis=Matrix(basis_rows, p),
                restrictions=restrictions,
            )
    return None
