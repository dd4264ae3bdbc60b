"""Orthogonal unitary bases and non-equivalence certificates.

A basis here is a set of d^2 unitaries on C^d that are pairwise orthogonal
under the Hilbert-Schmidt inner product.  Besides the clock/shift family,
the module constructs bases from disjoint perfect matchings of K_{d,d} and
from the dimension-3 phase-twist family, and certifies that they cannot be
mapped onto the clock/shift basis by any (phases, left unitary, right
unitary) equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkit as nk

KIND_EIGENVALUE_RATIO = "eigenvalue-ratio"
KIND_DISTINCT_COUNT = "distinct-count"
KIND_PROJECTIVE = "projective-noncommutativity"


@dataclass(frozen=True)
class UnitaryBasis:
    d: int
    elements: tuple[np.ndarray, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if len(self.elements) != self.d * self.d:
            raise ValueError(
                f"need {self.d * self.d} elements for dimension {self.d}, got {len(self.elements)}"
            )
        if self.labels is not None and len(self.labels) != len(self.elements):
            raise ValueError("labels length must match element count")


@dataclass(frozen=True)
class PermutationMatching:
    """Perfect matching in K_{d,d}: left vertex a is matched to image[a]."""

    d: int
    image: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.image) != list(range(self.d)):
            raise ValueError(f"image {self.image} is not a bijection on 0..{self.d - 1}")

    def matrix(self) -> np.ndarray:
        p = np.zeros((self.d, self.d), dtype=complex)
        for a, b in enumerate(self.image):
            p[b, a] = 1.0
        return p


@dataclass(frozen=True)
class NonEquivalenceCertificate:
    kind: str
    witness: tuple[int, ...]
    witness_value: complex | float | int


@dataclass(frozen=True)
class BasisReport:
    passed: bool
    element_count_ok: bool
    max_unitarity_violation: float
    max_orthogonality_violation: float
    tol: float


def clock_matrix(d: int) -> np.ndarray:
    omega = np.exp(2j * np.pi / d)
    return np.diag(omega ** np.arange(d))


def shift_matrix(d: int) -> np.ndarray:
    x = np.zeros((d, d), dtype=complex)
    for k in range(d):
        x[(k + 1) % d, k] = 1.0
    return x


def clock_shift_basis(d: int) -> UnitaryBasis:
    """The d^2 operators X^i Z^j, i then j ascending."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    x, z = shift_matrix(d), clock_matrix(d)
    elements, labels = [], []
    xi = np.eye(d, dtype=complex)
    for i in range(d):
        zj = np.eye(d, dtype=complex)
        for j in range(d):
            elements.append(xi @ zj)
            labels.append(f"X^{i}Z^{j}")
            zj = zj @ z
        xi = xi @ x
    return UnitaryBasis(d=d, elements=tuple(elements), labels=tuple(labels))


def tensor_product_basis(b1: UnitaryBasis, b2: UnitaryBasis) -> UnitaryBasis:
    """All pairwise tensor products; orthogonality is inherited from the factors."""
    elements, labels = [], []
    for i, e1 in enumerate(b1.elements):
        for j, e2 in enumerate(b2.elements):
            elements.append(np.kron(e1, e2))
            l1 = b1.labels[i] if b1.labels else str(i)
            l2 = b2.labels[j] if b2.labels else str(j)
            labels.append(f"({l1})x({l2})")
    return UnitaryBasis(d=b1.d * b2.d, elements=tuple(elements), labels=tuple(labels))


def pauli_tensor_basis(d: int) -> UnitaryBasis:
    """Iterated tensor powers of the two-dimensional clock/shift (Pauli) basis."""
    k = d.bit_length() - 1
    if d < 4 or 2**k != d:
        raise ValueError("pauli tensor basis needs d a power of two, at least 4")
    basis = clock_shift_basis(2)
    for _ in range(k - 1):
        basis = tensor_product_basis(basis, clock_shift_basis(2))
    return basis


def smallest_nondividing(d: int) -> int:
    """Least k in [2, d-2] that does not divide d (exists for every d >= 5)."""
    if d < 5:
        raise ValueError("defined only for d >= 5")
    for k in range(2, d - 1):
        if d % k != 0:
            return k
    raise AssertionError(f"no non-divisor in [2, {d - 2}] for {d}")  # unreachable


def _augment(u, adj_list, match_right, seen):
    for v in adj_list[u]:
        if not seen[v]:
            seen[v] = True
            if match_right[v] < 0 or _augment(match_right[v], adj_list, match_right, seen):
                match_right[v] = u
                return True
    return False


def _perfect_matching(adjacency: np.ndarray) -> list[int]:
    """One perfect matching of a bipartite graph via augmenting paths.

    Left vertices are scanned in ascending order, so the result is
    deterministic.  Returns image[a] = matched right vertex of a.
    """
    d = adjacency.shape[0]
    adj_list = [list(np.nonzero(adjacency[a])[0]) for a in range(d)]
    match_right = [-1] * d
    for a in range(d):
        if not _augment(a, adj_list, match_right, [False] * d):
            raise RuntimeError("no perfect matching; input was not regular")
    image = [-1] * d
    for b, a in enumerate(match_right):
        image[a] = b
    return image


def regular_bipartite_edge_coloring(
    d: int, adjacency: np.ndarray, k: int
) -> list[PermutationMatching]:
    """Split a k-regular bipartite graph into k disjoint perfect matchings.

    Repeatedly extracts a maximum matching (Hall's theorem guarantees each
    residual stays regular enough to contain one).
    """
    adj = np.asarray(adjacency, dtype=bool).copy()
    if adj.shape != (d, d):
        raise ValueError(f"adjacency must be {d}x{d}")
    if not (np.all(adj.sum(axis=0) == k) and np.all(adj.sum(axis=1) == k)):
        raise ValueError("graph is not k-regular")
    matchings = []
    for _ in range(k):
        image = _perfect_matching(adj)
        matchings.append(PermutationMatching(d=d, image=tuple(image)))
        for a, b in enumerate(image):
            adj[a, b] = False
    if adj.any():
        raise RuntimeError("edges left over after k matchings; input was not k-regular")
    return matchings


def matching_basis(d: int) -> UnitaryBasis:
    """Basis {P_i Z^j} from disjoint matchings of K_{d,d}.

    P_0 is the identity and P_1 carries a cycle of length k with k not
    dividing d, which is what blocks equivalence with the clock/shift
    family.  The remaining matchings come from edge-coloring the residual
    (d-2)-regular graph.
    """
    if d < 5:
        raise ValueError("matching basis needs d >= 5")
    k = smallest_nondividing(d)
    p0 = tuple(range(d))
    p1 = tuple([(a + 1) % k for a in range(k)] + [k + (a - k + 1) % (d - k) for a in range(k, d)])
    adj = np.ones((d, d), dtype=bool)
    for a in range(d):
        adj[a, p0[a]] = False
        adj[a, p1[a]] = False
    rest = regular_bipartite_edge_coloring(d, adj, d - 2)
    perms = [PermutationMatching(d, p0), PermutationMatching(d, p1)] + rest
    z = clock_matrix(d)
    elements, labels = [], []
    for i, perm in enumerate(perms):
        pm = perm.matrix()
        zj = np.eye(d, dtype=complex)
        for j in range(d):
            elements.append(pm @ zj)
            labels.append(f"P{i}Z^{j}")
            zj = zj @ z
    return UnitaryBasis(d=d, elements=tuple(elements), labels=tuple(labels))


def werner3_basis(beta: complex) -> UnitaryBasis:
    """Dimension-3 basis with one column twisted by M = diag(beta, 1, 1).

    Any unit-modulus beta gives an orthogonal unitary basis; beta != 1
    breaks projective commutativity.
    """
    if abs(abs(beta) - 1.0) > 1e-12:
        raise ValueError("beta must have unit modulus")
    x, z = shift_matrix(3), clock_matrix(3)
    m = np.diag([beta, 1.0, 1.0]).astype(complex)
    elements, labels = [], []
    for i in range(3):
        zi = np.linalg.matrix_power(z, i)
        for j in range(3):
            if j == 1:
                elements.append(x @ zi @ m)
                labels.append(f"XZ^{i}M")
            else:
                elements.append(np.linalg.matrix_power(x, j) @ zi)
                labels.append(f"X^{j}Z^{i}")
    return UnitaryBasis(d=3, elements=tuple(elements), labels=tuple(labels))


def verify_orthogonal_unitary_basis(b: UnitaryBasis, tol: float = nk.DEFAULT_TOL) -> BasisReport:
    """Check element count, unitarity, and pairwise HS orthogonality."""
    d = b.d
    count_ok = len(b.elements) == d * d
    eye = np.eye(d)
    unit_viol = 0.0
    for e in b.elements:
        unit_viol = max(unit_viol, float(np.abs(e.conj().T @ e - eye).max()))
    flat = np.stack([e.reshape(-1) for e in b.elements])
    gram = flat.conj() @ flat.T
    orth_viol = float(np.abs(gram - d * np.eye(len(b.elements))).max())
    passed = count_ok and unit_viol <= tol and orth_viol <= tol
    return BasisReport(
        passed=passed,
        element_count_ok=count_ok,
        max_unitarity_violation=unit_viol,
        max_orthogonality_violation=orth_viol,
        tol=tol,
    )


def _distinct_count(values: np.ndarray, tol: float) -> int:
    reps: list[complex] = []
    for v in values:
        if all(abs(v - r) > tol for r in reps):
            reps.append(complex(v))
    return len(reps)


def certify_not_clock_shift(
    b: UnitaryBasis, tol: float = nk.DEFAULT_TOL
) -> list[NonEquivalenceCertificate]:
    """Run the three sufficient non-equivalence tests against clock/shift.

    All statistics are built from pairwise products A* B (and, for the
    commutativity test, products anchored at element 0), which transform by
    a phase and a one-sided conjugation under any basis equivalence, so each
    test fires on a basis iff it fires on every equivalent basis.

    T1 (eigenvalue-ratio): in any basis equivalent to clock/shift, A* B is
    phase-similar to some X^a Z^b, whose eigenvalue ratios are all d-th
    roots of unity.  A ratio r with |r^d - 1| > tol*d rules equivalence out.

    T2 (distinct-count): an equivalent basis contains a pair whose A* B is
    phase-similar to the clock operator, with d distinct eigenvalues.  If no
    pair reaches d distinct eigenvalues, equivalence is impossible.

    T3 (projective-noncommutativity): the anchored products G_i = U_i U_0*
    of an equivalent basis are phase-conjugates of clock/shift elements and
    hence commute up to a phase; a pair with a commutator defect rules
    equivalence out.

    An empty result is NOT a proof of equivalence.
    """
    report = verify_orthogonal_unitary_basis(b, max(tol, 1e-8))
    if not report.passed:
        raise ValueError("certify_not_clock_shift requires a valid orthogonal unitary basis")
    d = b.d
    n = len(b.elements)
    certificates: list[NonEquivalenceCertificate] = []

    ratio_witness = None
    max_distinct = 0
    max_distinct_witness = (0, 0)
    for i in range(n):
        ai = b.elements[i].conj().T
        for j in range(i + 1, n):
            w = np.linalg.eigvals(ai @ b.elements[j])
            count = _distinct_count(w, max(tol * 10, 1e-7))
            if count > max_distinct:
                max_distinct, max_distinct_witness = count, (i, j)
            if ratio_witness is None:
                ratios = np.divide.outer(w, w)
                bad = np.abs(ratios**d - 1.0) > tol * d
                if bad.any():
                    p, q = np.argwhere(bad)[0]
                    ratio_witness = ((i, j), complex(ratios[p, q]))
    if ratio_witness is not None:
        certificates.append(
            NonEquivalenceCertificate(
                kind=KIND_EIGENVALUE_RATIO,
                witness=ratio_witness[0],
                witness_value=ratio_witness[1],
            )
        )
    if max_distinct < d:
        certificates.append(
            NonEquivalenceCertificate(
                kind=KIND_DISTINCT_COUNT,
                witness=max_distinct_witness,
                witness_value=max_distinct,
            )
        )

    anchor = b.elements[0].conj().T
    products = [e @ anchor for e in b.elements]
    eye = np.eye(d)
    comm_witness = None
    worst = 0.0
    for i in range(n):
        gi = products[i]
        for j in range(i + 1, n):
            gj = products[j]
            comm = gi @ gj @ gi.conj().T @ gj.conj().T
            defect = float(np.linalg.norm(comm - (np.trace(comm) / d) * eye))
            if defect > worst:
                worst, comm_witness = defect, (0, i, j)
    if worst > tol * d:
        certificates.append(
            NonEquivalenceCertificate(
                kind=KIND_PROJECTIVE, witness=comm_witness, witness_value=worst
            )
        )
    return certificates


def apply_basis_equivalence(
    b: UnitaryBasis, phases, v: np.ndarray, w: np.ndarray
) -> UnitaryBasis:
    """Map each element U_i to phases[i] * v @ U_i @ w (a known equivalence)."""
    elements = tuple(ph * (v @ e @ w) for ph, e in zip(phases, b.elements))
    return UnitaryBasis(d=b.d, elements=elements, labels=b.labels)
