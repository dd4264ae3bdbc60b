import numpy as np
import pytest
import scipy.linalg

from superdense import numkit as nk
from superdense.numkit import ID2, PAULI_X, PAULI_Y, PAULI_Z


def random_matrix(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_hermitian(rng, n):
    m = random_matrix(rng, n)
    return (m + m.conj().T) / 2


def random_density(rng, n):
    m = random_matrix(rng, n)
    rho = m @ m.conj().T
    return rho / np.trace(rho)


class TestTensor:
    def test_identity_factor(self):
        out = nk.tensor(ID2, PAULI_Z)
        assert np.allclose(out, np.diag([1, -1, 1, -1]))

    def test_xx_antidiagonal(self):
        out = nk.tensor(PAULI_X, PAULI_X)
        assert np.allclose(out, np.fliplr(np.eye(4)))

    def test_basis_projector(self):
        p0 = np.array([[1, 0], [0, 0]], dtype=complex)
        p1 = np.array([[0, 0], [0, 1]], dtype=complex)
        out = nk.tensor(p0, p1)
        expected = np.zeros((4, 4))
        expected[1, 1] = 1  # |01> is index 1 with left factor slow
        assert np.allclose(out, expected)


class TestPartialTrace:
    def test_epr_reduction(self):
        epr = nk.max_entangled(2)
        rho = np.outer(epr, epr.conj())
        assert np.allclose(nk.partial_trace(rho, [2, 2], [0]), np.eye(2) / 2)
        assert np.allclose(nk.partial_trace(rho, [2, 2], [1]), np.eye(2) / 2)

    def test_product_state(self):
        rng = np.random.default_rng(7)
        rho, sigma = random_density(rng, 2), random_density(rng, 3)
        out = nk.partial_trace(nk.tensor(rho, sigma), [2, 3], [1])
        assert np.allclose(out, np.trace(rho) * sigma)

    def test_cnot_second_qubit(self):
        cnot = np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        )
        # oracle: explicit sum over the traced index
        expected = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                expected[i, j] = sum(cnot[2 * i + x, 2 * j + x] for x in range(2))
        assert np.allclose(expected, np.diag([2, 0]))
        assert np.allclose(nk.partial_trace(cnot, [2, 2], [0]), expected)

    def test_three_factor_middle(self):
        rng = np.random.default_rng(3)
        a, b, c = (random_density(rng, d) for d in (2, 3, 2))
        out = nk.partial_trace(nk.tensor_all(a, b, c), [2, 3, 2], [0, 2])
        assert np.allclose(out, nk.tensor(a, c))

    def test_density_stays_density(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            rho = random_density(rng, 12)
            red = nk.partial_trace(rho, [3, 4], [1])
            assert abs(np.trace(red) - 1) < 1e-10
            assert nk.is_psd(red, 1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            nk.partial_trace(np.eye(5), [2, 2], [0])


class TestSpectralDecomposition:
    def test_pauli_z(self):
        dec = nk.spectral_decomposition(PAULI_Z)
        assert len(dec.groups) == 2
        (l1, p1), (l2, p2) = dec.groups
        assert l1 == pytest.approx(1.0) and l2 == pytest.approx(-1.0)
        assert np.allclose(p1, np.diag([1, 0])) and np.allclose(p2, np.diag([0, 1]))

    def test_degenerate_spectrum(self):
        dec = nk.spectral_decomposition(np.eye(2) / 2)
        assert len(dec.groups) == 1
        lam, proj = dec.groups[0]
        assert lam == pytest.approx(0.5)
        assert np.allclose(proj, np.eye(2))

    def test_grouping_policy(self):
        h = np.diag([1.0, 1.0 + 1e-12])
        # oracle: the raw eigensolver sees two distinct values
        raw = np.linalg.eigvalsh(h)
        assert raw[1] - raw[0] > 0
        dec = nk.spectral_decomposition(h, group_tol=1e-9)
        assert len(dec.groups) == 1
        assert np.allclose(dec.groups[0][1], np.eye(2))

    def test_reconstruction_and_structure(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            h = random_hermitian(rng, 8)
            dec = nk.spectral_decomposition(h)
            assert np.linalg.norm(h - dec.reconstruct()) <= 1e-10 * np.linalg.norm(h)
            total = sum(p for _, p in dec.groups)
            assert np.allclose(total, np.eye(8), atol=1e-10)
            for i, (_, p) in enumerate(dec.groups):
                assert nk.is_projector(p, 1e-9)
                for _, q in dec.groups[i + 1:]:
                    assert np.linalg.norm(p @ q) < 1e-9

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            nk.spectral_decomposition(np.array([[0, 1], [0, 0]], dtype=complex))


class TestPolarDecomposition:
    def test_zero_matrix_convention(self):
        d, t = nk.polar_decomposition(np.zeros((3, 3)))
        assert np.allclose(d, 0) and np.allclose(t, np.eye(3))

    def test_unitary_input(self):
        rng = np.random.default_rng(2)
        q, _ = np.linalg.qr(random_matrix(rng, 4))
        d, t = nk.polar_decomposition(q)
        assert np.allclose(d, np.eye(4), atol=1e-10)
        assert np.allclose(t, q, atol=1e-10)

    def test_pinned_singular_example(self):
        f = np.array([[0, 2], [0, 0]], dtype=complex)
        d, t = nk.polar_decomposition(f)
        # oracle: d must equal sqrt(f f*) computed independently
        assert np.allclose(d, scipy.linalg.sqrtm(f @ f.conj().T), atol=1e-10)
        assert np.allclose(d, np.diag([2, 0]), atol=1e-12)
        assert np.allclose(t, np.array([[0, 1], [1, 0]]), atol=1e-12)

    def test_invariants_random(self):
        rng = np.random.default_rng(13)
        for k in range(30):
            n = int(rng.integers(1, 9))
            f = random_matrix(rng, n)
            if k % 3 == 0:
                f[:, : n // 2] = 0
            d, t = nk.polar_decomposition(f)
            assert np.linalg.norm(f - d @ t) <= 1e-10 * (1 + np.linalg.norm(f))
            assert np.linalg.norm(t.conj().T @ t - np.eye(n)) <= 1e-10
            assert nk.is_psd(d, 1e-9)


class TestPsdSqrt:
    def test_diagonal(self):
        assert np.allclose(nk.psd_sqrt(np.diag([4.0, 9.0])), np.diag([2, 3]))

    def test_projector_idempotence(self):
        v = np.array([1, 1j]) / np.sqrt(2)
        p = np.outer(v, v.conj())
        assert np.allclose(nk.psd_sqrt(p), p, atol=1e-12)

    def test_orthogonal_projector_sum(self):
        m = 3
        p = np.diag([1.0, 1.0, 1.0, 0.0])
        assert np.allclose(nk.psd_sqrt(p / m**2), p / m, atol=1e-12)

    def test_square_property(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            p = random_density(rng, 6) * rng.uniform(0.5, 10)
            s = nk.psd_sqrt(p)
            assert np.linalg.norm(s @ s - p) <= 1e-9 * np.linalg.norm(p)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            nk.psd_sqrt(np.diag([1.0, -0.5]))


class TestMaxEntangled:
    def test_d2(self):
        ket = nk.max_entangled(2)
        expected = np.zeros(4)
        expected[0] = expected[3] = 1 / np.sqrt(2)
        assert np.allclose(ket, expected)

    def test_d3_amplitudes(self):
        ket = nk.max_entangled(3)
        for i in range(3):
            assert ket[i * 3 + i] == pytest.approx(1 / np.sqrt(3))
        assert np.count_nonzero(ket) == 3

    @pytest.mark.parametrize("d", [1, 2, 3, 5, 8])
    def test_unit_norm(self, d):
        assert np.linalg.norm(nk.max_entangled(d)) == pytest.approx(1.0)


class TestHsInner:
    def test_pauli_orthogonality(self):
        assert nk.hs_inner(PAULI_X, PAULI_Z) == pytest.approx(0)

    def test_self_inner_unitary(self):
        rng = np.random.default_rng(23)
        for d in (2, 3, 5):
            q, _ = np.linalg.qr(random_matrix(rng, d))
            assert nk.hs_inner(q, q) == pytest.approx(d)

    def test_z_xz(self):
        # oracle: direct entrywise trace of Z* (XZ)
        prod = PAULI_Z.conj().T @ (PAULI_X @ PAULI_Z)
        assert complex(np.trace(prod)) == pytest.approx(0)
        assert nk.hs_inner(PAULI_Z, PAULI_X @ PAULI_Z) == pytest.approx(0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            nk.hs_inner(np.eye(2), np.eye(3))

    def test_sesquilinear(self):
        rng = np.random.default_rng(29)
        for _ in range(20):
            a, b, c = (random_matrix(rng, 3) for _ in range(3))
            alpha, beta = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
            lhs = nk.hs_inner(a, alpha * b + beta * c)
            assert lhs == pytest.approx(alpha * nk.hs_inner(a, b) + beta * nk.hs_inner(a, c))
            lhs2 = nk.hs_inner(alpha * a, b)
            assert lhs2 == pytest.approx(np.conj(alpha) * nk.hs_inner(a, b))
            assert nk.hs_inner(a, b) == pytest.approx(np.conj(nk.hs_inner(b, a)))


class TestTraceDistance:
    def test_identical(self):
        rng = np.random.default_rng(31)
        rho = random_density(rng, 4)
        assert nk.trace_distance(rho, rho) == pytest.approx(0)

    def test_orthogonal_pure(self):
        p0 = np.diag([1.0, 0.0])
        p1 = np.diag([0.0, 1.0])
        assert nk.trace_distance(p0, p1) == pytest.approx(1.0)

    def test_mixed_vs_pure(self):
        # oracle: eigenvalues of I/2 - |0><0| are -1/2, +1/2
        diff = np.eye(2) / 2 - np.diag([1.0, 0.0])
        assert sorted(np.linalg.eigvalsh(diff)) == pytest.approx([-0.5, 0.5])
        assert nk.trace_distance(np.eye(2) / 2, np.diag([1.0, 0.0])) == pytest.approx(0.5)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            nk.trace_distance(np.eye(2), np.eye(3))


class TestPredicates:
    def test_hermitian_unitary_psd(self):
        assert nk.is_hermitian(PAULI_Y)
        assert nk.is_unitary(PAULI_Y)
        assert not nk.is_psd(PAULI_Z)
        assert nk.is_psd(np.diag([0.0, 1.0]))
        assert nk.is_projector(np.diag([1.0, 0.0]))
        assert not nk.is_projector(np.diag([2.0, 0.0]))

    def test_tolerance_respected(self):
        almost = np.eye(2) + 1e-12
        assert nk.is_unitary(almost, 1e-9)
        assert not nk.is_unitary(np.eye(2) * 1.01, 1e-9)


class TestPermuteFactors:
    def test_swap_two(self):
        rng = np.random.default_rng(37)
        a, b = random_matrix(rng, 2), random_matrix(rng, 3)
        swapped = nk.permute_factors(nk.tensor(a, b), [2, 3], [1, 0])
        assert np.allclose(swapped, nk.tensor(b, a))

    def test_four_factor_reorder(self):
        rng = np.random.default_rng(41)
        ms = [random_matrix(rng, d) for d in (2, 3, 2, 2)]
        full = nk.tensor_all(*ms)
        perm = [0, 2, 1, 3]
        out = nk.permute_factors(full, [2, 3, 2, 2], perm)
        assert np.allclose(out, nk.tensor_all(*(ms[p] for p in perm)))
