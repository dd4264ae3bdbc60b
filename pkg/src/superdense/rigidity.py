"""Constructive canonicalization of errorless qubit superdense coding protocols.

The pipeline normalizes a protocol in four stages: gauge away the first
encoder and extract the EPR pair (`to_nice_form`), split each remaining
encoder into projector-controlled 2x2 Hermitian unitaries
(`block_diagonalize`), match the blocks across encoders by peeling common
eigenvectors of overlap triangles (`match_blocks`), and rotate each matched
triple onto (Z, X, Y) (`pauli_frame`).  `canonicalize` composes the stages
and tracks every Alice-side correction into the final decomposition, which
`verify_decomposition` checks against the original protocol.

All stage tolerances derive from a single knob (default 1e-8).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import numkit as nk
from .numkit import ID2, PAULI_X, PAULI_Y, PAULI_Z
from .protocol import Protocol, verify_errorless

DEFAULT_STAGE_TOL = 1e-8


class NiceFormError(ValueError):
    """A structural requirement of the normal form failed beyond tolerance."""

    def __init__(self, item: str, detail: str):
        super().__init__(f"nice-form requirement '{item}' violated: {detail}")
        self.item = item


@dataclass(frozen=True)
class NiceFormData:
    protocol: Protocol  # state on A' (x) A'' (x) B' (x) B'', first encoder = 1
    v: np.ndarray  # unitary on A' (x) A''
    w: np.ndarray  # isometry B -> B' (x) B'', shape (2*dim_b_prime, dim_b)
    c: tuple[np.ndarray, ...]  # 4 unitaries on A'
    rho: np.ndarray  # density on A' (x) B'
    pi_groups: nk.SpectralDecomposition  # spectrum of rho^{A'}
    dim_b_prime: int


@dataclass(frozen=True)
class BlockForm:
    """Per-encoder block data for encoders 2..4 (indices 1..3 of the protocol).

    ``blocks[i]`` lists (Q, R) pairs: Q a projector on A', R a traceless
    Hermitian unitary on the qubit.  The Q's of one encoder are orthogonal
    and sum to the support projector.  ``corrections[i]`` is the Alice-side
    unitary already applied to reach this form.
    """

    blocks: tuple[tuple[tuple[np.ndarray, np.ndarray], ...], ...]
    corrections: tuple[np.ndarray, ...]
    support: np.ndarray
    dim_a_prime: int


@dataclass(frozen=True)
class MatchedBlocks:
    """Rank-one refinement with aligned 2x2 triples (encoders 2, 3, 4)."""

    k_projectors: tuple[np.ndarray, ...]
    triples: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]
    residual: np.ndarray  # projector on the complement of supp(rho^{A'})
    sign_corrections: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class CanonicalDecomposition:
    v: np.ndarray
    w: np.ndarray
    c: tuple[np.ndarray, ...]
    rho: np.ndarray
    blocks: tuple[tuple[np.ndarray, np.ndarray, int], ...]  # (P_r, S_r, sign_r)


@dataclass(frozen=True)
class DecompositionReport:
    passed: bool
    state_residual: float
    encoder_residuals: tuple[float, ...]
    tol: float


def _projector_basis(p: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the range of a projector."""
    w, v = np.linalg.eigh((p + p.conj().T) / 2)
    return v[:, w > 0.5]


def _principal_unitary_sqrt(u: np.ndarray) -> np.ndarray:
    """Square root of a unitary with eigenphases halved within (-pi, pi]."""
    t, z = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diag(t))
    return (z * np.exp(0.5j * phases)) @ z.conj().T


def _positive_groups(dec: nk.SpectralDecomposition, tol: float):
    lam_max = max(lam for lam, _ in dec.groups)
    return [(lam, p) for lam, p in dec.groups if lam > tol * max(lam_max, 1.0)]


def to_nice_form(p: Protocol, tol: float = DEFAULT_STAGE_TOL) -> NiceFormData:
    """Normalize an errorless qubit protocol per the four nice-form items.

    Constructive steps: V := U_1 and C_1 := 1; purify the state into a
    reference system of dimension rank(tau); verify the Bob-traced encoded
    state factors as rho^{RA'} (x) 1/2; read off orthonormal Bob-side
    vectors in an eigenbasis of rho^{RA'} and map them to a standard-form
    purification (the explicit Uhlmann step), which yields the isometry W;
    finally align the per-encoder eigenspaces of the Alice marginal with
    basis-matching unitaries C_i.
    """
    if p.dim_a_dbl != 2:
        raise ValueError("nice form is implemented for qubit messages (d = 2)")
    report = verify_errorless(p, tol)
    if not report.passed:
        raise NiceFormError(
            "errorless",
            f"state overlap {report.max_state_overlap:.3e}, "
            f"operator violation {report.max_operator_violation:.3e} exceed {tol:.1e}",
        )
    a1, _, b = p.dims
    dim_a = p.dim_a

    v = p.encoders[0]
    enc_v = [u @ v.conj().T for u in p.encoders]
    vb = np.kron(v, np.eye(b))
    tau_v = vb @ p.tau @ vb.conj().T

    # purification into a reference system of dimension rank(tau)
    w_eig, vecs = np.linalg.eigh((tau_v + tau_v.conj().T) / 2)
    keep = w_eig > tol * max(w_eig.max(initial=0.0), 1.0)
    mu, tvecs = w_eig[keep], vecs[:, keep]
    r0 = int(mu.size)
    pur = (np.sqrt(mu)[:, None] * tvecs.T).reshape(-1)  # order (R, A', A'', B)

    # Tr_B of the first encoded pure state must factor as rho^{RA'} (x) 1/2
    t_mat = pur.reshape(r0 * a1 * 2, b)
    theta = t_mat @ t_mat.conj().T
    rho_ra = nk.partial_trace(theta, [r0 * a1, 2], [0])
    factor_resid = np.linalg.norm(theta - np.kron(rho_ra, ID2 / 2))
    if factor_resid > tol * 10:
        raise NiceFormError("item2", f"Tr_B does not factor: residual {factor_resid:.3e}")

    # Schmidt-vector matching: Bob vectors in the eigenbasis of rho^{RA'}
    nu_all, f_all = np.linalg.eigh((rho_ra + rho_ra.conj().T) / 2)
    order = np.argsort(nu_all)[::-1]
    nu_all, f_all = nu_all[order], f_all[:, order]
    pos = nu_all > tol * max(nu_all.max(initial=0.0), 1.0)
    nu, f = nu_all[pos], f_all[:, pos]
    r1 = int(nu.size)
    dim_b_prime = max(r1, math.ceil(b / 2))

    tp = pur.reshape(r0 * a1, 2, b)
    g = np.einsum("km,kxb->mxb", f.conj(), tp)
    h = g / np.sqrt(nu / 2)[:, None, None]
    h_flat = h.reshape(2 * r1, b)
    gram_resid = np.linalg.norm(h_flat @ h_flat.conj().T - np.eye(2 * r1))
    if gram_resid > tol * 10:
        raise NiceFormError("item2", f"Bob vectors not orthonormal: residual {gram_resid:.3e}")

    w_iso = np.zeros((2 * dim_b_prime, b), dtype=complex)
    w_iso[: 2 * r1] = h_flat.conj()
    extra = nk._complement_basis(h_flat.T, b)  # complement of span(h) in C^b
    for j in range(extra.shape[1]):
        w_iso[2 * r1 + j] = extra[:, j].conj()

    # standard-form purification of rho^{RA'}: B' indexes its eigenvectors
    rho_pur = (f * np.sqrt(nu)).reshape(r0, a1, r1)
    pad = np.zeros((r0, a1, dim_b_prime), dtype=complex)
    pad[:, :, :r1] = rho_pur
    rho_vec = pad.reshape(r0, a1 * dim_b_prime)
    rho = np.einsum("ka,kb->ab", rho_vec, rho_vec.conj())

    big_w = np.kron(np.eye(dim_a), w_iso)
    tau2 = big_w @ tau_v @ big_w.conj().T

    epr = nk.max_entangled(2)
    target = nk.permute_factors(
        nk.tensor(rho, np.outer(epr, epr.conj())),
        [a1, dim_b_prime, 2, 2],
        [0, 2, 1, 3],
    )
    item2_resid = nk.trace_distance(tau2, target)
    if item2_resid > tol * 10:
        raise NiceFormError("item2", f"extracted product form off by {item2_resid:.3e}")

    # Alice marginal and eigenspace alignment (items 3 and 4)
    tau_a = nk.partial_trace(tau_v, [dim_a, b], [0])
    zeta = nk.partial_trace(tau_a, [a1, 2], [0])
    group_tol = math.sqrt(tol)
    pi_groups = nk.spectral_decomposition(zeta, group_tol=group_tol, tol=1e-6)
    positive = _positive_groups(pi_groups, tol)

    cs, enc_nice = [], []
    for i, u in enumerate(enc_v):
        if i == 0:
            cs.append(np.eye(a1, dtype=complex))
            enc_nice.append(u)
            continue
        m_i = u @ tau_a @ u.conj().T
        zeta_i = nk.partial_trace(m_i, [a1, 2], [0])
        half_resid = np.linalg.norm(m_i - np.kron(zeta_i, ID2 / 2))
        if half_resid > tol * 10:
            raise NiceFormError(
                "item3", f"encoder {i}: marginal does not factor, residual {half_resid:.3e}"
            )
        dec_i = nk.spectral_decomposition(zeta_i, group_tol=group_tol, tol=1e-6)
        pos_i = _positive_groups(dec_i, tol)
        if len(pos_i) != len(positive):
            raise NiceFormError("item3", f"encoder {i}: eigenspace count mismatch")
        c_i = np.zeros((a1, a1), dtype=complex)
        covered = np.zeros((a1, a1), dtype=complex)
        covered_i = np.zeros((a1, a1), dtype=complex)
        for (lam, proj), (lam_i, proj_i) in zip(positive, pos_i):
            basis, basis_i = _projector_basis(proj), _projector_basis(proj_i)
            if basis.shape[1] != basis_i.shape[1] or abs(lam - lam_i) > group_tol * 10:
                raise NiceFormError(
                    "item3",
                    f"encoder {i}: eigenvalue {lam_i:.6g} does not match {lam:.6g}",
                )
            c_i += basis @ basis_i.conj().T
            covered += proj
            covered_i += proj_i
        comp = nk._complement_basis(_projector_basis(covered), a1)
        comp_i = nk._complement_basis(_projector_basis(covered_i), a1)
        c_i += comp @ comp_i.conj().T
        cs.append(c_i)
        enc_nice.append(np.kron(c_i, ID2) @ u)

    for i in range(4):
        for j in range(4):
            if i == j:
                continue
            prod = enc_nice[i] @ enc_nice[j].conj().T
            for lam, proj in positive:
                pk = np.kron(proj, ID2)
                delta = nk.partial_trace(pk @ prod @ pk, [a1, 2], [0])
                if np.linalg.norm(delta) > tol * 10:
                    raise NiceFormError(
                        "item4",
                        f"encoders ({i},{j}) eigenspace {lam:.4g}: "
                        f"residual {np.linalg.norm(delta):.3e}",
                    )

    nice_protocol = Protocol(
        dim_a_prime=a1,
        dim_a_dbl=2,
        dim_b=2 * dim_b_prime,
        tau=tau2,
        encoders=tuple(enc_nice),
    )
    return NiceFormData(
        protocol=nice_protocol,
        v=v,
        w=w_iso,
        c=tuple(cs),
        rho=rho,
        pi_groups=pi_groups,
        dim_b_prime=dim_b_prime,
    )


def _restricted_block_split(encoder: np.ndarray, basis: np.ndarray, tol: float):
    """Restrict an encoder to one eigenspace and return its qubit blocks F,G,H."""
    m = basis.shape[1]
    basis2 = np.kron(basis, ID2)
    mat = basis2.conj().T @ encoder @ basis2
    unit_resid = np.linalg.norm(mat @ mat.conj().T - np.eye(2 * m))
    if unit_resid > tol * 100:
        raise NiceFormError(
            "block-restriction", f"encoder block is not unitary: residual {unit_resid:.3e}"
        )
    f = mat[0::2, 0::2]
    g = mat[0::2, 1::2]
    h = mat[1::2, 0::2]
    f2 = mat[1::2, 1::2]
    if np.linalg.norm(f + f2) > tol * 100:
        raise NiceFormError(
            "block-traceless", f"diagonal blocks not opposite: {np.linalg.norm(f + f2):.3e}"
        )
    return mat, f, g, h


def block_diagonalize(n: NiceFormData, tol: float = DEFAULT_STAGE_TOL) -> BlockForm:
    """Write each encoder (2..4) as sum_l Q_l (x) R_l on the support of the marginal.

    Within each eigenspace of the Alice marginal the encoder has the block
    layout [F G; H -F]; polar decompositions of F, G, H produce commuting
    data (K, W_G, W_H), a unitary E = Gamma + E0 with E0 a principal square
    root on ker(K) makes the block Hermitian, and joint diagonalization of K
    with the restricted unitaries extracts the projectors and the traceless
    Hermitian unitary 2x2 factors.
    """
    a1 = n.protocol.dim_a_prime
    positive = _positive_groups(n.pi_groups, tol)
    group_tol = math.sqrt(tol)
    support = np.zeros((a1, a1), dtype=complex)
    for _, proj in positive:
        support += proj

    all_blocks, corrections = [], []
    for i in (1, 2, 3):
        encoder = n.protocol.encoders[i]
        blocks_i: list[tuple[np.ndarray, np.ndarray]] = []
        s_i = np.eye(a1, dtype=complex) - support
        for _, proj in positive:
            basis = _projector_basis(proj)
            m = basis.shape[1]
            mat, f, g, h = _restricted_block_split(encoder, basis, tol)
            d_f, t_f = nk.polar_decomposition(f)
            _, t_g = nk.polar_decomposition(g)
            _, t_h = nk.polar_decomposition(h)
            k_op = t_f.conj().T @ d_f @ t_f
            w_g = t_f.conj().T @ t_g
            w_h = t_h.conj().T @ t_f

            kw, kv = np.linalg.eigh((k_op + k_op.conj().T) / 2)
            in_supp = kw > tol
            gamma = (kv[:, in_supp]) @ (kv[:, in_supp]).conj().T
            e_op = gamma.copy()
            if (~in_supp).any():
                null = kv[:, ~in_supp]
                y = null.conj().T @ (w_h @ w_g.conj().T) @ null
                y_resid = np.linalg.norm(y @ y.conj().T - np.eye(y.shape[0]))
                if y_resid > tol * 100:
                    raise NiceFormError(
                        "block-kernel", f"kernel rotation not unitary: {y_resid:.3e}"
                    )
                e_op = e_op + null @ _principal_unitary_sqrt(y) @ null.conj().T

            s_ik = e_op @ t_f.conj().T
            herm = np.kron(s_ik, ID2) @ mat
            herm_resid = np.linalg.norm(herm - herm.conj().T)
            if herm_resid > tol * 100:
                raise NiceFormError(
                    "block-hermitian", f"hermitianization residual {herm_resid:.3e}"
                )
            herm = (herm + herm.conj().T) / 2
            k_mat = herm[0::2, 0::2]
            l_mat = herm[0::2, 1::2]

            ew_g = e_op @ w_g
            k_dec = nk.spectral_decomposition(k_mat, group_tol=group_tol, tol=1e-6)
            for _, p_r in k_dec.groups:
                c_r = _projector_basis(p_r)
                x_r = c_r.conj().T @ ew_g @ c_r
                x_resid = np.linalg.norm(x_r @ x_r.conj().T - np.eye(x_r.shape[0]))
                if x_resid > tol * 100:
                    raise NiceFormError(
                        "block-phases", f"restricted rotation not unitary: {x_resid:.3e}"
                    )
                t_s, z_s = scipy.linalg.schur(x_r, output="complex")
                betas = np.diag(t_s)
                used = np.zeros(len(betas), dtype=bool)
                for s in range(len(betas)):
                    if used[s]:
                        continue
                    cluster = (np.abs(betas - betas[s]) <= group_tol) & ~used
                    used |= cluster
                    zc = c_r @ z_s[:, cluster]
                    rank = zc.shape[1]
                    # read the block's diagonal/off-diagonal values from the
                    # Hermitian form itself; sqrt(1 - alpha^2) would blow up
                    # roundoff near alpha = 1
                    alpha = float(np.einsum("sm,mt,ts->", zc.conj().T, k_mat, zc).real) / rank
                    lam = complex(np.einsum("sm,mt,ts->", zc.conj().T, l_mat, zc)) / rank
                    nrm = math.hypot(alpha, abs(lam))
                    if abs(nrm - 1.0) > tol * 100:
                        raise NiceFormError(
                            "block-phases", f"block column norm {nrm:.12f} is not 1"
                        )
                    alpha, lam = alpha / nrm, lam / nrm
                    q = basis @ (zc @ zc.conj().T) @ basis.conj().T
                    r_2x2 = np.array(
                        [[alpha, lam], [np.conj(lam), -alpha]], dtype=complex
                    )
                    blocks_i.append((q, r_2x2))
            s_i = s_i + basis @ s_ik @ basis.conj().T
        all_blocks.append(tuple(blocks_i))
        corrections.append(s_i)
    return BlockForm(
        blocks=tuple(all_blocks),
        corrections=tuple(corrections),
        support=support,
        dim_a_prime=a1,
    )


def common_eigenvector(c, d, e, tol: float = DEFAULT_STAGE_TOL) -> np.ndarray:
    """Shared unit eigenvector of three projectors whose triple product has norm 1.

    Takes the leading right singular vector of c @ d @ e; the spectral-norm
    precondition guarantees it is fixed by all three projectors.
    """
    prod = np.asarray(c) @ np.asarray(d) @ np.asarray(e)
    _, s, vh = np.linalg.svd(prod)
    if s[0] < 1.0 - tol:
        raise ValueError(f"triple product norm {s[0]:.12f} below 1 - {tol:.1e}")
    return vh[0].conj()


def _reproject(q: np.ndarray, expected_rank: int, tol: float) -> np.ndarray:
    w, v = np.linalg.eigh((q + q.conj().T) / 2)
    keep = w > 0.5
    if int(keep.sum()) != expected_rank:
        raise RuntimeError(
            f"deflation changed rank to {int(keep.sum())}, expected {expected_rank}"
        )
    basis = v[:, keep]
    return basis @ basis.conj().T


def match_blocks(bf: BlockForm, tol: float = DEFAULT_STAGE_TOL) -> MatchedBlocks:
    """Align the three encoders' blocks into rank-one pieces with orthogonal triples.

    First merges blocks whose 2x2 factors agree up to sign (folding the
    signs into per-encoder corrections), then repeatedly finds a triangle in
    the overlap graph, peels off a common eigenvector, and deflates the
    three projectors until the support is exhausted.
    """
    a1 = bf.dim_a_prime
    merge_thr = tol * math.sqrt(2.0)
    coarse: list[list[list]] = []  # per encoder: [Q, R, rank]
    sign_ops = []
    for enc_blocks in bf.blocks:
        groups: list[list] = []
        sgn = np.eye(a1, dtype=complex) - bf.support
        for q, r in enc_blocks:
            rank = int(round(np.trace(q).real))
            placed = False
            for g in groups:
                for s in (1.0, -1.0):
                    if np.linalg.norm(r - s * g[1]) <= merge_thr:
                        g[0] = g[0] + q
                        g[2] += rank
                        sgn = sgn + s * q
                        placed = True
                        break
                if placed:
                    break
            if not placed:
                groups.append([q.copy(), r, rank])
                sgn = sgn + q
        coarse.append(groups)
        sign_ops.append(sgn)

    overlap_thr = math.sqrt(tol)
    k_projectors, triples = [], []
    lists = coarse
    while lists[0]:
        found = None
        for ga in lists[0]:
            for gb in lists[1]:
                if np.linalg.norm(ga[0] @ gb[0]) <= overlap_thr:
                    continue
                for gc in lists[2]:
                    if (
                        np.linalg.norm(gb[0] @ gc[0]) <= overlap_thr
                        or np.linalg.norm(ga[0] @ gc[0]) <= overlap_thr
                    ):
                        continue
                    try:
                        vec = common_eigenvector(ga[0], gb[0], gc[0], tol)
                    except ValueError:
                        continue
                    found = (ga, gb, gc, vec)
                    break
                if found:
                    break
            if found:
                break
        if found is None:
            raise RuntimeError(
                "no overlap triangle with a common eigenvector remains; "
                "tolerance misconfigured or input invalid"
            )
        ga, gb, gc, vec = found
        peel = np.outer(vec, vec.conj())
        k_projectors.append(peel)
        triples.append((ga[1], gb[1], gc[1]))
        for lst, g in zip(lists, (ga, gb, gc)):
            g[2] -= 1
            if g[2] == 0:
                lst[:] = [item for item in lst if item is not g]
            else:
                g[0] = _reproject(g[0] - peel, g[2], tol)
    if lists[1] or lists[2]:
        raise RuntimeError("encoders exhausted unevenly; input invalid")

    residual = np.eye(a1, dtype=complex) - bf.support
    return MatchedBlocks(
        k_projectors=tuple(k_projectors),
        triples=tuple(triples),
        residual=residual,
        sign_corrections=tuple(sign_ops),
    )


def pauli_frame(r2, r3, r4, tol: float = DEFAULT_STAGE_TOL):
    """Unitary S with r2 = S Z S*, r3 = S X S*, r4 = sign * S Y S*.

    Follows the three-step construction: diagonalize r2, rotate the phase of
    r3's off-diagonal, then read off the orientation of r4.  Unitary
    conjugation cannot flip the orientation of a triple, so the sign is
    genuine data and is returned explicitly.
    """
    mats = [np.asarray(m, dtype=complex) for m in (r2, r3, r4)]
    for m in mats:
        if m.shape != (2, 2):
            raise ValueError("pauli_frame expects 2x2 matrices")
        if abs(np.trace(m)) > tol * 10 or not nk.is_hermitian(m, tol * 10) or not nk.is_unitary(m, tol * 10):
            raise ValueError("inputs must be traceless Hermitian unitaries")
    for a in range(3):
        for b in range(a + 1, 3):
            if abs(nk.hs_inner(mats[a], mats[b])) > tol * 10:
                raise ValueError("inputs must be pairwise HS-orthogonal")
    r2, r3, r4 = mats

    w, vec = np.linalg.eigh(r2)  # ascending: -1 then +1
    # fix eigenvector phases (largest-magnitude entry real positive) for determinism
    for k in (0, 1):
        col = vec[:, k]
        pivot = col[np.argmax(np.abs(col))]
        vec[:, k] = col * (np.conj(pivot) / abs(pivot))
    s1 = np.stack([vec[:, 1].conj(), vec[:, 0].conj()])  # rows: <a|, <b|
    r3p = s1 @ r3 @ s1.conj().T
    theta = float(np.angle(r3p[0, 1]))
    s2 = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    s = s1.conj().T @ s2.conj().T

    orient = -1j * (r2 @ r3)  # equals S Y S* for a right-handed triple
    sign = 1 if np.linalg.norm(r4 - orient) <= np.linalg.norm(r4 + orient) else -1
    for target, ref in ((PAULI_Z, r2), (PAULI_X, r3), (sign * PAULI_Y, r4)):
        if np.linalg.norm(s @ target @ s.conj().T - ref) > tol * 100:
            raise ValueError("frame construction failed; inputs violate the precondition")
    return s, sign


def canonicalize(p: Protocol, tol: float = DEFAULT_STAGE_TOL) -> CanonicalDecomposition:
    """Full pipeline: nice form, block diagonalization, matching, Pauli frames.

    All Alice-side corrections (eigenspace alignment, Hermitianization,
    sign folding, and the orientation sign of the fourth encoder) are
    accumulated into the final C_i, so the decomposition satisfies
    (C_i^* (x) 1) U_i V^* =_tau' sum_r P_r (x) S_r sigma_i S_r^* with the
    vacuous block appended on the complement of the support.
    """
    nf = to_nice_form(p, tol)
    bf = block_diagonalize(nf, tol)
    mb = match_blocks(bf, tol)
    frames = [pauli_frame(*triple, tol) for triple in mb.triples]

    a1 = p.dim_a_prime
    orient = mb.residual.astype(complex).copy()
    for peel, (_, sign) in zip(mb.k_projectors, frames):
        orient += sign * peel

    cs = []
    for i in range(4):
        if i == 0:
            total = nf.c[0]
        else:
            total = mb.sign_corrections[i - 1] @ bf.corrections[i - 1] @ nf.c[i]
        if i == 3:
            total = orient @ total
        cs.append(total.conj().T)

    blocks = [
        (peel, frame[0], frame[1]) for peel, frame in zip(mb.k_projectors, frames)
    ]
    if np.trace(mb.residual).real > 0.5:
        blocks.append((mb.residual, np.eye(2, dtype=complex), 1))
    return CanonicalDecomposition(
        v=nf.v, w=nf.w, c=tuple(cs), rho=nf.rho, blocks=tuple(blocks)
    )


def verify_decomposition(
    p: Protocol, dec: CanonicalDecomposition, tol: float = DEFAULT_STAGE_TOL
) -> DecompositionReport:
    """Check a decomposition against a protocol in the =_tau' sense.

    (a) (V (x) W) tau (V (x) W)^* must be rho (x) EPR;
    (b) for each i the operators (C_i^* (x) 1) U_i V^* and
        sum_r P_r (x) S_r sigma_i S_r^* must act identically on tau'.
    """
    a1, d, b = p.dims
    if d != 2:
        raise ValueError("decompositions are defined for qubit messages")
    dim_bp = dec.rho.shape[0] // a1
    vw = np.kron(dec.v, dec.w)
    tau_p = vw @ p.tau @ vw.conj().T

    epr = nk.max_entangled(2)
    target = nk.permute_factors(
        nk.tensor(dec.rho, np.outer(epr, epr.conj())),
        [a1, dim_bp, 2, 2],
        [0, 2, 1, 3],
    )
    state_resid = nk.trace_distance(tau_p, target)

    eye_b = np.eye(2 * dim_bp)
    enc_resids = []
    for i, (u, c_i) in enumerate(zip(p.encoders, dec.c)):
        left = np.kron(c_i.conj().T, ID2) @ u @ dec.v.conj().T
        right = np.zeros((2 * a1, 2 * a1), dtype=complex)
        for p_r, s_r, _sign in dec.blocks:
            right += np.kron(p_r, s_r @ nk.PAULIS[i] @ s_r.conj().T)
        lhs = np.kron(left, eye_b)
        rhs = np.kron(right, eye_b)
        enc_resids.append(
            nk.trace_distance(lhs @ tau_p @ lhs.conj().T, rhs @ tau_p @ rhs.conj().T)
        )

    passed = state_resid <= tol and all(r <= tol for r in enc_resids)
    return DecompositionReport(
        passed=passed,
        state_residual=float(state_resid),
        encoder_residuals=tuple(float(r) for r in enc_resids),
        tol=tol,
    )
