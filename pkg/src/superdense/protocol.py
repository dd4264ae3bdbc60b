"""Superdense coding protocols: errorless verification and distinguishability.

A protocol is a shared density matrix on A' (x) A'' (x) B together with d^2
encoding unitaries on A' (x) A''; A'' is the d-dimensional system that gets
sent.  Factor order everywhere is (A', A'', B), left factor slow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkit as nk


@dataclass(frozen=True)
class Protocol:
    dim_a_prime: int
    dim_a_dbl: int  # the message dimension d
    dim_b: int
    tau: np.ndarray
    encoders: tuple[np.ndarray, ...]

    @property
    def dim_a(self) -> int:
        return self.dim_a_prime * self.dim_a_dbl

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.dim_a_prime, self.dim_a_dbl, self.dim_b)

    def validate(self, tol: float = nk.DEFAULT_TOL) -> None:
        n = self.dim_a * self.dim_b
        if self.tau.shape != (n, n):
            raise ValueError(f"tau has shape {self.tau.shape}, expected {(n, n)}")
        if not nk.is_density(self.tau, tol):
            raise ValueError("tau is not a density matrix within tolerance")
        if len(self.encoders) != self.dim_a_dbl**2:
            raise ValueError(
                f"need {self.dim_a_dbl ** 2} encoders, got {len(self.encoders)}"
            )
        for idx, u in enumerate(self.encoders):
            if u.shape != (self.dim_a, self.dim_a):
                raise ValueError(f"encoder {idx} has shape {u.shape}")
            if not nk.is_unitary(u, tol):
                raise ValueError(f"encoder {idx} is not unitary within tolerance")


@dataclass(frozen=True)
class StateEnsemble:
    """States with probabilities; a state is a density matrix or a pure ket."""

    probs: tuple[float, ...]
    states: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.probs) != len(self.states):
            raise ValueError("probability/state count mismatch")

    def __len__(self) -> int:
        return len(self.states)

    def density(self, k: int) -> np.ndarray:
        s = self.states[k]
        return np.outer(s, s.conj()) if s.ndim == 1 else s

    def is_uniform(self, tol: float = 1e-12) -> bool:
        return all(abs(p - 1.0 / len(self)) <= tol for p in self.probs)

    def kets(self, tol: float = nk.DEFAULT_TOL) -> list[np.ndarray]:
        """Pure-state vectors; raises if some member is mixed beyond tol."""
        out = []
        for s in self.states:
            if s.ndim == 1:
                out.append(s)
                continue
            w, v = np.linalg.eigh(s)
            if w[:-1].max(initial=0.0) > tol or abs(w[-1] - 1.0) > max(tol, 1e-8):
                raise ValueError("ensemble member is not a pure unit state")
            out.append(v[:, -1])
        return out

    def validate(self, tol: float = nk.DEFAULT_TOL) -> None:
        if any(p < -tol for p in self.probs):
            raise ValueError("negative probability")
        if abs(sum(self.probs) - 1.0) > tol:
            raise ValueError("probabilities do not sum to 1")
        for k in range(len(self)):
            if not nk.is_density(self.density(k), max(tol, 1e-8)):
                raise ValueError(f"state {k} is not a density matrix")


@dataclass(frozen=True)
class ErrorlessReport:
    passed: bool
    max_state_overlap: float
    worst_pair: tuple[int, int]
    max_operator_violation: float
    tol: float


def bennett_wiesner() -> Protocol:
    """The qubit protocol: EPR pair, encoders (1, Z, X, Y)."""
    epr = nk.max_entangled(2)
    return Protocol(
        dim_a_prime=1,
        dim_a_dbl=2,
        dim_b=2,
        tau=np.outer(epr, epr.conj()),
        encoders=tuple(np.array(s) for s in nk.PAULIS),
    )


def canonical_protocol(basis) -> Protocol:
    """Maximally entangled state with a given orthogonal unitary basis as encoders."""
    from .bases import verify_orthogonal_unitary_basis

    if not verify_orthogonal_unitary_basis(basis, 1e-8).passed:
        raise ValueError("canonical_protocol requires a valid orthogonal unitary basis")
    d = basis.d
    ket = nk.max_entangled(d)
    return Protocol(
        dim_a_prime=1,
        dim_a_dbl=d,
        dim_b=d,
        tau=np.outer(ket, ket.conj()),
        encoders=tuple(np.array(e) for e in basis.elements),
    )


def _state_factor(tau: np.ndarray, cut: float = 1e-13) -> np.ndarray:
    """C with tau = C C^H, columns scaled eigenvectors (rank columns)."""
    w, v = np.linalg.eigh((tau + tau.conj().T) / 2)
    keep = w > cut * max(w.max(initial=0.0), 1.0)
    return v[:, keep] * np.sqrt(w[keep])


def _encoded_factors(p: Protocol) -> np.ndarray:
    """Array of shape (n, dim_a, dim_b, rank): (U_i (x) 1) applied to a factor of tau."""
    c = _state_factor(p.tau)
    rank = c.shape[1]
    c3 = c.reshape(p.dim_a, p.dim_b, rank)
    stack = np.stack(p.encoders)  # (n, dim_a, dim_a)
    return np.einsum("iax,xbr->iabr", stack, c3)


def encoded_states(p: Protocol) -> StateEnsemble:
    """Uniform ensemble of the d^2 reduced encoded states on A'' (x) B."""
    e = _encoded_factors(p)
    n = len(p.encoders)
    a1, d, b = p.dims
    u = d * b
    e = e.reshape(n, a1, d, b, -1).reshape(n, a1, u, -1)
    states = []
    for i in range(n):
        rho = np.einsum("aur,avr->uv", e[i], e[i].conj())
        states.append(rho)
    return StateEnsemble(probs=(1.0 / n,) * n, states=tuple(states))


def verify_errorless(p: Protocol, tol: float = nk.DEFAULT_TOL) -> ErrorlessReport:
    """Check the two orthogonality conditions of a zero-error protocol.

    (a) pairwise Tr(rho_i rho_j) <= tol for the encoded ensemble; orthogonal
        supports are necessary and are sufficient for a perfectly
        distinguishing projective measurement to exist.
    (b) the operator condition Tr_{A''}(U_i tau^A U_j^*) = 0, as a cross
        check.
    """
    a1, d, b = p.dims
    n = len(p.encoders)
    e = _encoded_factors(p).reshape(n, a1, d * b, -1)
    # overlap(i,j) = sum_{alpha,beta} ||F_{j,beta}^H F_{i,alpha}||_F^2
    t = np.einsum("iaur,jbus->iajbrs", e, e.conj())
    overlaps = np.einsum("iajbrs,iajbrs->ij", t, t.conj()).real
    off = overlaps - np.diag(np.diag(overlaps))
    worst = int(np.argmax(off))
    worst_pair = (worst // n, worst % n)
    max_overlap = float(off.max(initial=0.0))

    tau_a = nk.partial_trace(p.tau, [p.dim_a, b], [0])
    s = _state_factor(tau_a)
    z = np.einsum("iax,xr->iar", np.stack(p.encoders), s).reshape(n, a1, d, -1)
    cross = np.einsum("iaur,jbur->ijab", z, z.conj())
    op_norms = np.sqrt(np.einsum("ijab,ijab->ij", cross, cross.conj()).real)
    np.fill_diagonal(op_norms, 0.0)
    max_op = float(op_norms.max(initial=0.0))

    return ErrorlessReport(
        passed=(max_overlap <= tol and max_op <= tol),
        max_state_overlap=max_overlap,
        worst_pair=worst_pair,
        max_operator_violation=max_op,
        tol=tol,
    )


def hc_quantity(e: StateEnsemble) -> float:
    """Holevo-Curlander scalar Tr sqrt(sum_i p_i^2 rho_i^2)."""
    try:
        kets = e.kets()
    except ValueError:
        kets = None
    if kets is not None:
        psi = np.column_stack(kets)
        dp = np.asarray(e.probs)
        g = (psi.conj().T @ psi) * np.outer(dp, dp)
        w = np.linalg.eigvalsh((g + g.conj().T) / 2)
        return float(np.sqrt(np.clip(w, 0.0, None)).sum())
    acc = None
    for k, p in enumerate(e.probs):
        rho = e.density(k)
        term = (p * p) * (rho @ rho)
        acc = term if acc is None else acc + term
    return float(np.trace(nk.psd_sqrt(acc)).real)


def pgm_success(e: StateEnsemble, tol: float = nk.DEFAULT_TOL) -> float:
    """Success probability of the square-root measurement.

    Defined for uniform ensembles of pure states; computed from the Gram
    matrix G of the state vectors as (1/m) sum_i ((sqrt G)_{ii})^2.  The PGM
    is an actual measurement, so this is always a lower bound on the
    ensemble's distinguishability.
    """
    if not e.is_uniform(max(tol, 1e-10)):
        raise ValueError("pgm_success requires a uniform ensemble")
    kets = e.kets(tol)
    psi = np.column_stack(kets)
    g = psi.conj().T @ psi
    root = nk.psd_sqrt(g, max(tol, 1e-8))
    return float(np.sum(np.abs(np.diag(root)) ** 2) / len(e))


def distinguishability_bounds(e: StateEnsemble, tol: float = nk.DEFAULT_TOL):
    """Computable sandwich around the ensemble's distinguishability.

    Returns (lower, upper) = (max(pgm, 2 hc - 1), hc).  The exact value is a
    semidefinite program and is deliberately not computed; the PGM is an
    achievable measurement and the Holevo-Curlander scalar bounds from both
    sides.
    """
    hc = hc_quantity(e)
    lower = 2.0 * hc - 1.0
    if e.is_uniform(max(tol, 1e-10)):
        try:
            lower = max(lower, pgm_success(e, tol))
        except ValueError:
            pass  # mixed members: the PGM lower bound is not computed
    return lower, hc


def apply_local_equivalence(p: Protocol, v, c, w) -> Protocol:
    """Transport a protocol along a local equivalence.

    v acts on A' (x) A'', each c[i] on A', and w on B.  The state becomes
    (v (x) w) tau (v (x) w)^*, the encoders (c[i] (x) 1) U_i v^*.  The
    Bob-side unitary w goes beyond the Alice-only definition but trivially
    preserves decodability.
    """
    a1, d, b = p.dims
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if v.shape != (p.dim_a, p.dim_a):
        raise ValueError(f"v must act on A, shape {(p.dim_a,) * 2}")
    if w.shape != (b, b):
        raise ValueError(f"w must act on B, shape {(b, b)}")
    if len(c) != len(p.encoders):
        raise ValueError("need one A'-side correction per encoder")
    vw = np.kron(v, w)
    tau = vw @ p.tau @ vw.conj().T
    eye_d = np.eye(d)
    encoders = []
    for ci, u in zip(c, p.encoders):
        ci = np.asarray(ci, dtype=complex)
        if ci.shape != (a1, a1):
            raise ValueError(f"corrections must act on A', shape {(a1, a1)}")
        encoders.append(np.kron(ci, eye_d) @ u @ v.conj().T)
    return Protocol(a1, d, b, tau, tuple(encoders))


def _haar(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _split_sizes(total: int, parts: int) -> list[int]:
    base, rem = divmod(total, parts)
    return [base + (1 if i < rem else 0) for i in range(parts)]


def random_scrambled_bw(
    rng: np.random.Generator,
    dim_a_prime: int = 1,
    dim_b_prime: int = 1,
    blocks: int = 1,
    trivial: bool = False,
):
    """Sample an errorless qubit protocol with a planted canonical form.

    Builds tau = (V (x) W)^* (rho (x) EPR) (V (x) W) and encoders
    U_i = (C_i (x) 1)(sum_r P_r (x) S_r sigma_i S_r^*) V, then returns the
    protocol together with the planted decomposition.

    rho is sampled block-classically: Alice-block r is paired with its own
    band of B', so Bob's side of the ancilla reveals r.  That correlation is
    what makes the planted protocol errorless, and it forces
    blocks <= min(dim A', dim B').  With ``trivial`` all random draws are
    identities and the result is exactly the Bennett-Wiesner protocol.
    """
    from .rigidity import CanonicalDecomposition

    a1, b1 = int(dim_a_prime), int(dim_b_prime)
    if a1 < 1 or b1 < 1 or blocks < 1:
        raise ValueError("dimensions and block count must be positive")
    if blocks > a1 or blocks > b1:
        raise ValueError("blocks must not exceed dim A' or dim B'")

    a_sizes = _split_sizes(a1, blocks)
    b_sizes = _split_sizes(b1, blocks)
    q_basis = np.eye(a1, dtype=complex) if trivial else _haar(a1, rng)
    weights = np.full(blocks, 1.0 / blocks) if trivial else rng.dirichlet(np.ones(blocks))

    p_projs, s_rots = [], []
    rho = np.zeros((a1 * b1, a1 * b1), dtype=complex)
    a_off = b_off = 0
    for r in range(blocks):
        qa = q_basis[:, a_off : a_off + a_sizes[r]]
        eb = np.eye(b1, dtype=complex)[:, b_off : b_off + b_sizes[r]]
        p_projs.append(qa @ qa.conj().T)
        s_rots.append(np.eye(2, dtype=complex) if trivial else _haar(2, rng))
        m = a_sizes[r] * b_sizes[r]
        if trivial:
            small = np.eye(m, dtype=complex) / m
        else:
            g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            small = g @ g.conj().T
            small /= np.trace(small).real
        embed = np.kron(qa, eb)
        rho += weights[r] * (embed @ small @ embed.conj().T)
        a_off += a_sizes[r]
        b_off += b_sizes[r]

    cs = [np.eye(a1, dtype=complex) if trivial else _haar(a1, rng) for _ in range(4)]
    v = np.eye(2 * a1, dtype=complex) if trivial else _haar(2 * a1, rng)
    w = np.eye(2 * b1, dtype=complex) if trivial else _haar(2 * b1, rng)

    epr = nk.max_entangled(2)
    product = nk.tensor(rho, np.outer(epr, epr.conj()))
    # reorder (A', B', A'', B'') -> (A', A'', B', B'')
    sigma0 = nk.permute_factors(product, [a1, b1, 2, 2], [0, 2, 1, 3])
    vw = np.kron(v, w)
    tau = vw.conj().T @ sigma0 @ vw

    encoders = []
    for i, sig in enumerate(nk.PAULIS):
        block_sum = np.zeros((2 * a1, 2 * a1), dtype=complex)
        for p_r, s_r in zip(p_projs, s_rots):
            block_sum += np.kron(p_r, s_r @ sig @ s_r.conj().T)
        encoders.append(np.kron(cs[i], np.eye(2)) @ block_sum @ v)

    proto = Protocol(
        dim_a_prime=a1, dim_a_dbl=2, dim_b=2 * b1, tau=tau, encoders=tuple(encoders)
    )
    planted = CanonicalDecomposition(
        v=v,
        w=w,
        c=tuple(cs),
        rho=rho,
        blocks=tuple((p_r, s_r, 1) for p_r, s_r in zip(p_projs, s_rots)),
    )
    return proto, planted
