"""Haar-random encoder experiments.

Monte-Carlo machinery for protocols whose d^2 encoders are independent
Haar-random unitaries: spectra of the ensemble-average matrix Q, comparison
with the Marchenko-Pastur law, the closed-form second-moment operator of a
random maximally entangled state, pseudo-isotropy variance checks, and the
distinguishability statistics whose large-d mean approaches 8/(3*pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import numkit as nk
from .protocol import StateEnsemble, pgm_success

EIGHT_OVER_3PI = 8.0 / (3.0 * math.pi)


@dataclass(frozen=True)
class ESDSample:
    """Spectrum of Q = sum_i |psi_i><psi_i|, sorted descending."""

    d: int
    n: int
    eigenvalues: tuple[float, ...]
    seed: int = -1


@dataclass(frozen=True)
class MPParams:
    """Marchenko-Pastur parameters for aspect ratio r."""

    r: float

    @property
    def a(self) -> float:
        return (1.0 - math.sqrt(self.r)) ** 2

    @property
    def b(self) -> float:
        return (1.0 + math.sqrt(self.r)) ** 2

    @property
    def atom(self) -> float:
        return max(0.0, 1.0 - 1.0 / self.r)


@dataclass(frozen=True)
class MOperator:
    d: int
    beta: float
    gamma: float
    matrix: np.ndarray


@dataclass(frozen=True)
class ExperimentStats:
    d: int
    trials: int
    seed: int
    hc: tuple[float, ...]
    pgm: tuple[float | None, ...]
    mean_sqrt_eig: tuple[float, ...]
    max_eig: tuple[float, ...]
    hc_mean: float
    hc_std: float
    max_eig_mean: float
    ks_distance: float


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the
    triangular factor's diagonal phases normalized away."""
    if d < 1:
        raise ValueError("dimension must be positive")
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_protocol_ensemble(d: int, rng: np.random.Generator) -> StateEnsemble:
    """Uniform ensemble of n = d^2 states (U_i (x) 1)|mes_d> with Haar U_i.

    Uses the identity (U (x) 1)|mes_d> = vec(U)/sqrt(d) (row-major vec).
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    n = d * d
    kets = tuple(haar_unitary(d, rng).reshape(-1) / np.sqrt(d) for _ in range(n))
    return StateEnsemble(probs=(1.0 / n,) * n, states=kets)


def esd(e: StateEnsemble, seed: int = -1) -> ESDSample:
    """Eigenvalues of the unnormalized ensemble average Q = sum |psi><psi|."""
    kets = e.kets()
    psi = np.column_stack(kets)
    q = psi @ psi.conj().T
    w = np.linalg.eigvalsh(q)[::-1]
    d = int(round(math.sqrt(psi.shape[0])))
    return ESDSample(d=d, n=len(kets), eigenvalues=tuple(float(x) for x in w), seed=seed)


def mp_density(p: MPParams, x: float) -> float:
    """Continuous part of the Marchenko-Pastur density (the atom lives in the cdf)."""
    if x <= p.a or x >= p.b or x <= 0:
        return 0.0
    return math.sqrt((x - p.a) * (p.b - x)) / (2.0 * math.pi * p.r * x)


def mp_cdf(p: MPParams, x: float) -> float:
    """Cumulative distribution, atom at 0 included, by adaptive quadrature."""
    if x < 0:
        return 0.0
    total = p.atom
    if x > p.a:
        upper = min(x, p.b)
        val, _ = integrate.quad(lambda t: mp_density(p, t), p.a, upper, limit=200)
        total += val
    return min(total, 1.0)


def _mp_cdf_at_sorted(p: MPParams, xs: np.ndarray) -> np.ndarray:
    """cdf evaluated at ascending points, accumulating segment quadratures."""
    out = np.empty(len(xs))
    acc = 0.0
    prev = p.a
    for i, x in enumerate(xs):
        if x <= p.a:
            out[i] = p.atom if x >= 0 else 0.0
            continue
        upper = min(x, p.b)
        if upper > prev:
            seg, _ = integrate.quad(lambda t: mp_density(p, t), prev, upper, limit=200)
            acc += seg
            prev = upper
        out[i] = min(p.atom + acc, 1.0)
    return out


def kolmogorov_distance(s: ESDSample, p: MPParams) -> float:
    """Two-sided one-sample Kolmogorov statistic at the sample points."""
    if not s.eigenvalues:
        raise ValueError("empty sample")
    xs = np.sort(np.asarray(s.eigenvalues))
    n = len(xs)
    ref = _mp_cdf_at_sorted(p, xs)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(ref - upper), np.abs(ref - lower))))


def mean_sqrt_esd(s: ESDSample, tol: float = nk.DEFAULT_TOL) -> float:
    """(1/n) sum_i sqrt(lambda_i); equals the Holevo-Curlander scalar of the
    underlying uniform pure ensemble."""
    w = np.asarray(s.eigenvalues)
    if w.min(initial=0.0) < -tol:
        raise ValueError(f"negative eigenvalue {w.min()} in ESD sample")
    return float(np.sqrt(np.clip(w, 0.0, None)).sum() / s.n)


def _swap_operator(d: int) -> np.ndarray:
    return np.eye(d * d).reshape(d, d, d, d).transpose(0, 1, 3, 2).reshape(d * d, d * d)


def m_operator_closed_form(d: int) -> MOperator:
    """Exact E |psi><psi|^(x)2 for psi = (U (x) 1)|mes_d>, U Haar.

    The four tensor factors are labeled A, B, C, D; the swap F acts on the
    pairs (A,C) and (B,D).  Coefficients: beta = 1/(d^2 (d^2-1)),
    gamma = -1/(d^3 (d^2-1)).
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    f = _swap_operator(d)
    eye2 = np.eye(d * d)
    dims = [d, d, d, d]
    perm = [0, 2, 1, 3]  # (A, C, B, D) -> (A, B, C, D)
    f_ac_f_bd = nk.permute_factors(np.kron(f, f), dims, perm)
    f_ac_1bd = nk.permute_factors(np.kron(f, eye2), dims, perm)
    one_ac_f_bd = nk.permute_factors(np.kron(eye2, f), dims, perm)
    beta = 1.0 / (d * d * (d * d - 1))
    gamma = -1.0 / (d**3 * (d * d - 1))
    m = beta * (np.eye(d**4) + f_ac_f_bd) + gamma * (one_ac_f_bd + f_ac_1bd)
    return MOperator(d=d, beta=beta, gamma=gamma, matrix=m)


def m_operator_monte_carlo(
    d: int, samples: int, rng: np.random.Generator, batch: int = 2000
) -> np.ndarray:
    """Monte-Carlo estimate of E |psi><psi|^(x)2 over Haar draws."""
    total = np.zeros((d**4, d**4), dtype=complex)
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        phis = np.empty((m, d**4), dtype=complex)
        for k in range(m):
            psi = haar_unitary(d, rng).reshape(-1) / np.sqrt(d)
            phis[k] = np.kron(psi, psi)
        total += phis.T @ phis.conj()
        done += m
    return total / samples


def pseudo_isotropy_bound(d: int, a: np.ndarray) -> float:
    """Variance bound (1/(n-1))|Tr a|^2 + n^2/(n-1) + 2 sqrt(n)/(n-1), n = d^2."""
    n = d * d
    tr = abs(complex(np.trace(a)))
    return (tr * tr) / (n - 1) + (n * n) / (n - 1) + 2.0 * math.sqrt(n) / (n - 1)


def pseudo_isotropy_variance(
    d: int, a: np.ndarray, samples: int, rng: np.random.Generator
) -> float:
    """Empirical variance of <xi| a |xi> with xi = d (U (x) 1)|mes_d>."""
    a = np.asarray(a, dtype=complex)
    n = d * d
    if a.shape != (n, n):
        raise ValueError(f"matrix must act on C^{n}")
    if np.linalg.norm(a, ord=2) > 1.0 + 1e-9:
        raise ValueError("spectral norm must be at most 1")
    vals = np.empty(samples, dtype=complex)
    for k in range(samples):
        xi = haar_unitary(d, rng).reshape(-1) * np.sqrt(d)
        vals[k] = np.vdot(xi, a @ xi)
    return float(np.mean(np.abs(vals - vals.mean()) ** 2))


def distinguishability_experiment(
    d: int, trials: int, seed: int, pgm_limit: int = 16
) -> ExperimentStats:
    """Independent random-protocol trials with pooled eigenvalue statistics.

    Trial t draws its own stream seeded by (seed, t), so runs are
    reproducible and trials are independent.  The Holevo-Curlander scalar of
    a uniform pure ensemble equals (1/n) sum sqrt(lambda_i) of its Q matrix,
    so `hc` is computed from the spectrum; the PGM success probability costs
    an n x n square root and is only computed for d <= pgm_limit.
    """
    if d < 2 or trials < 1:
        raise ValueError("need d >= 2 and at least one trial")
    hcs, pgms, means, maxes = [], [], [], []
    pooled: list[float] = []
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        ens = random_protocol_ensemble(d, rng)
        sample = esd(ens, seed=seed)
        val = mean_sqrt_esd(sample)
        hcs.append(val)
        means.append(val)
        maxes.append(sample.eigenvalues[0])
        pgms.append(pgm_success(ens) if d <= pgm_limit else None)
        pooled.extend(sample.eigenvalues)
    pooled_sample = ESDSample(d=d, n=len(pooled), eigenvalues=tuple(pooled), seed=seed)
    ks = kolmogorov_distance(pooled_sample, MPParams(r=1.0))
    return ExperimentStats(
        d=d,
        trials=trials,
        seed=seed,
        hc=tuple(hcs),
        pgm=tuple(pgms),
        mean_sqrt_eig=tuple(means),
        max_eig=tuple(maxes),
        hc_mean=float(np.mean(hcs)),
        hc_std=float(np.std(hcs)),
        max_eig_mean=float(np.mean(maxes)),
        ks_distance=ks,
    )
