"""Monte Carlo simulation of standard one-qubit teleportation.

The input qubit is q0, the channel occupies (q1, q2) and Bob holds q2.
Alice measures (q0, q1) in the Bell basis and Bob applies the Pauli
correction for her outcome::

    phi+ -> I    phi- -> Z    psi+ -> X    psi- -> Y   (up to phase)

With this table a ``|phi+>`` channel teleports perfectly. Channels built on
``|psi->`` (the Werner family) need a local rotation first; see
:data:`WERNER_ALIGNMENT`.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, kron, validate_density
from .metrics import SIGMA_X, SIGMA_Y, SIGMA_Z, teleport_fidelity
from .states import BellKind, bell_state

RNG_NAME = "PCG64"
PROB_SKIP = 1e-14
UNITARY_TOL = 1e-10
CHUNK = 1 << 15

I2 = np.eye(2, dtype=np.complex128)
OUTCOMES = (BellKind.PHI_PLUS, BellKind.PHI_MINUS, BellKind.PSI_PLUS, BellKind.PSI_MINUS)
CORRECTIONS = np.array([I2, SIGMA_Z, SIGMA_X, SIGMA_Y])
# BELL_ROWS[k, a, b] = <a b | B_k>
BELL_ROWS = np.array([bell_state(k).reshape(2, 2) for k in OUTCOMES])

# (I, XZ) maps |psi-> to |phi+> up to a global sign.
WERNER_ALIGNMENT = (I2.copy(), SIGMA_X @ SIGMA_Z)


def haar_random_qubit(rng, size=None):
    """Uniformly random qubit(s) on the Bloch sphere.

    Four standard normals (real and imaginary part of each amplitude),
    normalized. Returns shape ``(2,)`` or ``(size, 2)``.
    """
    n = 1 if size is None else size
    g = rng.standard_normal((n, 4))
    z = g[:, 0::2] + 1j * g[:, 1::2]
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z[0] if size is None else z


def _check_unitary(u, name):
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2, got {u.shape}")
    err = float(np.max(np.abs(u @ u.conj().T - I2)))
    if err > UNITARY_TOL:
        raise ValueError(f"{name} is not unitary (|U U+ - I| = {err:.3e})")
    return u


def rotate_channel(channel, pre_rotation):
    """``(Ua (x) Ub) rho (Ua (x) Ub)^+``."""
    ua = _check_unitary(pre_rotation[0], "preRotation[0]")
    ub = _check_unitary(pre_rotation[1], "preRotation[1]")
    u = kron(ua, ub)
    return validate_density(u @ as_matrix(channel) @ u.conj().T)


def teleport_once(channel, chi):
    """Average output fidelity for one input state, built on the full 8x8 state.

    Returns ``(fidelity, probabilities, per_outcome)`` where ``per_outcome[k]``
    is the post-correction fidelity given outcome ``k`` (0 when the outcome
    has probability below 1e-14).
    """
    rho = as_matrix(channel)
    chi = np.asarray(chi, dtype=np.complex128).reshape(2)
    joint = kron(np.outer(chi, chi.conj()), rho)
    probs = np.zeros(4)
    per = np.zeros(4)
    total = 0.0
    for k, kind in enumerate(OUTCOMES):
        proj = kron(np.outer(bell_state(kind), bell_state(kind).conj()), I2)
        post = (proj @ joint @ proj).reshape((2,) * 6)
        bob = np.einsum("abcabd->cd", post)
        p = float(np.real(np.trace(bob)))
        probs[k] = p
        if p < PROB_SKIP:
            continue
        u = CORRECTIONS[k]
        out = u @ (bob / p) @ u.conj().T
        per[k] = float(np.real(chi.conj() @ out @ chi))
        total += p * per[k]
    return total, probs, per


def _batch(rho, chis):
    """Vectorized :func:`teleport_once`: weighted fidelities ``(n, 4)`` and probabilities ``(n, 4)``."""
    r = rho.reshape(2, 2, 2, 2)
    # v[n, k, b] = sum_a <a b|B_k>* chi_a
    v = np.einsum("kab,na->nkb", BELL_ROWS.conj(), chis)
    sigma = np.einsum("nkb,bcde,nkd->nkce", v, r, v.conj())
    probs = np.real(np.einsum("nkcc->nk", sigma))
    corrected = np.einsum("kij,nkjl,kml->nkim", CORRECTIONS, sigma, CORRECTIONS.conj())
    weighted = np.real(np.einsum("ni,nkij,nj->nk", chis.conj(), corrected, chis))
    weighted[probs < PROB_SKIP] = 0.0
    return weighted, probs


@dataclass(frozen=True)
class TeleportRun:
    channel: object
    samples: int
    seed: int = 0
    pre_rotation: tuple | None = None

    def __post_init__(self):
        if int(self.samples) < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        object.__setattr__(self, "samples", int(self.samples))
        if self.pre_rotation is not None:
            _check_unitary(self.pre_rotation[0], "preRotation[0]")
            _check_unitary(self.pre_rotation[1], "preRotation[1]")
        validate_density(self.channel)

    def effective_channel(self):
        if self.pre_rotation is None:
            return as_matrix(self.channel)
        return as_matrix(rotate_channel(self.channel, self.pre_rotation))


@dataclass(frozen=True)
class SimResult:
    mean_fidelity: float
    std_error: float
    per_outcome_fidelities: tuple
    outcome_probabilities: tuple
    samples: int
    seed: int
    shards: int
    max_probability_error: float
    optimal_fidelity: float
    rng: str = RNG_NAME
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def gap(self):
        """Optimal fidelity from the correlation matrix minus the simulated mean."""
        return self.optimal_fidelity - self.mean_fidelity

    def to_dict(self):
        return {
            "meanFidelity": self.mean_fidelity,
            "stdError": self.std_error,
            "perOutcomeFidelities": list(self.per_outcome_fidelities),
            "outcomeProbabilities": list(self.outcome_probabilities),
            "samples": self.samples,
            "seed": self.seed,
            "shards": self.shards,
            "rng": self.rng,
            "maxProbabilityError": self.max_probability_error,
            "optimalFidelity": self.optimal_fidelity,
            "gap": self.gap,
            **self.extra,
        }

    def summary(self):
        return (
            f"mean fidelity {self.mean_fidelity:.6f} +/- {self.std_error:.2e} "
            f"over {self.samples} samples (seed {self.seed}, {self.rng}); "
            f"optimum {self.optimal_fidelity:.6f}"
        )


def shard_sizes(samples, shards):
    base, rem = divmod(samples, shards)
    return [base + (i < rem) for i in range(shards)]


def shard_rng(seed, shard):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(shard,))))


def _run_shard(rho, seed, shard, n):
    rng = shard_rng(seed, shard)
    fids, wsum, psum = [], np.zeros(4), np.zeros(4)
    worst = 0.0
    for start in range(0, n, CHUNK):
        chis = haar_random_qubit(rng, min(CHUNK, n - start))
        weighted, probs = _batch(rho, chis)
        fids.append(weighted.sum(axis=1))
        wsum += weighted.sum(axis=0)
        psum += probs.sum(axis=0)
        worst = max(worst, float(np.max(np.abs(probs.sum(axis=1) - 1.0))))
    return np.concatenate(fids), wsum, psum, worst


def run(tr, shards=1, workers=1):
    """Monte Carlo estimate of the average teleportation fidelity.

    Samples are split into ``shards`` substreams seeded from ``(seed, shard)``;
    results are merged in shard order, so the output depends only on the
    shard plan and never on ``workers``.
    """
    if shards < 1 or shards > tr.samples:
        raise ValueError(f"shards must lie in [1, samples], got {shards}")
    rho = tr.effective_channel()
    sizes = shard_sizes(tr.samples, shards)
    jobs = [(rho, tr.seed, i, n) for i, n in enumerate(sizes)]
    if workers > 1 and shards > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: _run_shard(*a), jobs))
    else:
        parts = [_run_shard(*a) for a in jobs]
    fids = np.concatenate([p[0] for p in parts])
    wsum = sum(p[1] for p in parts)
    psum = sum(p[2] for p in parts)
    worst = max(p[3] for p in parts)
    n = fids.size
    mean = float(np.mean(fids))
    std_err = float(np.std(fids, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    per = tuple(float(w / p) if p > PROB_SKIP else 0.0 for w, p in zip(wsum, psum))
    return SimResult(
        mean_fidelity=min(1.0, max(0.0, mean)),
        std_error=std_err,
        per_outcome_fidelities=per,
        outcome_probabilities=tuple(float(p / n) for p in psum),
        samples=n,
        seed=tr.seed,
        shards=shards,
        max_probability_error=worst,
        optimal_fidelity=teleport_fidelity(rho),
    )
