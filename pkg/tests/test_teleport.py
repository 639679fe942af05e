import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_density, random_unitary
from nmems.metrics import SIGMA_X, teleport_fidelity
from nmems.states import BellKind, bell_projector, werner
from nmems.teleport import (
    RNG_NAME,
    WERNER_ALIGNMENT,
    TeleportRun,
    _batch,
    haar_random_qubit,
    rotate_channel,
    run,
    shard_rng,
    shard_sizes,
    teleport_once,
)

I4 = np.eye(4, dtype=complex) / 4
PHI_PLUS = bell_projector(BellKind.PHI_PLUS)
# a floating-point floor for the 3-sigma check: depolarizing channels give
# the same fidelity for every input, so the sample std is ~1e-17
SIGMA_FLOOR = 1e-12


def within_3_sigma(res, target):
    return abs(res.mean_fidelity - target) <= 3 * res.std_error + SIGMA_FLOOR


def test_haar_samples_are_normalized_and_isotropic():
    rng = np.random.default_rng(0)
    z = haar_random_qubit(rng, 20000)
    np.testing.assert_allclose(np.linalg.norm(z, axis=1), 1, atol=1e-12)
    # Bloch vectors average to zero and |<0|chi>|^2 is uniform on [0, 1]
    p0 = np.abs(z[:, 0]) ** 2
    assert abs(p0.mean() - 0.5) < 0.01
    assert abs(p0.var() - 1 / 12) < 0.005
    assert haar_random_qubit(rng).shape == (2,)


def test_bell_channel_teleports_perfectly():
    chi = np.array([0.6, 0.8j])
    fid, probs, per = teleport_once(PHI_PLUS, chi)
    assert fid == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(probs, 0.25, atol=1e-12)
    np.testing.assert_allclose(per, 1, atol=1e-12)


def test_maximally_mixed_channel_gives_one_half():
    fid, probs, _ = teleport_once(I4, np.array([1, 0]))
    assert fid == pytest.approx(0.5, abs=1e-12)
    assert probs.sum() == pytest.approx(1, abs=1e-12)


def test_singlet_channel_without_alignment_fails_on_average():
    res = run(TeleportRun(bell_projector(BellKind.PSI_MINUS), 2000, seed=1))
    assert res.mean_fidelity < 0.5
    aligned = run(TeleportRun(bell_projector(BellKind.PSI_MINUS), 2000, seed=1, pre_rotation=WERNER_ALIGNMENT))
    assert aligned.mean_fidelity == pytest.approx(1, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_batch_matches_full_state_construction(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng)
    chis = haar_random_qubit(rng, 5)
    weighted, probs = _batch(rho, chis)
    for i, chi in enumerate(chis):
        fid, p, per = teleport_once(rho, chi)
        np.testing.assert_allclose(probs[i], p, atol=1e-12)
        assert weighted[i].sum() == pytest.approx(fid, abs=1e-12)
        np.testing.assert_allclose(probs[i].sum(), 1, atol=1e-10)


@pytest.mark.parametrize("m", [0.5, 0.8, 1.0])
def test_werner_channel_hits_the_singlet_fraction_formula(m):
    res = run(TeleportRun(werner(m), 100_000, seed=3, pre_rotation=WERNER_ALIGNMENT))
    assert within_3_sigma(res, (2 * m + 1) / 3)
    assert res.max_probability_error <= 1e-10


def test_maximally_mixed_channel_statistics():
    res = run(TeleportRun(I4, 10_000, seed=5))
    assert within_3_sigma(res, 0.5)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rank=st.integers(1, 4))
def test_simulated_fidelity_never_beats_the_optimum(seed, rank):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, rank=rank)
    res = run(TeleportRun(rho, 4000, seed=seed))
    assert res.mean_fidelity <= teleport_fidelity(rho) + 3 * res.std_error + SIGMA_FLOOR
    assert 0 <= res.mean_fidelity <= 1
    assert sum(res.outcome_probabilities) == pytest.approx(1, abs=1e-10)


def test_std_error_definition():
    rng = np.random.default_rng(0)
    rho = random_density(rng)
    res = run(TeleportRun(rho, 500, seed=11))
    fids = np.array([teleport_once(rho, c)[0] for c in haar_random_qubit(shard_rng(11, 0), 500)])
    assert res.mean_fidelity == pytest.approx(fids.mean(), abs=1e-12)
    assert res.std_error == pytest.approx(fids.std(ddof=1) / np.sqrt(500), rel=1e-9)


def test_runs_are_deterministic_and_worker_independent():
    rho = random_density(np.random.default_rng(1))
    a = run(TeleportRun(rho, 5000, seed=9), shards=3, workers=1)
    b = run(TeleportRun(rho, 5000, seed=9), shards=3, workers=3)
    c = run(TeleportRun(rho, 5000, seed=9), shards=3, workers=1)
    assert a == b == c
    assert a.to_dict() == b.to_dict()
    d = run(TeleportRun(rho, 5000, seed=10), shards=3)
    assert d.mean_fidelity != a.mean_fidelity


def test_shard_plan():
    assert shard_sizes(10, 3) == [4, 3, 3]
    assert sum(shard_sizes(100_000, 7)) == 100_000
    with pytest.raises(ValueError, match="shards"):
        run(TeleportRun(I4, 3), shards=4)


def test_metadata():
    res = run(TeleportRun(PHI_PLUS, 1000, seed=42))
    d = res.to_dict()
    assert d["rng"] == RNG_NAME and d["seed"] == 42 and d["samples"] == 1000
    assert d["meanFidelity"] == pytest.approx(1, abs=1e-12)
    assert d["stdError"] == pytest.approx(0, abs=1e-12)
    assert d["gap"] == pytest.approx(0, abs=1e-12)
    assert "seed 42" in res.summary()


def test_invalid_runs_are_rejected():
    with pytest.raises(ValueError, match="samples"):
        TeleportRun(I4, 0)
    with pytest.raises(ValueError, match="not unitary"):
        TeleportRun(I4, 10, pre_rotation=(np.eye(2), 2 * np.eye(2)))
    with pytest.raises(ValueError, match="2x2"):
        TeleportRun(I4, 10, pre_rotation=(np.eye(3), np.eye(2)))


def test_rotation_preserves_optimal_fidelity():
    rng = np.random.default_rng(4)
    rho = random_density(rng)
    rot = rotate_channel(rho, (random_unitary(rng), random_unitary(rng)))
    assert teleport_fidelity(rot) == pytest.approx(teleport_fidelity(rho), abs=1e-10)


def test_werner_alignment_maps_singlet_to_phi_plus():
    u = np.kron(*WERNER_ALIGNMENT)
    rot = u @ bell_projector(BellKind.PSI_MINUS) @ u.conj().T
    np.testing.assert_allclose(rot, PHI_PLUS, atol=1e-15)
    np.testing.assert_allclose(WERNER_ALIGNMENT[1] @ WERNER_ALIGNMENT[1].conj().T, np.eye(2), atol=1e-15)
    assert not np.allclose(WERNER_ALIGNMENT[1], SIGMA_X)
