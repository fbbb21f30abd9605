import numpy as np
import pytest

from artifact.ica import (amari_index, apply_unmixing, fastica, fit_recording, load_model, reconstruct,
                          reconstruct_partial, save_model, whiten)
from artifact.msf import Msf
from artifact.recording import Recording, concatenate_trials

from oracles import matched_abs_corr


def two_sources(T=20000, seed=0):
    r = np.random.default_rng(seed)
    S = np.vstack([r.uniform(-np.sqrt(3), np.sqrt(3), T), r.laplace(0, 1 / np.sqrt(2), T)])
    return S, np.array([[2.0, 1.0], [1.0, 1.0]])


def eeg_like(seed=0, trials=(400, 300, 300)):
    r = np.random.default_rng(seed)
    data = [r.standard_normal((4, n)) ** 3 for n in trials]
    M = r.standard_normal((4, 4))
    return Recording(("A", "B", "C", "D"), 100.0, tuple(M @ d + 5.0 for d in data))


def test_whiten_covariance_and_centering(rng):
    X = rng.standard_normal((5, 3000)) * [[1], [2], [3], [4], [5]] + 10
    X[1] += 0.5 * X[0]
    Z, whitener, mean = whiten(X)
    np.testing.assert_allclose(Z @ Z.T / Z.shape[1], np.eye(5), atol=1e-8)
    assert np.abs(Z.mean(axis=1)).max() < 1e-10
    np.testing.assert_allclose(mean, X.mean(axis=1))


def test_whiten_duplicated_channel_drops_rank(rng):
    X = rng.standard_normal((4, 2000))
    X = np.vstack([X, X[2]])
    Z, whitener, _ = whiten(X)
    oracle_rank = int(np.sum(np.linalg.eigvalsh(np.cov(X)) > 1e-10 * np.linalg.eigvalsh(np.cov(X)).max()))
    assert Z.shape[0] == oracle_rank == 4


def test_recovers_uniform_and_laplace():
    S, M = two_sources()
    model = fastica(M @ S)
    assert model.convergence.converged and model.convergence.reliable
    assert matched_abs_corr(model.transform(M @ S), S).min() > 0.99
    np.testing.assert_allclose(model.unmixing @ model.mixing, np.eye(2), atol=1e-8)
    assert amari_index(model.unmixing, M) < 0.05


def test_gaussian_sources_flagged_unreliable():
    r = np.random.default_rng(7)
    X = np.array([[2.0, 1.0], [1.0, 1.0]]) @ r.standard_normal((2, 20000))
    assert not fastica(X).convergence.reliable


def test_fastica_deterministic():
    S, M = two_sources(T=5000)
    a, b = fastica(M @ S, seed=3), fastica(M @ S, seed=3)
    assert a.unmixing.tobytes() == b.unmixing.tobytes()
    assert a.mixing.tobytes() == b.mixing.tobytes()


def test_non_convergence_recorded(caplog):
    S, M = two_sources(T=5000)
    model = fastica(M @ S, max_iter=1, tol=1e-15)
    assert not model.convergence.converged
    assert "did not converge" in caplog.text


def test_amari_index_bounds(rng):
    A = rng.standard_normal((4, 4))
    P = np.eye(4)[[2, 0, 3, 1]] * [[3.0], [-1.0], [0.5], [2.0]]
    assert amari_index(P @ np.linalg.inv(A), A) == pytest.approx(0.0, abs=1e-12)
    assert amari_index(np.ones((3, 3)), np.eye(3)) == pytest.approx(1.0)


def test_training_components_unit_variance_and_trials():
    rec = eeg_like()
    model = fit_recording(rec, rec.labels)
    comps = apply_unmixing(model, rec)
    assert comps.trial_lengths == (400, 300, 300)
    S = comps.concatenated()
    np.testing.assert_allclose(S.var(axis=1), 1.0, atol=1e-6)
    C = np.corrcoef(S)
    assert np.abs(C - np.eye(len(C))).max() < 1e-6


def test_reconstruct_identity_and_reject_all():
    rec = eeg_like()
    model = fit_recording(rec, rec.labels)
    comps = apply_unmixing(model, rec)
    same = reconstruct(model, comps, set(), rec)
    X = concatenate_trials(rec)
    assert np.abs(concatenate_trials(same) - X).max() <= 1e-6 * np.abs(X).max()
    flat = concatenate_trials(reconstruct(model, comps, range(model.n_components), rec))
    np.testing.assert_allclose(flat, np.repeat(model.mean[:, None], X.shape[1], axis=1), atol=1e-8)
    with pytest.raises(IndexError):
        reconstruct(model, comps, {9}, rec)


def test_reconstruct_matches_mixing_formula():
    rec = eeg_like()
    model = fit_recording(rec, rec.labels)
    comps = apply_unmixing(model, rec)
    S = comps.concatenated().copy()
    S[1] = 0
    direct = model.mixing @ S + model.mean[:, None]
    np.testing.assert_allclose(concatenate_trials(reconstruct(model, comps, {1}, rec)), direct, atol=1e-8)


def test_reconstruct_scale_equivariant():
    rec = eeg_like()
    scaled = rec.with_trials([3.0 * tr for tr in rec.trials])
    outs = []
    for r in (rec, scaled):
        model = fit_recording(r, r.labels)
        comps = apply_unmixing(model, r)
        rej = {int(np.argmax(np.abs(comps.concatenated()).max(axis=1)))}
        outs.append(concatenate_trials(reconstruct(model, comps, rej, r)))
    np.testing.assert_allclose(outs[1], 3.0 * outs[0], rtol=1e-6, atol=1e-6 * np.abs(outs[1]).max())


def test_planted_blink_removed(blink_data):
    rec, truth = blink_data
    eeg = rec.labels[:-2]
    model = fit_recording(rec, eeg)
    comps = apply_unmixing(model, rec)
    j = int(np.argmax(np.abs(np.corrcoef(comps.concatenated(), truth.blink)[-1, :-1])))
    out = reconstruct(model, comps, {j}, rec)
    assert abs(np.corrcoef(rec.channel("Fp1"), truth.blink)[0, 1]) > 0.8
    assert abs(np.corrcoef(out.channel("Fp1"), truth.blink)[0, 1]) < 0.1
    np.testing.assert_array_equal(out.channel("VEOG"), rec.channel("VEOG"))


def test_partial_gate_examples():
    rec = eeg_like()
    model = fit_recording(rec, rec.labels)
    comps = apply_unmixing(model, rec)
    rej = {0, 2}
    full = concatenate_trials(reconstruct(model, comps, rej, rec))
    X = concatenate_trials(rec)
    zero = concatenate_trials(reconstruct_partial(model, comps, rej, Msf.zeros(rec), rec))
    assert np.abs(zero - X).max() < 1e-10
    one = concatenate_trials(reconstruct_partial(model, comps, rej, Msf.ones(rec), rec))
    np.testing.assert_allclose(one, full, atol=1e-10)
    r = np.random.default_rng(0)
    mixed = Msf(tuple((r.random(n) < 0.3).astype(float) for n in rec.trial_lengths), rec.fs)
    out = concatenate_trials(reconstruct_partial(model, comps, rej, mixed, rec))
    w = mixed.concatenated()
    assert np.abs(out[:, w == 0] - X[:, w == 0]).max() < 1e-6 * np.abs(X).max()
    np.testing.assert_allclose(out[:, w == 1], full[:, w == 1], atol=1e-10)


def test_partial_error_monotone_in_weight():
    rec = eeg_like()
    model = fit_recording(rec, rec.labels)
    comps = apply_unmixing(model, rec)
    X = concatenate_trials(rec)
    errs = []
    for w in (0, 0.25, 0.5, 0.75, 1):
        msf = Msf(tuple(np.full(n, w) for n in rec.trial_lengths), rec.fs)
        errs.append(np.abs(concatenate_trials(reconstruct_partial(model, comps, {1}, msf, rec)) - X).max())
    assert errs[0] == 0 and all(a < b for a, b in zip(errs, errs[1:]))


def test_partial_length_mismatch():
    rec = eeg_like()
    model = fit_recording(rec, rec.labels)
    comps = apply_unmixing(model, rec)
    with pytest.raises(ValueError):
        reconstruct_partial(model, comps, {0}, Msf((np.zeros(5),), rec.fs), rec)


def test_model_round_trip(tmp_path):
    rec = eeg_like()
    model = fit_recording(rec, rec.labels, seed=9)
    back = load_model(save_model(model, tmp_path / "m.txt"))
    assert back.channel_labels == model.channel_labels and back.seed == 9
    for name in ("mean", "whitener", "unmixing", "mixing"):
        np.testing.assert_array_equal(getattr(back, name), getattr(model, name))
    (tmp_path / "bad.txt").write_text("labels: A\n[mean]\n1 2\n")
    with pytest.raises(ValueError):
        load_model(tmp_path / "bad.txt")
