import numpy as np
import pytest

from artifact.synth import BlinkSpec, SynthSpec, pink_noise, synth_contaminated_recording
from oracles import runs_of


def test_deterministic():
    a, ta = synth_contaminated_recording(SynthSpec(seed=11))
    b, tb = synth_contaminated_recording(SynthSpec(seed=11))
    assert a.trials[0].tobytes() == b.trials[0].tobytes()
    assert ta.mixing.tobytes() == tb.mixing.tobytes()


def test_truth_mask_and_veog(blink_data):
    rec, truth = blink_data
    assert len(runs_of(truth.blink_mask)) == len(truth.blink_onsets) == 5
    assert np.corrcoef(rec.channel("VEOG"), truth.blink)[0, 1] > 0.9
    assert rec.labels[-2:] == ("VEOG", "HEOG") and rec.n_channels == 10
    assert truth.brain_mixing.shape == (8, 7)


def test_frontal_contamination(blink_data):
    rec, _ = blink_data
    for ch in ("Fp1", "Fp2", "Fz"):
        assert abs(np.corrcoef(rec.channel(ch), rec.channel("VEOG"))[0, 1]) > 0.8


def test_trials_split_evenly():
    rec, _ = synth_contaminated_recording(SynthSpec(n_trials=3, duration_s=3, fs=100, blink=BlinkSpec(count=1)))
    assert rec.trial_lengths == (100, 100, 100)


def test_pink_noise_spectrum():
    x = pink_noise(2 ** 14, np.random.default_rng(0))
    assert x.std() == pytest.approx(1.0)
    P = np.abs(np.fft.rfft(x)) ** 2
    slope = np.polyfit(np.log(np.arange(10, 4000)), np.log(P[10:4000]), 1)[0]
    assert -1.3 < slope < -0.7


@pytest.mark.parametrize("spec", [
    SynthSpec(blink=BlinkSpec(count=60, width_s=0.4)),
    SynthSpec(blink=BlinkSpec(width_s=30.0)),
    SynthSpec(n_channels=1),
    SynthSpec(noise_std=-1),
])
def test_infeasible_specs(spec):
    with pytest.raises(ValueError):
        synth_contaminated_recording(spec)
