"""Synthetic EEG with planted blinks and known mixing, for tests and demos."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .recording import Recording

EEG_LABELS = (
    "Fp1", "Fp2", "Fz", "F3", "F4", "F7", "F8", "FC1", "FC2", "Cz", "C3", "C4",
    "T7", "T8", "CP1", "CP2", "Pz", "P3", "P4", "P7", "P8", "Oz", "O1", "O2",
)


@dataclass(frozen=True)
class BlinkSpec:
    count: int = 5
    width_s: float = 0.4
    amplitude: float = 200.0
    min_gap_s: float = 0.3


@dataclass(frozen=True)
class SynthSpec:
    """Generator settings.

    ``frontal_weights`` gives the blink loading of the first EEG channels
    (Fp1, Fp2, Fz, ...); further channels get ``posterior_weight``.  The
    VEOG channel carries the blink at unit gain and HEOG at ``heog_gain``.
    """

    n_channels: int = 8
    fs: float = 500.0
    duration_s: float = 20.0
    n_sources: int = 7
    blink: BlinkSpec = field(default_factory=BlinkSpec)
    brain_amplitude: float = 6.0
    frontal_weights: tuple[float, ...] = (1.0, 0.9, 0.6)
    posterior_weight: float = 0.05
    heog_gain: float = 0.3
    eog_brain_leak: float = 0.1
    noise_std: float = 1.0
    n_trials: int = 1
    seed: int = 0

    def validate(self) -> None:
        if self.n_channels < 2 or self.n_channels > len(EEG_LABELS):
            raise ValueError(f"n_channels must be in 2..{len(EEG_LABELS)}")
        if self.n_sources < 1 or self.fs <= 0 or self.duration_s <= 0 or self.n_trials < 1:
            raise ValueError("n_sources, fs, duration_s and n_trials must be positive")
        if self.noise_std < 0 or self.blink.count < 0 or self.blink.amplitude < 0:
            raise ValueError("noise_std, blink count and amplitude must be non-negative")
        if self.blink.count and not 0 < self.blink.width_s < self.duration_s:
            raise ValueError("blink width must be positive and shorter than the recording")


@dataclass(frozen=True, eq=False)
class SynthTruth:
    sources: np.ndarray          # (n_sources, T) brain sources, unit variance
    blink: np.ndarray            # (T,) blink waveform in µV at unit loading
    mixing: np.ndarray           # (n_channels, n_sources + 1); last column is the blink loading
    blink_mask: np.ndarray       # (T,) True inside a blink
    blink_onsets: np.ndarray     # sample index of each blink start

    @property
    def brain_mixing(self) -> np.ndarray:
        return self.mixing[:, :-1]


def pink_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance noise with a 1/f power spectrum."""
    spec = rng.standard_normal(n // 2 + 1) + 1j * rng.standard_normal(n // 2 + 1)
    f = np.arange(n // 2 + 1, dtype=float)
    f[0] = 1.0
    spec /= np.sqrt(f)
    spec[0] = 0.0
    x = np.fft.irfft(spec, n)
    return x / x.std()


def brain_sources(n_sources: int, n: int, fs: float, rng: np.random.Generator) -> np.ndarray:
    """Amplitude-modulated oscillators in 4-30 Hz plus a 1/f background, unit variance rows."""
    t = np.arange(n) / fs
    freqs = np.sort(rng.uniform(4.0, 30.0, n_sources))
    out = np.empty((n_sources, n))
    for i, f in enumerate(freqs):
        mod = 1.0 + 0.3 * np.sin(2 * np.pi * rng.uniform(0.05, 0.3) * t + rng.uniform(0, 2 * np.pi))
        s = mod * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi)) + 0.3 * pink_noise(n, rng)
        out[i] = (s - s.mean()) / s.std()
    return out


def blink_train(n: int, fs: float, spec: BlinkSpec, rng: np.random.Generator):
    """Raised-cosine pulses at random, non-overlapping onsets.

    Returns ``(waveform, mask, onsets)``.
    """
    width = int(round(spec.width_s * fs))
    gap = int(round(spec.min_gap_s * fs))
    wave = np.zeros(n)
    mask = np.zeros(n, dtype=bool)
    if spec.count == 0:
        return wave, mask, np.zeros(0, dtype=int)
    free = n - spec.count * width - (spec.count + 1) * gap
    if free < 0:
        raise ValueError(f"{spec.count} blinks of {spec.width_s} s do not fit in {n / fs} s")
    slack = np.sort(rng.integers(0, free + 1, spec.count))
    onsets = gap + slack + np.arange(spec.count) * (width + gap)
    pulse = spec.amplitude * 0.5 * (1 - np.cos(2 * np.pi * (np.arange(width) + 0.5) / width))
    for o in onsets:
        wave[o:o + width] = pulse
        mask[o:o + width] = True
    return wave, mask, onsets


def synth_contaminated_recording(spec: SynthSpec = SynthSpec()) -> tuple[Recording, SynthTruth]:
    """EEG channels plus VEOG/HEOG with blinks leaking into frontal sites.

    EEG = brain_mixing @ (brain_amplitude * sources) + blink_loading * blink
    + sensor noise.  Identical specs give bit-identical output.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n = int(round(spec.duration_s * spec.fs))
    if n < spec.n_trials:
        raise ValueError("recording shorter than the number of trials")
    sources = brain_sources(spec.n_sources, n, spec.fs, rng)
    blink, mask, onsets = blink_train(n, spec.fs, spec.blink, rng)

    m = spec.n_channels
    brain_mix = rng.uniform(-1.0, 1.0, (m, spec.n_sources))
    loading = np.full(m, spec.posterior_weight)
    k = min(m, len(spec.frontal_weights))
    loading[:k] = spec.frontal_weights[:k]
    mixing = np.column_stack([brain_mix, loading])

    eeg = spec.brain_amplitude * brain_mix @ sources + np.outer(loading, blink)
    eeg += spec.noise_std * rng.standard_normal(eeg.shape)
    leak = spec.eog_brain_leak * spec.brain_amplitude * rng.uniform(-1.0, 1.0, (2, spec.n_sources)) @ sources
    veog = blink + leak[0] + spec.noise_std * rng.standard_normal(n)
    heog = spec.heog_gain * blink + leak[1] + spec.noise_std * rng.standard_normal(n)

    data = np.vstack([eeg, veog, heog])
    labels = EEG_LABELS[:m] + ("VEOG", "HEOG")
    bounds = np.linspace(0, n, spec.n_trials + 1).round().astype(int)
    trials = tuple(data[:, a:b] for a, b in zip(bounds[:-1], bounds[1:]))
    rec = Recording(labels, spec.fs, trials, eog_labels=("VEOG", "HEOG"))
    return rec, SynthTruth(sources, blink, mixing, mask, onsets)
