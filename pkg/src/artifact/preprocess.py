"""Conditioning chain: re-reference, zero-phase filtering, detrend and demean.

All functions return new recordings; inputs are never modified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .recording import Recording

DIRECTIONS = ("onepass", "twopass")


@dataclass(frozen=True)
class PreprocessConfig:
    """FieldTrip-style preprocessing switches.  ``None`` cutoffs disable a filter."""

    demean: bool = False
    detrend: bool = False
    ref_label: str | None = None
    lp_cutoff: float | None = None
    hp_cutoff: float | None = None
    filter_direction: str = "twopass"

    def validate(self, fs: float) -> None:
        if self.filter_direction not in DIRECTIONS:
            raise ValueError(f"filter_direction must be one of {DIRECTIONS}")
        for name in ("lp_cutoff", "hp_cutoff"):
            fc = getattr(self, name)
            if fc is not None and not 0 < fc < fs / 2:
                raise ValueError(f"{name}={fc} Hz outside (0, {fs / 2}) for fs={fs}")
        if self.lp_cutoff is not None and self.hp_cutoff is not None and self.lp_cutoff <= self.hp_cutoff:
            raise ValueError("lp_cutoff must exceed hp_cutoff")


def demean(rec: Recording) -> Recording:
    return rec.with_trials([tr - tr.mean(axis=1, keepdims=True) for tr in rec.trials])


def detrend_linear(rec: Recording) -> Recording:
    """Subtract the least-squares line from every channel of every trial."""
    if min(rec.trial_lengths) < 2:
        raise ValueError("linear detrending needs trials of at least 2 samples")
    return rec.with_trials([signal.detrend(tr, axis=1, type="linear") for tr in rec.trials])


def rereference(rec: Recording, ref_label: str) -> Recording:
    i = rec.index(ref_label)
    return Recording(rec.labels, rec.fs, tuple(tr - tr[i] for tr in rec.trials),
                     eog_labels=rec.eog_labels, ref_label=ref_label)


def fir_order(fs: float, cutoff: float, n_samples: int | None = None) -> int:
    """Default windowed-sinc order: 3 * floor(fs / cutoff), even, capped by the trial length."""
    order = 3 * int(np.floor(fs / cutoff))
    order += order % 2
    if n_samples is not None:
        order = min(order, n_samples - 1)
        order -= order % 2
    return max(order, 2)


def fir_taps(kind: str, cutoff: float, fs: float, order: int) -> np.ndarray:
    """Hamming-windowed sinc taps (``order + 1`` of them, ``order`` even).

    Lowpass taps are normalized to unit DC gain; the highpass is the spectral
    inversion of that lowpass, so its taps sum to zero.
    """
    if order % 2:
        raise ValueError("FIR order must be even for a symmetric type-I filter")
    n = np.arange(order + 1) - order / 2
    fc = cutoff / fs
    h = 2 * fc * np.sinc(2 * fc * n) * np.hamming(order + 1)
    h /= h.sum()
    if kind == "lowpass":
        return h
    if kind == "highpass":
        h = -h
        h[order // 2] += 1.0
        return h
    raise ValueError(f"kind must be 'lowpass' or 'highpass', not {kind!r}")


def _causal(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    return signal.oaconvolve(x, taps[None, :], mode="full", axes=1)[:, : x.shape[1]]


def apply_fir(x: np.ndarray, taps: np.ndarray, direction: str = "twopass") -> np.ndarray:
    """Filter rows of ``x`` with mirror padding of one filter length on each side."""
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    x = np.atleast_2d(x)
    pad = len(taps)
    xp = np.pad(x, ((0, 0), (pad, pad)), mode="reflect")
    y = _causal(xp, taps)
    if direction == "twopass":
        y = _causal(y[:, ::-1], taps)[:, ::-1]
    return y[:, pad:-pad]


def filter_fir(rec: Recording, kind: str, cutoff: float, direction: str = "twopass",
               order: int | None = None) -> Recording:
    """Low- or high-pass every channel with a windowed-sinc FIR filter."""
    if not 0 < cutoff < rec.fs / 2:
        raise ValueError(f"cutoff {cutoff} Hz outside (0, {rec.fs / 2})")
    shortest = min(rec.trial_lengths)
    if order is None:
        order = fir_order(rec.fs, cutoff, shortest)
    if shortest <= order:
        raise ValueError(f"trials of {shortest} samples are too short for a FIR of order {order}; "
                         f"need at least {order + 1}")
    taps = fir_taps(kind, cutoff, rec.fs, order)
    return rec.with_trials([apply_fir(tr, taps, direction) for tr in rec.trials])


def butterworth_sos(fs: float, f_lo: float, f_hi: float, order: int = 3) -> np.ndarray:
    """Band-pass Butterworth second-order sections via the pre-warped bilinear transform."""
    if not 0 < f_lo < f_hi < fs / 2:
        raise ValueError(f"band ({f_lo}, {f_hi}) Hz invalid for fs={fs}")
    if order < 1:
        raise ValueError("order must be >= 1")
    sos = signal.butter(order, [f_lo, f_hi], btype="bandpass", fs=fs, output="sos")
    for section in sos:
        if np.any(np.abs(np.roots(section[3:])) >= 1.0):
            raise ValueError(f"unstable Butterworth realization for band ({f_lo}, {f_hi}) at fs={fs}")
    return sos


def butterworth_bandpass(x, fs: float, f_lo: float, f_hi: float, order: int = 3,
                         direction: str = "twopass") -> np.ndarray:
    """Band-pass a single channel (or the last axis of an array).

    Twopass runs the cascade forward and then backward over a mirror-padded
    copy, which squares the magnitude response and cancels the phase.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    sos = butterworth_sos(fs, f_lo, f_hi, order)
    x = np.asarray(x, dtype=float)
    pad = min(x.shape[-1] - 1, int(np.ceil(3 * fs / f_lo)))
    if pad > 0:
        widths = [(0, 0)] * (x.ndim - 1) + [(pad, pad)]
        xp = np.pad(x, widths, mode="reflect")
    else:
        xp = x
    y = signal.sosfilt(sos, xp, axis=-1)
    if direction == "twopass":
        y = np.flip(signal.sosfilt(sos, np.flip(y, -1), axis=-1), -1)
    return y[..., pad: pad + x.shape[-1]] if pad > 0 else y


def preprocess_pipeline(rec: Recording, cfg: PreprocessConfig) -> Recording:
    """Re-reference, low-pass, high-pass, detrend, then demean.

    Mean removal runs last so that the output has zero mean per channel and
    trial regardless of filter edge effects.
    """
    cfg.validate(rec.fs)
    if cfg.ref_label is not None:
        rec = rereference(rec, cfg.ref_label)
    if cfg.lp_cutoff is not None:
        rec = filter_fir(rec, "lowpass", cfg.lp_cutoff, cfg.filter_direction)
    if cfg.hp_cutoff is not None:
        rec = filter_fir(rec, "highpass", cfg.hp_cutoff, cfg.filter_direction)
    if cfg.detrend:
        rec = detrend_linear(rec)
    if cfg.demean:
        rec = demean(rec)
    return rec
