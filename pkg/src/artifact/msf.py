"""Artifact membership functions: per-sample artifact weights built from EOG.

Detection follows the z-value scheme: band-pass each EOG channel, rectify,
standardize with statistics pooled over all trials, sum the channel z-scores
scaled by 1/sqrt(n_channels), threshold, then pad every detected run.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import ndimage

from .preprocess import butterworth_bandpass
from .recording import DEFAULT_EOG, Recording


@dataclass(frozen=True, eq=False)
class Msf:
    """Per-trial weight vectors in [0, 1]; 1 marks an artifact sample."""

    trials: tuple[np.ndarray, ...]
    fs: float
    source_channels: tuple[str, ...] = ()

    def __post_init__(self):
        trials = []
        for i, w in enumerate(self.trials):
            w = np.array(w, dtype=float).ravel()
            if np.any(~np.isfinite(w)) or np.any((w < 0) | (w > 1)):
                raise ValueError(f"MSF trial {i} has weights outside [0, 1]")
            w.setflags(write=False)
            trials.append(w)
        object.__setattr__(self, "trials", tuple(trials))
        object.__setattr__(self, "source_channels", tuple(self.source_channels))

    @classmethod
    def zeros(cls, rec: Recording) -> "Msf":
        return cls(tuple(np.zeros(n) for n in rec.trial_lengths), rec.fs)

    @classmethod
    def ones(cls, rec: Recording) -> "Msf":
        return cls(tuple(np.ones(n) for n in rec.trial_lengths), rec.fs)

    @property
    def trial_lengths(self) -> tuple[int, ...]:
        return tuple(len(w) for w in self.trials)

    @property
    def is_binary(self) -> bool:
        return all(np.all((w == 0) | (w == 1)) for w in self.trials)

    def concatenated(self) -> np.ndarray:
        return np.concatenate(self.trials)

    def flagged_fraction(self) -> float:
        return float(np.mean(self.concatenated() > 0))

    def check_matches(self, rec: Recording) -> None:
        if self.trial_lengths != rec.trial_lengths:
            raise ValueError(f"MSF trial lengths {self.trial_lengths} do not match "
                             f"recording trial lengths {rec.trial_lengths}")


@dataclass(frozen=True)
class DetectConfig:
    channels: tuple[str, ...] = DEFAULT_EOG
    cutoff: float = 0.5
    band: tuple[float, float] = (2.0, 15.0)
    order: int = 3
    artifact_pad_s: float = 0.1
    trial_pad_s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "band", tuple(float(b) for b in self.band))
        if not self.cutoff > 0:
            raise ValueError(f"cutoff must be positive, got {self.cutoff}")
        if len(self.band) != 2 or not 0 < self.band[0] < self.band[1]:
            raise ValueError(f"invalid band {self.band}")
        if self.order < 1:
            raise ValueError("Butterworth order must be >= 1")
        if self.artifact_pad_s < 0:
            raise ValueError("artifact_pad_s must be >= 0")
        if self.trial_pad_s != 0:
            raise ValueError("trial padding is not supported; trial_pad_s must be 0")


def pad_samples(pad_s: float, fs: float) -> int:
    """``round(pad_s * fs)`` with halves rounded up."""
    return int(np.floor(pad_s * fs + 0.5))


def zvalue_trace(eog: Recording, cfg: DetectConfig = DetectConfig()) -> list[np.ndarray]:
    """Combined z-value trace per trial.

    Each detection channel is band-passed (Butterworth, twopass) and
    rectified per trial, then standardized with its mean and standard
    deviation over all trials.  A channel with zero variance contributes
    nothing and triggers a RuntimeWarning.
    """
    missing = [c for c in cfg.channels if c not in eog.labels]
    if missing:
        raise ValueError(f"detection channels missing from recording: {', '.join(missing)}")
    f_lo, f_hi = cfg.band
    lengths = eog.trial_lengths
    total = [np.zeros(n) for n in lengths]
    for ch in cfg.channels:
        i = eog.index(ch)
        raw = np.concatenate([tr[i] for tr in eog.trials])
        if not raw.std() > 1e-12 * max(1.0, np.abs(raw).max()):
            warnings.warn(f"detection channel {ch} has zero variance; it contributes z = 0",
                          RuntimeWarning, stacklevel=2)
            continue
        env = [np.abs(butterworth_bandpass(tr[i], eog.fs, f_lo, f_hi, cfg.order, "twopass"))
               for tr in eog.trials]
        pooled = np.concatenate(env)
        mu, sd = pooled.mean(), pooled.std()
        for t, e in enumerate(env):
            total[t] += (e - mu) / sd
    scale = np.sqrt(len(cfg.channels))
    return [z / scale for z in total]


def threshold_and_pad(z: Sequence[np.ndarray] | np.ndarray, cutoff: float, pad_s: float,
                      fs: float) -> list[np.ndarray]:
    """Binary mask of ``z > cutoff`` with every run widened by ``round(pad_s * fs)`` samples.

    Accepts one trace or a sequence of per-trial traces and always returns a
    list.  Padding is clamped to the trial and overlapping runs merge.
    """
    if not cutoff > 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    if isinstance(z, np.ndarray) and z.ndim == 1:
        z = [z]
    pad = pad_samples(pad_s, fs)
    out = []
    for trace in z:
        mask = np.asarray(trace) > cutoff
        if pad and mask.any():
            mask = ndimage.binary_dilation(mask, structure=np.ones(2 * pad + 1, dtype=bool))
        out.append(mask.astype(float))
    return out


def create_msf(rec: Recording, cfg: DetectConfig = DetectConfig()) -> Msf:
    z = zvalue_trace(rec, cfg)
    masks = threshold_and_pad(z, cfg.cutoff, cfg.artifact_pad_s, rec.fs)
    return Msf(tuple(masks), rec.fs, cfg.channels)


def msf_to_weights(msf: Msf, mode: str = "binary", ramp_s: float = 0.0) -> Msf:
    """Turn a binary MSF into a weighting function.

    ``mode="linear_ramp"`` adds ``n = round(ramp_s * fs)`` samples of linear
    ramp outside each flagged run, with weight ``1 - d / (n + 1)`` at distance
    ``d`` from the run.  Where ramps from neighbouring runs overlap the larger
    weight wins.
    """
    if not msf.is_binary:
        raise ValueError("msf_to_weights expects a binary MSF")
    if mode == "binary":
        return msf
    if mode != "linear_ramp":
        raise ValueError(f"unknown weighting mode {mode!r}")
    n = pad_samples(ramp_s, msf.fs)
    out = []
    for w in msf.trials:
        flagged = w > 0
        if n == 0 or not flagged.any():
            out.append(w.copy())
            continue
        dist = ndimage.distance_transform_edt(~flagged)
        out.append(np.clip(1.0 - dist / (n + 1), 0.0, 1.0))
    return Msf(tuple(out), msf.fs, msf.source_channels)


def save_msf(msf: Msf, path: str | Path) -> Path:
    """One CSV row of weights per trial, preceded by a ``#`` metadata line."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# fs={msf.fs!r} channels={'|'.join(msf.source_channels)}\n")
        w = csv.writer(fh, lineterminator="\n")
        for trial in msf.trials:
            w.writerow([repr(float(v)) for v in trial])
    return path


def load_msf(path: str | Path, fs: float | None = None) -> Msf:
    """Read an MSF written by :func:`save_msf` or produced by another detector.

    Without a metadata line ``fs`` must be supplied.
    """
    meta: dict[str, str] = {}
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for item in line[1:].split():
                    key, _, value = item.partition("=")
                    meta[key] = value
                continue
            try:
                rows.append(np.array([float(v) for v in line.split(",")]))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric MSF weight") from None
    if fs is None:
        if "fs" not in meta:
            raise ValueError(f"{path}: no fs in file; pass fs explicitly")
        fs = float(meta["fs"])
    channels = tuple(c for c in meta.get("channels", "").split("|") if c)
    return Msf(tuple(rows), fs, channels)
