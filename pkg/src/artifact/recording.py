"""Trial-segmented multichannel recordings and CSV ingestion."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_EOG = ("VEOG", "HEOG")


class ChannelError(ValueError):
    """A requested channel label is absent from a recording."""


@dataclass(frozen=True)
class TrialIndex:
    trial: int
    sample: int


@dataclass(frozen=True, eq=False)
class Recording:
    """Labeled multichannel time series split into trials.

    Each trial is an ``(n_channels, n_samples)`` array in microvolts.  Trial
    arrays are stored read-only so a Recording can be shared freely.

    ``eog_labels`` defaults to whichever of VEOG/HEOG are present; passing it
    explicitly requires every name to be a channel label.
    """

    labels: tuple[str, ...]
    fs: float
    trials: tuple[np.ndarray, ...]
    eog_labels: tuple[str, ...] | None = None
    ref_label: str | None = None

    def __post_init__(self):
        labels = tuple(str(lab) for lab in self.labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate channel labels in {labels}")
        fs = float(self.fs)
        if not fs > 0:
            raise ValueError(f"sampling rate must be positive, got {fs}")
        trials = []
        for i, tr in enumerate(self.trials):
            arr = np.array(tr, dtype=float)
            if arr.ndim != 2 or arr.shape[0] != len(labels):
                raise ValueError(
                    f"trial {i} has shape {arr.shape}, expected ({len(labels)}, n_samples)")
            if arr.shape[1] < 1:
                raise ValueError(f"trial {i} is empty")
            arr.setflags(write=False)
            trials.append(arr)
        if not trials:
            raise ValueError("a recording needs at least one trial")
        if self.eog_labels is None:
            eog = tuple(lab for lab in DEFAULT_EOG if lab in labels)
        else:
            eog = tuple(self.eog_labels)
            missing = [lab for lab in eog if lab not in labels]
            if missing:
                raise ChannelError(f"EOG labels not in recording: {missing}")
        if self.ref_label is not None and self.ref_label not in labels:
            raise ChannelError(f"reference label {self.ref_label!r} not in recording")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "fs", fs)
        object.__setattr__(self, "trials", tuple(trials))
        object.__setattr__(self, "eog_labels", eog)

    @property
    def n_channels(self) -> int:
        return len(self.labels)

    @property
    def n_trials(self) -> int:
        return len(self.trials)

    @property
    def trial_lengths(self) -> tuple[int, ...]:
        return tuple(tr.shape[1] for tr in self.trials)

    @property
    def n_samples(self) -> int:
        return sum(self.trial_lengths)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ChannelError(f"channel {label!r} not in recording") from None

    def indices(self, labels: Iterable[str]) -> list[int]:
        labels = list(labels)
        missing = [lab for lab in labels if lab not in self.labels]
        if missing:
            raise ChannelError(f"channels not in recording: {', '.join(missing)}")
        return [self.labels.index(lab) for lab in labels]

    def with_trials(self, trials: Sequence[np.ndarray]) -> "Recording":
        """Same metadata, new data (shapes are re-validated)."""
        return replace(self, trials=tuple(trials))

    def channel(self, label: str) -> np.ndarray:
        """One channel concatenated over trials."""
        i = self.index(label)
        return np.concatenate([tr[i] for tr in self.trials])

    def equals(self, other: "Recording") -> bool:
        return (
            self.labels == other.labels
            and self.fs == other.fs
            and self.eog_labels == other.eog_labels
            and self.ref_label == other.ref_label
            and self.trial_lengths == other.trial_lengths
            and all(np.array_equal(a, b) for a, b in zip(self.trials, other.trials))
        )


def concatenate_trials(rec: Recording) -> np.ndarray:
    """Stack trials column-wise into an ``(n_channels, total_samples)`` matrix.

    Use :func:`trial_offsets` / :func:`split_trials` to go back.
    """
    return np.concatenate(rec.trials, axis=1)


def trial_offsets(lengths: Sequence[int]) -> np.ndarray:
    """Start column of every trial plus the total length as a final entry."""
    return np.concatenate([[0], np.cumsum(lengths)]).astype(int)


def split_trials(X: np.ndarray, lengths: Sequence[int]) -> list[np.ndarray]:
    X = np.asarray(X)
    if X.shape[-1] != sum(lengths):
        raise ValueError(f"{X.shape[-1]} columns cannot be split into trials of {tuple(lengths)}")
    return np.split(X, trial_offsets(lengths)[1:-1], axis=-1)


def global_column(lengths: Sequence[int], idx: TrialIndex) -> int:
    if not 0 <= idx.trial < len(lengths) or not 0 <= idx.sample < lengths[idx.trial]:
        raise IndexError(f"{idx} outside trial structure {tuple(lengths)}")
    return int(trial_offsets(lengths)[idx.trial]) + idx.sample


def trial_index(lengths: Sequence[int], column: int) -> TrialIndex:
    offsets = trial_offsets(lengths)
    if not 0 <= column < offsets[-1]:
        raise IndexError(f"column {column} outside 0..{offsets[-1] - 1}")
    t = int(np.searchsorted(offsets, column, side="right")) - 1
    return TrialIndex(t, int(column - offsets[t]))


def select_channels(rec: Recording, pattern: Sequence[str]) -> Recording:
    """Restrict a recording to the channels matched by ``pattern``.

    ``"all"`` starts from every channel, a bare name adds that channel and
    ``"-name"`` removes it.  Excluding an absent channel is ignored; including
    one that is not also excluded is an error.  Row order follows the recording.
    """
    if isinstance(pattern, str):
        pattern = [pattern]
    keep: set[str] = set()
    drop: set[str] = set()
    for item in pattern:
        if item == "all":
            keep.update(rec.labels)
        elif item.startswith("-"):
            drop.add(item[1:])
        else:
            keep.add(item)
    missing = sorted(keep - set(rec.labels) - drop)
    if missing:
        raise ChannelError(f"channel {missing[0]!r} not in recording")
    chosen = [i for i, lab in enumerate(rec.labels) if lab in keep and lab not in drop]
    if not chosen:
        raise ChannelError(f"pattern {list(pattern)} selects no channels")
    labels = tuple(rec.labels[i] for i in chosen)
    return Recording(
        labels=labels,
        fs=rec.fs,
        trials=tuple(tr[chosen] for tr in rec.trials),
        eog_labels=tuple(lab for lab in rec.eog_labels if lab in labels),
        ref_label=rec.ref_label if rec.ref_label in labels else None,
    )


def _parse_row(row: list[str], lineno: int) -> list[float]:
    out = []
    for cell in row:
        try:
            out.append(float(cell))
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric cell {cell!r}") from None
    return out


def load_csv(
    path: str | Path,
    fs: float,
    labels: Sequence[str] | None = None,
    channels_as: str = "columns",
    eog_labels: Sequence[str] | None = None,
) -> Recording:
    """Read a comma-separated table as a single-trial recording.

    Parameters
    ----------
    path : str or Path
    fs : float
        Sampling rate in Hz.
    labels : sequence of str, optional
        Channel names.  When omitted, a non-numeric first row is taken as the
        label header (``channels_as="columns"`` only), otherwise channels are
        named ``Ch1``, ``Ch2``...
    channels_as : {"columns", "rows"}
        Whether each column or each row of the table is a channel.
    """
    if channels_as not in ("columns", "rows"):
        raise ValueError(f"channels_as must be 'columns' or 'rows', not {channels_as!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValueError(f"{path}: empty table")
    header = None
    try:
        _parse_row(rows[0], 1)
    except ValueError:
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ValueError(f"{path}: header but no data") from None
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ValueError(f"{path}: ragged table, row {i + 1} has {len(r)} cells, expected {width}")
    start = 2 if header else 1
    data = np.array([_parse_row(r, i + start) for i, r in enumerate(rows)], dtype=float)
    if channels_as == "columns":
        data = data.T
    if labels is None:
        if header is not None and channels_as == "columns":
            labels = header
        else:
            labels = [f"Ch{i + 1}" for i in range(data.shape[0])]
    if len(labels) != data.shape[0]:
        raise ValueError(f"{len(labels)} labels given for {data.shape[0]} channels")
    return Recording(tuple(labels), fs, (data,), eog_labels=eog_labels)


def write_csv(rec: Recording | np.ndarray, path: str | Path, labels: Sequence[str] | None = None) -> Path:
    """Write channels as columns with a label header; trials are concatenated.

    Floats are written with ``repr`` so loading reproduces them exactly.
    """
    if isinstance(rec, Recording):
        data = concatenate_trials(rec)
        labels = rec.labels if labels is None else labels
    else:
        data = np.atleast_2d(np.asarray(rec, dtype=float))
        labels = labels or [f"Ch{i + 1}" for i in range(data.shape[0])]
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(labels)
        for col in data.T:
            w.writerow([repr(float(v)) for v in col])
    return path
