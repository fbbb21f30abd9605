"""BrainVision (.vhdr/.vmrk/.eeg) reader and writer.

Only binary data in INT_16 or IEEE_FLOAT_32, multiplexed or vectorized, is
supported.
"""

from __future__ import annotations

import configparser
from pathlib import Path
from typing import Sequence

import numpy as np

from .recording import Recording, concatenate_trials, trial_offsets

_DTYPES = {"INT_16": np.dtype("<i2"), "IEEE_FLOAT_32": np.dtype("<f4")}
_UNIT_SCALE = {"µv": 1.0, "μv": 1.0, "uv": 1.0, "": 1.0, "nv": 1e-3, "mv": 1e3, "v": 1e6}


class BrainVisionError(ValueError):
    """Malformed or unsupported BrainVision file."""


def _read_ini(path: Path) -> configparser.ConfigParser:
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        text = raw.decode("latin-1")
    # the identification line precedes the first section
    start = text.find("[")
    if start < 0:
        raise BrainVisionError(f"{path}: no sections found")
    cp = configparser.ConfigParser(interpolation=None, strict=False)
    cp.optionxform = str
    try:
        cp.read_string(text[start:])
    except configparser.Error as exc:
        raise BrainVisionError(f"{path}: {exc}") from exc
    return cp


def _get(cp: configparser.ConfigParser, section: str, key: str, path: Path, default=None) -> str:
    try:
        return cp[section][key].strip()
    except KeyError:
        if default is not None:
            return default
        raise BrainVisionError(f"{path}: missing [{section}] {key}") from None


def _channel_infos(cp, n_channels: int, path: Path) -> tuple[list[str], np.ndarray]:
    labels, scale = [], []
    for i in range(1, n_channels + 1):
        entry = _get(cp, "Channel Infos", f"Ch{i}", path)
        parts = [p.replace(r"\1", ",") for p in entry.split(",")]
        name = parts[0]
        try:
            res = float(parts[2]) if len(parts) > 2 and parts[2].strip() else 1.0
        except ValueError:
            raise BrainVisionError(f"{path}: bad resolution in Ch{i}={entry}") from None
        unit = parts[3].strip().lower() if len(parts) > 3 else ""
        if unit not in _UNIT_SCALE:
            raise BrainVisionError(f"{path}: unknown unit {parts[3]!r} for Ch{i}")
        labels.append(name)
        scale.append(res * _UNIT_SCALE[unit])
    return labels, np.array(scale)


def read_markers(vmrk_path: str | Path) -> list[tuple[str, str, int, int]]:
    """Markers as ``(type, description, position, size)`` with 0-based positions."""
    path = Path(vmrk_path)
    cp = _read_ini(path)
    if "Marker Infos" not in cp:
        return []
    out = []
    for key, value in cp["Marker Infos"].items():
        if not key.lower().startswith("mk"):
            continue
        parts = value.split(",")
        if len(parts) < 4:
            raise BrainVisionError(f"{path}: malformed marker {key}={value}")
        try:
            pos, size = int(parts[2]), int(parts[3] or 1)
        except ValueError:
            raise BrainVisionError(f"{path}: malformed marker {key}={value}") from None
        out.append((parts[0].strip(), parts[1].replace(r"\1", ","), pos - 1, size))
    return out


def _segments(markers, n_total: int) -> list[tuple[int, int]]:
    starts = sorted({pos for typ, _, pos, _ in markers if typ == "New Segment" and 0 <= pos < n_total})
    if starts:
        if starts[0] != 0:
            starts.insert(0, 0)
        bounds = starts + [n_total]
        return [(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
    epochs = [(pos, pos + size) for typ, _, pos, size in markers
              if typ == "Stimulus" and size > 1 and 0 <= pos and pos + size <= n_total]
    if epochs:
        return sorted(epochs)
    return [(0, n_total)]


def load_brainvision(header_path: str | Path, eog_labels: Sequence[str] | None = None) -> Recording:
    """Load a BrainVision recording.

    Trials come from the marker file: every "New Segment" marker starts a new
    trial; without any, each Stimulus marker spanning more than one sample
    becomes a trial; otherwise the whole file is one trial.
    """
    path = Path(header_path)
    if not path.is_file():
        raise FileNotFoundError(f"header file not found: {path}")
    cp = _read_ini(path)
    data_file = path.parent / _get(cp, "Common Infos", "DataFile", path)
    fmt = _get(cp, "Common Infos", "DataFormat", path, "BINARY").upper()
    if fmt != "BINARY":
        raise BrainVisionError(f"{path}: unsupported DataFormat {fmt}")
    orientation = _get(cp, "Common Infos", "DataOrientation", path, "MULTIPLEXED").upper()
    if orientation not in ("MULTIPLEXED", "VECTORIZED"):
        raise BrainVisionError(f"{path}: unsupported DataOrientation {orientation}")
    try:
        n_ch = int(_get(cp, "Common Infos", "NumberOfChannels", path))
        interval = float(_get(cp, "Common Infos", "SamplingInterval", path))
    except ValueError as exc:
        raise BrainVisionError(f"{path}: {exc}") from None
    if n_ch < 1 or interval <= 0:
        raise BrainVisionError(f"{path}: invalid channel count or sampling interval")
    code = _get(cp, "Binary Infos", "BinaryFormat", path).upper()
    if code not in _DTYPES:
        raise BrainVisionError(f"{path}: unsupported BinaryFormat {code}")
    labels, scale = _channel_infos(cp, n_ch, path)

    if not data_file.is_file():
        raise FileNotFoundError(f"data file referenced by {path.name} not found: {data_file}")
    dtype = _DTYPES[code]
    raw = data_file.read_bytes()
    if len(raw) == 0 or len(raw) % (dtype.itemsize * n_ch):
        raise BrainVisionError(
            f"{data_file}: {len(raw)} bytes is not a whole number of {n_ch}-channel {code} samples")
    flat = np.frombuffer(raw, dtype=dtype).astype(float)
    n_total = flat.size // n_ch
    if orientation == "MULTIPLEXED":
        data = flat.reshape(n_total, n_ch).T
    else:
        data = flat.reshape(n_ch, n_total)
    data = data * scale[:, None]

    markers = []
    marker_name = cp["Common Infos"].get("MarkerFile", "").strip() if "Common Infos" in cp else ""
    if marker_name and (path.parent / marker_name).is_file():
        markers = read_markers(path.parent / marker_name)
    trials = tuple(data[:, a:b] for a, b in _segments(markers, n_total))
    return Recording(tuple(labels), 1e6 / interval, trials, eog_labels=eog_labels)


def write_brainvision(rec: Recording, header_path: str | Path, binary_format: str = "IEEE_FLOAT_32",
                      resolution: float = 1.0) -> Path:
    """Write a multiplexed BrainVision triplet; trial starts become New Segment markers."""
    path = Path(header_path)
    if binary_format not in _DTYPES:
        raise BrainVisionError(f"unsupported BinaryFormat {binary_format}")
    stem = path.stem
    data = concatenate_trials(rec) / resolution
    if binary_format == "INT_16":
        data = np.clip(np.round(data), -32768, 32767)
    data.T.astype(_DTYPES[binary_format]).tofile(path.with_suffix(".eeg"))
    interval = 1e6 / rec.fs
    chans = "\n".join(f"Ch{i + 1}={lab.replace(',', chr(92) + '1')},,{resolution!r},µV"
                      for i, lab in enumerate(rec.labels))
    path.write_text(
        "Brain Vision Data Exchange Header File Version 1.0\n\n"
        "[Common Infos]\n"
        f"DataFile={stem}.eeg\nMarkerFile={stem}.vmrk\n"
        "DataFormat=BINARY\nDataOrientation=MULTIPLEXED\n"
        f"NumberOfChannels={rec.n_channels}\nSamplingInterval={interval!r}\n\n"
        f"[Binary Infos]\nBinaryFormat={binary_format}\n\n"
        f"[Channel Infos]\n{chans}\n",
        encoding="utf-8",
    )
    marks = "\n".join(f"Mk{i + 1}=New Segment,,{start + 1},1,0"
                      for i, start in enumerate(trial_offsets(rec.trial_lengths)[:-1]))
    path.with_suffix(".vmrk").write_text(
        "Brain Vision Data Exchange Marker File, Version 1.0\n\n"
        f"[Common Infos]\nDataFile={stem}.eeg\n\n[Marker Infos]\n{marks}\n",
        encoding="utf-8",
    )
    return path
