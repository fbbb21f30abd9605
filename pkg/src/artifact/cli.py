"""Batch command line: ``synth``, ``detect``, ``clean`` and ``report``.

Settings come from an optional ``key = value`` config file using the
FieldTrip-style names (``channel``, ``refchannel``, ``demean``, ``lpfreq``,
...); command-line flags override the file.

Exit status: 0 success, 1 bad configuration, 2 input/output failure,
3 processing failure.  Errors print one ``error: ...`` line to stderr.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .brainvision import BrainVisionError, load_brainvision, write_brainvision
from .ica import save_model
from .methods import MethodOptions, run_method
from .msf import DetectConfig, Msf, create_msf, load_msf, save_msf
from .preprocess import PreprocessConfig, preprocess_pipeline
from .recording import load_csv, select_channels, split_trials, write_csv
from .report import (correlation_svg, emit_correlation_report, emit_signal_plot, read_correlation_csv,
                     write_correlation_csv)
from .selection import save_report
from .synth import BlinkSpec, SynthSpec, synth_contaminated_recording

OUTPUT_ENV = "ARTIFACT_OUTPUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_PIPELINE = 0, 1, 2, 3

log = logging.getLogger("artifact")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


KEYS = {
    "dataset": str, "format": str, "fs": float, "channel": str, "refchannel": str,
    "demean": "bool", "detrend": "bool",
    "lpfilter": "bool", "lpfreq": float, "lpfilttype": str, "lpfiltdir": str,
    "hpfilter": "bool", "hpfreq": float, "hpfilttype": str, "hpfiltdir": str,
    "method": int, "seed": int, "max_iter": int, "tol": float, "n_mad": float, "include_eog": "bool",
    "eog": str, "cutoff": float, "bpfreq": str, "bporder": int,
    "artfctpadding": float, "trlpadding": float, "output_dir": str,
}


def _coerce(key: str, value):
    kind = KEYS[key]
    if kind == "bool":
        if isinstance(value, bool):
            return value
        v = str(value).strip().lower()
        if v in ("yes", "true", "1", "on"):
            return True
        if v in ("no", "false", "0", "off"):
            return False
        raise ConfigError(f"{key}: expected yes/no, got {value!r}")
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot parse {value!r}") from None


def read_config(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` and ``%`` start comments, ``cfg.`` prefixes and quotes are ignored."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    cfg = {}
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].split("%", 1)[0].strip().rstrip(";")
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().removeprefix("cfg.")
        if not sep:
            raise ConfigError(f"{path}:{n}: expected key = value")
        if key not in KEYS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        value = value.strip().strip("'\"{}").replace("'", "")
        cfg[key] = _coerce(key, value)
    return cfg


def _merge(args: argparse.Namespace) -> dict:
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    for key in KEYS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = _coerce(key, v)
    return cfg


def _list(value: str | None) -> list[str]:
    return [v.strip() for v in (value or "").split(",") if v.strip()]


def preprocess_config(cfg: dict) -> PreprocessConfig:
    for kind in ("lpfilttype", "hpfilttype"):
        if cfg.get(kind, "fir") != "fir":
            raise ConfigError(f"{kind}: only 'fir' is supported")
    dirs = {cfg[k] for k in ("lpfiltdir", "hpfiltdir") if k in cfg}
    if len(dirs) > 1:
        raise ConfigError("lpfiltdir and hpfiltdir must agree")
    direction = dirs.pop() if dirs else "twopass"
    lp = cfg.get("lpfreq") if cfg.get("lpfilter", "lpfreq" in cfg) else None
    hp = cfg.get("hpfreq") if cfg.get("hpfilter", "hpfreq" in cfg) else None
    if direction not in ("onepass", "twopass"):
        raise ConfigError(f"filter direction must be onepass or twopass, not {direction!r}")
    return PreprocessConfig(demean=cfg.get("demean", False), detrend=cfg.get("detrend", False),
                            ref_label=cfg.get("refchannel"), lp_cutoff=lp, hp_cutoff=hp,
                            filter_direction=direction)


def detect_config(cfg: dict) -> DetectConfig:
    kw = {}
    if "eog" in cfg:
        kw["channels"] = tuple(_list(cfg["eog"]))
    if "cutoff" in cfg:
        kw["cutoff"] = cfg["cutoff"]
    if "bpfreq" in cfg:
        band = _list(cfg["bpfreq"])
        try:
            kw["band"] = (float(band[0]), float(band[1]))
        except (IndexError, ValueError):
            raise ConfigError(f"bpfreq: expected 'low,high', got {cfg['bpfreq']!r}") from None
    if "bporder" in cfg:
        kw["order"] = cfg["bporder"]
    if "artfctpadding" in cfg:
        kw["artifact_pad_s"] = cfg["artfctpadding"]
    if "trlpadding" in cfg:
        kw["trial_pad_s"] = cfg["trlpadding"]
    try:
        return DetectConfig(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def method_options(cfg: dict) -> MethodOptions:
    kw = {k: cfg[k] for k in ("seed", "max_iter", "tol", "n_mad") if k in cfg}
    if "include_eog" in cfg:
        kw["include_eog_in_ica"] = cfg["include_eog"]
    return MethodOptions(**kw)


def load_input(path: str | Path, cfg: dict):
    path = Path(path)
    fmt = cfg.get("format") or ("brainvision" if path.suffix.lower() == ".vhdr" else "csv")
    if fmt == "brainvision":
        rec = load_brainvision(path)
    elif fmt == "csv":
        if "fs" not in cfg:
            raise ConfigError("CSV input needs a sampling rate (--fs or fs = ...)")
        rec = load_csv(path, cfg["fs"])
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    if "channel" in cfg:
        rec = select_channels(rec, _list(cfg["channel"]))
    return preprocess_pipeline(rec, preprocess_config(cfg))


def _output_dir(args, cfg: dict) -> Path:
    out = args.out or cfg.get("output_dir") or os.environ.get(OUTPUT_ENV)
    if not out:
        raise ConfigError(f"no output directory (use --out or set {OUTPUT_ENV})")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _inputs(args, cfg: dict) -> list[str]:
    inputs = list(args.input or [])
    if not inputs and "dataset" in cfg:
        inputs = [cfg["dataset"]]
    if not inputs:
        raise ConfigError("no input given (use --input or dataset = ...)")
    return inputs


def _per_input(inputs, out: Path, fn):
    """Run ``fn(path, out_dir)`` for every input; several inputs get their own subdirectories."""
    if len(inputs) == 1:
        return [fn(inputs[0], out)]
    dirs = []
    for p in inputs:
        d = out / Path(p).stem
        if d in dirs:
            raise ConfigError(f"inputs share the output name {d.name!r}")
        d.mkdir(parents=True, exist_ok=True)
        dirs.append(d)
    with ThreadPoolExecutor() as pool:
        return list(pool.map(fn, inputs, dirs))


def cmd_synth(args) -> int:
    cfg = _merge(args)
    out = _output_dir(args, cfg)
    spec = SynthSpec(n_channels=args.channels, fs=args.fs or 500.0, duration_s=args.duration,
                     n_sources=args.channels - 1, seed=cfg.get("seed", 0), n_trials=args.trials,
                     blink=BlinkSpec(count=args.blinks))
    rec, truth = synth_contaminated_recording(spec)
    if args.format == "csv":
        write_csv(rec, out / "synth.csv")
    else:
        write_brainvision(rec, out / "synth.vhdr")
    mask = Msf((truth.blink_mask.astype(float),), rec.fs, ("truth",))
    save_msf(mask, out / "truth_msf.csv")
    return EXIT_OK


def cmd_detect(args) -> int:
    cfg = _merge(args)
    out = _output_dir(args, cfg)
    det = detect_config(cfg)

    def run(path, dest):
        rec = load_input(path, cfg)
        save_msf(create_msf(rec, det), dest / "msf.csv")

    _per_input(_inputs(args, cfg), out, run)
    return EXIT_OK


def _plot_channels(rec, requested) -> list[str]:
    if requested:
        return requested
    preferred = [c for c in ("Fp1", "Fz") if c in rec.labels]
    if preferred:
        return preferred
    return [c for c in rec.labels if c not in rec.eog_labels][:2]


def cmd_clean(args) -> int:
    cfg = _merge(args)
    out = _output_dir(args, cfg)
    method = cfg.get("method", 1)
    if method not in (1, 2, 3):
        raise ConfigError(f"method must be 1, 2 or 3, not {method}")
    opts = method_options(cfg)
    det = detect_config(cfg)

    def run(path, dest):
        rec = load_input(path, cfg)
        msf = None
        if method in (2, 3):
            msf = load_msf(args.msf) if args.msf else create_msf(rec, det)
            save_msf(msf, dest / "msf.csv")
        result = run_method(method, rec, msf, opts)
        write_csv(result.cleaned, dest / "cleaned.csv")
        save_report(result.report_before, dest / "correlation_detail.csv")
        save_model(result.model, dest / "ica_model.txt")
        if not args.fig:
            write_correlation_csv(result, dest / "correlation.csv")
        else:
            emit_correlation_report(result, dest)
            span = rec.n_samples / rec.fs
            emit_signal_plot(rec, result.cleaned, _plot_channels(rec, _list(args.channels)),
                             (0.0, min(span, 10.0)), dest, msf=msf)
        return result

    _per_input(_inputs(args, cfg), out, run)
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = _merge(args)
    run_dir = Path(args.run)
    corr = run_dir / "correlation.csv"
    if not corr.is_file():
        raise FileNotFoundError(f"no correlation.csv in {run_dir}")
    before, after, selected = read_correlation_csv(corr)
    (run_dir / "correlation.svg").write_text(correlation_svg(before, after, selected), encoding="utf-8")
    finite = after[after == after]
    with open(run_dir / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n_components", "n_selected", "abs_sum_before", "abs_sum_after"])
        w.writerow([len(before), len(selected), repr(float(before.sum())), repr(float(finite.sum()))])
    if args.input:
        original = load_input(args.input[0], cfg)
        cleaned = load_csv(run_dir / "cleaned.csv", original.fs)
        cleaned = cleaned.with_trials(split_trials(cleaned.trials[0], original.trial_lengths))
        msf = load_msf(run_dir / "msf.csv") if (run_dir / "msf.csv").is_file() else None
        window = [float(v) for v in _list(args.window)] or [0.0, min(original.n_samples / original.fs, 10.0)]
        if len(window) != 2:
            raise ConfigError("--window expects 't0,t1'")
        emit_signal_plot(original, cleaned, _plot_channels(original, _list(args.channels)),
                         tuple(window), run_dir, msf=msf)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="artifact", description="Ocular artifact removal for EEG via ICA.")
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, inputs=True):
        sp.add_argument("--config", help="key = value settings file")
        sp.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV})")
        sp.add_argument("--seed", type=int)
        if inputs:
            sp.add_argument("--input", nargs="+", help="BrainVision .vhdr or CSV file(s)")
            sp.add_argument("--format", choices=("brainvision", "csv"))
            sp.add_argument("--fs", type=float, help="sampling rate for CSV input")
            sp.add_argument("--channel", help="channel pattern, e.g. 'all,-Audio'")
            sp.add_argument("--refchannel")
            sp.add_argument("--demean", choices=("yes", "no"))
            sp.add_argument("--detrend", choices=("yes", "no"))
            sp.add_argument("--lpfreq", type=float)
            sp.add_argument("--hpfreq", type=float)
            sp.add_argument("--lpfiltdir", choices=("onepass", "twopass"))
            sp.add_argument("--hpfiltdir", choices=("onepass", "twopass"))
            sp.add_argument("--eog", help="detection channels, comma separated")
            sp.add_argument("--cutoff", type=float, help="z-value threshold")
            sp.add_argument("--bpfreq", help="detection band 'low,high' in Hz")
            sp.add_argument("--bporder", type=int)
            sp.add_argument("--artfctpadding", type=float, help="artifact padding in seconds")

    s = sub.add_parser("synth", help="write a synthetic blink-contaminated dataset")
    common(s, inputs=False)
    s.add_argument("--format", choices=("brainvision", "csv"), default="brainvision")
    s.add_argument("--fs", type=float)
    s.add_argument("--channels", type=int, default=8, help="number of EEG channels")
    s.add_argument("--duration", type=float, default=20.0)
    s.add_argument("--blinks", type=int, default=5)
    s.add_argument("--trials", type=int, default=1)
    s.set_defaults(func=cmd_synth)

    d = sub.add_parser("detect", help="write the artifact membership function")
    common(d)
    d.set_defaults(func=cmd_detect)

    c = sub.add_parser("clean", help="remove ocular artifacts")
    common(c)
    c.add_argument("--method", type=int, choices=(1, 2, 3))
    c.add_argument("--msf", help="use this MSF file instead of detecting artifacts")
    c.add_argument("--fig", action="store_true", help="also write correlation and signal SVGs")
    c.add_argument("--channels", help="channels for the signal plot, e.g. 'Fp1,Fz'")
    c.add_argument("--max-iter", dest="max_iter", type=int)
    c.add_argument("--include-eog", dest="include_eog", action="store_const", const="yes")
    c.set_defaults(func=cmd_clean)

    r = sub.add_parser("report", help="redraw figures for a finished clean run")
    common(r)
    r.add_argument("--run", required=True, help="output directory of a clean run")
    r.add_argument("--channels", help="channels for the signal plot")
    r.add_argument("--window", help="'t0,t1' in seconds")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s: %(message)s")
    logging.captureWarnings(True)
    try:
        return args.func(args)
    except ConfigError as exc:
        code, msg = EXIT_CONFIG, str(exc)
    except (OSError, BrainVisionError) as exc:
        code, msg = EXIT_IO, str(exc)
    except Exception as exc:  # any processing failure maps to one exit code
        code, msg = EXIT_PIPELINE, str(exc) or type(exc).__name__
    print(f"error: {msg.splitlines()[0] if msg else 'failed'}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
