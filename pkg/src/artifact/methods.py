"""The three ocular-artifact removal methods.

1. ``method1_full_removal``: drop EOG-like components everywhere.
2. ``method2_partial_removal``: drop them only where the MSF flags artifacts.
3. ``method3_artifact_free_unmixing``: as 2, but the unmixing matrix is
   learned from artifact-free samples only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass


from .ica import IcaModel, apply_unmixing, fit_recording, reconstruct, reconstruct_partial
from .msf import Msf
from .recording import DEFAULT_EOG, ChannelError, Recording, select_channels
from .selection import CorrelationReport, correlation_report

log = logging.getLogger(__name__)

METHODS = {1: "full_removal", 2: "partial_removal", 3: "artifact_free_unmixing"}


@dataclass(frozen=True)
class MethodOptions:
    seed: int = 42
    max_iter: int = 500
    tol: float = 1e-6
    n_mad: float = 3.0
    include_eog_in_ica: bool = False
    n_components: int | None = None


@dataclass(frozen=True, eq=False)
class CleanResult:
    cleaned: Recording
    method: str
    report_before: CorrelationReport
    report_after: CorrelationReport
    model: IcaModel
    msf: Msf | None = None

    @property
    def selected(self) -> frozenset[int]:
        return self.report_before.selected


def eog_channels(rec: Recording) -> tuple[str, ...]:
    if not rec.eog_labels:
        raise ChannelError(f"recording has no EOG channels; expected any of {', '.join(DEFAULT_EOG)} "
                           f"(channels present: {', '.join(rec.labels)})")
    return rec.eog_labels


def model_channels(rec: Recording, opts: MethodOptions) -> tuple[str, ...]:
    eog = set(eog_channels(rec))
    labels = rec.labels if opts.include_eog_in_ica else tuple(l for l in rec.labels if l not in eog)
    if len(labels) < 2:
        raise ChannelError(f"need at least 2 EEG channels for ICA, found {len(labels)}")
    return labels


def _fit(rec: Recording, opts: MethodOptions, keep=None) -> IcaModel:
    model = fit_recording(rec, model_channels(rec, opts), seed=opts.seed, max_iter=opts.max_iter,
                          tol=opts.tol, n_components=opts.n_components, keep=keep)
    if not model.convergence.converged:
        log.warning("ICA did not converge; results may be unreliable")
    return model


def _report_after(cleaned: Recording, eog: Recording, opts: MethodOptions) -> CorrelationReport:
    """Re-decompose the cleaned data with the same seed and correlate against EOG."""
    after = fit_recording(cleaned, model_channels(cleaned, opts), seed=opts.seed,
                          max_iter=opts.max_iter, tol=opts.tol)
    return correlation_report(eog, apply_unmixing(after, cleaned), opts.n_mad)


def method1_full_removal(rec: Recording, opts: MethodOptions = MethodOptions()) -> CleanResult:
    eog = select_channels(rec, eog_channels(rec))
    model = _fit(rec, opts)
    comps = apply_unmixing(model, rec)
    before = correlation_report(eog, comps, opts.n_mad)
    cleaned = reconstruct(model, comps, before.selected, rec)
    return CleanResult(cleaned, METHODS[1], before, _report_after(cleaned, eog, opts), model)


def method2_partial_removal(rec: Recording, msf: Msf, opts: MethodOptions = MethodOptions()) -> CleanResult:
    msf.check_matches(rec)
    eog = select_channels(rec, eog_channels(rec))
    model = _fit(rec, opts)
    comps = apply_unmixing(model, rec)
    before = correlation_report(eog, comps, opts.n_mad)
    cleaned = reconstruct_partial(model, comps, before.selected, msf, rec)
    return CleanResult(cleaned, METHODS[2], before, _report_after(cleaned, eog, opts), model, msf)


def ica_from_artifact_free_data(rec: Recording, msf: Msf, opts: MethodOptions = MethodOptions()) -> IcaModel:
    """Fit ICA on the samples the MSF leaves untouched.

    Any sample with a non-zero weight is excluded from training, which for a
    binary MSF means exactly the flagged samples.  The model mean is the mean
    of the retained samples.
    """
    msf.check_matches(rec)
    keep = msf.concatenated() == 0
    n_keep = int(keep.sum())
    n_ch = len(model_channels(rec, opts))
    if n_keep == 0:
        raise ValueError("the MSF flags every sample; no artifact-free data left to train ICA")
    if n_keep < 10 * n_ch:
        raise ValueError(f"only {n_keep} artifact-free samples for {n_ch} channels; need at least {10 * n_ch}")
    return _fit(rec, opts, keep=keep)


def method3_artifact_free_unmixing(rec: Recording, msf: Msf,
                                   opts: MethodOptions = MethodOptions()) -> CleanResult:
    eog = select_channels(rec, eog_channels(rec))
    model = ica_from_artifact_free_data(rec, msf, opts)
    comps = apply_unmixing(model, rec)
    before = correlation_report(eog, comps, opts.n_mad)
    cleaned = reconstruct_partial(model, comps, before.selected, msf, rec)
    return CleanResult(cleaned, METHODS[3], before, _report_after(cleaned, eog, opts), model, msf)


def run_method(method: int, rec: Recording, msf: Msf | None = None,
               opts: MethodOptions = MethodOptions()) -> CleanResult:
    if method == 1:
        return method1_full_removal(rec, opts)
    if method not in (2, 3):
        raise ValueError(f"method must be 1, 2 or 3, not {method!r}")
    if msf is None:
        raise ValueError(f"method {method} needs an MSF")
    fn = method2_partial_removal if method == 2 else method3_artifact_free_unmixing
    return fn(rec, msf, opts)
