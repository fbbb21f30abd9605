"""Similarity between components and EOG, and outlier-based component selection."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .recording import Recording, concatenate_trials

MAD_SCALE = 1.4826


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    """EOG x component correlations and the components chosen for removal."""

    matrix: np.ndarray
    abs_sums: np.ndarray
    sorted_order: tuple[int, ...]
    selected: frozenset[int]
    cutoff_rule: str
    eog_labels: tuple[str, ...] = ()

    @property
    def total(self) -> float:
        """Sum of |correlation| over every EOG channel and component."""
        return float(self.abs_sums.sum())


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, Recording):
        return concatenate_trials(x)
    if hasattr(x, "trials"):
        return np.concatenate(x.trials, axis=1)
    return np.atleast_2d(np.asarray(x, dtype=float))


def corrcoeff_matrix(eog, signals) -> np.ndarray:
    """Pearson coefficients, one row per EOG channel and one column per signal.

    Both arguments may be Recordings, Components or plain 2-D arrays; trials
    are concatenated first.  Rows with zero variance get coefficient 0 (and
    a RuntimeWarning) instead of NaN.
    """
    E, S = _as_matrix(eog), _as_matrix(signals)
    if E.shape[1] != S.shape[1]:
        raise ValueError(f"sample counts differ: {E.shape[1]} EOG vs {S.shape[1]} signal samples")
    Ec = E - E.mean(axis=1, keepdims=True)
    Sc = S - S.mean(axis=1, keepdims=True)
    en = np.sqrt((Ec ** 2).sum(axis=1))
    sn = np.sqrt((Sc ** 2).sum(axis=1))
    e_ok = en > 1e-12 * max(1.0, np.abs(E).max())
    s_ok = sn > 1e-12 * max(1.0, np.abs(S).max())
    if not (e_ok.all() and s_ok.all()):
        warnings.warn(f"{int((~e_ok).sum())} EOG and {int((~s_ok).sum())} signal rows have zero "
                      "variance; their coefficients are set to 0", RuntimeWarning, stacklevel=2)
    C = (Ec @ Sc.T) / np.outer(np.where(e_ok, en, 1.0), np.where(s_ok, sn, 1.0))
    C[~e_ok, :] = 0.0
    C[:, ~s_ok] = 0.0
    return np.clip(C, -1.0, 1.0)


def sum_abs_rows(matrix) -> np.ndarray:
    """Column-wise sum of absolute values: one total per component."""
    return np.abs(np.atleast_2d(np.asarray(matrix, dtype=float))).sum(axis=0)


def outlier_threshold(values, n_mad: float = 3.0) -> float:
    x = np.asarray(values, dtype=float)
    med = np.median(x)
    return float(med + n_mad * MAD_SCALE * np.median(np.abs(x - med)))


def select_outlier_components(abs_sums, n_mad: float = 3.0) -> tuple[frozenset[int], tuple[int, ...]]:
    """Upper-tail outliers of ``abs_sums`` and the indices ordered by decreasing sum.

    A component is selected when its sum exceeds
    ``median + n_mad * 1.4826 * median(|x - median|)``.  When every value is
    equal the fence equals the values and nothing is selected.  The ordering
    breaks ties by ascending index.
    """
    x = np.asarray(abs_sums, dtype=float).ravel()
    if x.size < 1:
        raise ValueError("need at least one component")
    fence = outlier_threshold(x, n_mad)
    selected = frozenset(int(j) for j in np.flatnonzero(x > fence))
    order = tuple(int(j) for j in np.lexsort((np.arange(x.size), -x)))
    return selected, order


def correlation_report(eog, signals, n_mad: float = 3.0, eog_labels=()) -> CorrelationReport:
    C = corrcoeff_matrix(eog, signals)
    sums = sum_abs_rows(C)
    selected, order = select_outlier_components(sums, n_mad)
    if isinstance(eog, Recording) and not eog_labels:
        eog_labels = eog.labels
    return CorrelationReport(C, sums, order, selected,
                             f"abs_sum > median + {n_mad:g} * 1.4826 * MAD", tuple(eog_labels))


def save_report(report: CorrelationReport, path: str | Path) -> Path:
    """CSV of the correlation matrix plus sum, rank and selection per component.

    Columns: ``component``, one ``corr_<EOG>`` per EOG channel, ``abs_sum``,
    ``rank`` (position in the descending order) and ``selected`` (0/1).
    """
    path = Path(path)
    n_eog, k = report.matrix.shape
    names = list(report.eog_labels) or [f"EOG{i + 1}" for i in range(n_eog)]
    rank = {j: r for r, j in enumerate(report.sorted_order)}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["component", *(f"corr_{n}" for n in names), "abs_sum", "rank", "selected"])
        for j in range(k):
            w.writerow([j, *(repr(float(v)) for v in report.matrix[:, j]),
                        repr(float(report.abs_sums[j])), rank[j], int(j in report.selected)])
    return path


def load_report(path: str | Path, cutoff_rule: str = "") -> CorrelationReport:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], [r for r in rows[1:] if r]
    eog = tuple(h[len("corr_"):] for h in header if h.startswith("corr_"))
    n_eog = len(eog)
    matrix = np.array([[float(v) for v in r[1:1 + n_eog]] for r in body]).T.reshape(n_eog, len(body))
    sums = np.array([float(r[1 + n_eog]) for r in body])
    ranks = [int(r[2 + n_eog]) for r in body]
    order = tuple(int(j) for j in np.argsort(ranks, kind="stable"))
    selected = frozenset(j for j, r in enumerate(body) if int(r[3 + n_eog]))
    return CorrelationReport(matrix, sums, order, selected, cutoff_rule, eog)
