"""Whitening, symmetric FastICA and component rejection.

Components are ``S = W @ (X - mean)`` for an ``(n_channels, n_samples)``
matrix ``X``; ``A = pinv(W)`` maps them back to channels.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .recording import Recording, concatenate_trials

log = logging.getLogger(__name__)

RANK_TOL = 1e-10
# E[log cosh(v)] for v ~ N(0, 1)
_GAUSS_LOGCOSH = 0.3745672075
_GAUSS_Z = 4.0


@dataclass(frozen=True)
class Convergence:
    """Outcome of a FastICA fit.

    ``n_iter[i]`` is the first iteration at which component ``i`` moved less
    than ``tol`` (``max_iter`` if it never did) and ``deltas`` the final
    per-component change ``1 - |<w_new, w_old>|``.  ``reliable`` is False when
    more than one component is statistically indistinguishable from Gaussian,
    in which case the rotation within that subspace is arbitrary.
    """

    converged: bool
    n_iter: tuple[int, ...]
    deltas: tuple[float, ...]
    gaussian_z: tuple[float, ...] = ()
    reliable: bool = True


@dataclass(frozen=True, eq=False)
class IcaModel:
    channel_labels: tuple[str, ...]
    mean: np.ndarray
    whitener: np.ndarray
    unmixing: np.ndarray
    mixing: np.ndarray
    seed: int = 42
    convergence: Convergence | None = None

    @property
    def n_components(self) -> int:
        return self.unmixing.shape[0]

    def transform(self, X: np.ndarray) -> np.ndarray:
        return self.unmixing @ (X - self.mean[:, None])


@dataclass(frozen=True, eq=False)
class Components:
    trials: tuple[np.ndarray, ...]
    model: IcaModel = field(repr=False)

    @property
    def trial_lengths(self) -> tuple[int, ...]:
        return tuple(s.shape[1] for s in self.trials)

    def concatenated(self) -> np.ndarray:
        return np.concatenate(self.trials, axis=1)


def whiten(X: np.ndarray, rank_tol: float = RANK_TOL):
    """Center and whiten the rows of ``X``.

    Returns ``(Z, whitener, mean)`` where ``Z = whitener @ (X - mean)`` has
    identity covariance (normalized by the number of samples).  Directions
    with covariance eigenvalue at or below ``rank_tol * max eigenvalue`` are
    dropped, so ``Z`` has as many rows as the numerical rank of ``X``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ValueError(f"need an (n_channels, n_samples >= 2) matrix, got shape {X.shape}")
    mean = X.mean(axis=1)
    Xc = X - mean[:, None]
    cov = Xc @ Xc.T / X.shape[1]
    evals, evecs = np.linalg.eigh(cov)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    if not evals[0] > 0:
        raise ValueError("cannot whiten all-constant data (rank 0)")
    keep = evals > rank_tol * evals[0]
    whitener = evecs[:, keep].T / np.sqrt(evals[keep])[:, None]
    return whitener @ Xc, whitener, mean


def _sym_decorrelate(W: np.ndarray) -> np.ndarray:
    s, u = np.linalg.eigh(W @ W.T)
    return (u / np.sqrt(s)) @ u.T @ W


def gaussianity_z(Y: np.ndarray) -> np.ndarray:
    """Per-row evidence of non-Gaussianity for unit-variance rows.

    The larger of the standardized excess kurtosis and the standardized
    deviation of ``E[log cosh y]`` from its Gaussian value.
    """
    T = Y.shape[1]
    kurt_z = ((Y ** 4).mean(axis=1) - 3.0) / np.sqrt(24.0 / T)
    G = np.log(np.cosh(Y))
    sd = np.sqrt(G.var(axis=1) / T)
    neg_z = (G.mean(axis=1) - _GAUSS_LOGCOSH) / np.where(sd > 0, sd, np.inf)
    return np.maximum(np.abs(kurt_z), np.abs(neg_z))


def fastica(X: np.ndarray, seed: int = 42, max_iter: int = 500, tol: float = 1e-6,
            n_components: int | None = None, labels: Sequence[str] | None = None) -> IcaModel:
    """Symmetric fixed-point FastICA with the tanh contrast.

    Parameters
    ----------
    X : ndarray, shape (n_channels, n_samples)
    seed : int
        Seeds the random initial rotation; equal inputs and seeds give
        bit-identical models.
    max_iter, tol : int, float
        Stop once ``max(1 - |diag(W_new @ W_old.T)|) < tol``.  Hitting
        ``max_iter`` is recorded in ``model.convergence`` and logged, not raised.
    n_components : int, optional
        Defaults to the numerical rank of the covariance.
    labels : sequence of str, optional
        Channel names stored on the model.
    """
    X = np.asarray(X, dtype=float)
    Z, whitener, mean = whiten(X)
    if n_components is not None:
        if not 1 <= n_components <= Z.shape[0]:
            raise ValueError(f"n_components={n_components} outside 1..{Z.shape[0]} (data rank)")
        Z, whitener = Z[:n_components], whitener[:n_components]
    k, T = Z.shape
    if T < 10 * k:
        log.warning("FastICA on %d samples for %d components; at least %d recommended", T, k, 10 * k)

    rng = np.random.default_rng(seed)
    W = _sym_decorrelate(rng.standard_normal((k, k)))
    first_below = np.full(k, max_iter)
    delta = np.full(k, np.inf)
    converged = False
    for it in range(1, max_iter + 1):
        G = np.tanh(W @ Z)
        W_new = G @ Z.T / T - (1.0 - G ** 2).mean(axis=1)[:, None] * W
        W_new = _sym_decorrelate(W_new)
        delta = np.abs(1.0 - np.abs(np.einsum("ij,ij->i", W_new, W)))
        first_below = np.where((delta < tol) & (first_below == max_iter), it, first_below)
        W = W_new
        if delta.max() < tol:
            converged = True
            break
    if not converged:
        log.warning("FastICA did not converge in %d iterations (max delta %.3g)", max_iter, delta.max())

    gz = gaussianity_z(W @ Z)
    reliable = int(np.sum(gz < _GAUSS_Z)) <= 1
    unmixing = W @ whitener
    if labels is None:
        labels = [f"Ch{i + 1}" for i in range(X.shape[0])]
    return IcaModel(
        channel_labels=tuple(labels),
        mean=mean,
        whitener=whitener,
        unmixing=unmixing,
        mixing=np.linalg.pinv(unmixing),
        seed=seed,
        convergence=Convergence(converged, tuple(int(n) for n in first_below),
                                tuple(float(d) for d in delta), tuple(float(z) for z in gz), reliable),
    )


def amari_index(W: np.ndarray, A: np.ndarray) -> float:
    """Normalized Amari distance of ``P = W @ A`` from a scaled permutation (0 is perfect, max 1)."""
    P = np.abs(np.asarray(W) @ np.asarray(A))
    k = P.shape[0]
    if P.shape != (k, k):
        raise ValueError(f"W @ A must be square, got {P.shape}")
    if k == 1:
        return 0.0
    rows = (P.sum(axis=1) / P.max(axis=1) - 1).sum()
    cols = (P.sum(axis=0) / P.max(axis=0) - 1).sum()
    return float((rows + cols) / (2 * k * (k - 1)))


def apply_unmixing(model: IcaModel, rec: Recording) -> Components:
    """Project every trial onto the model's components using the training mean."""
    idx = rec.indices(model.channel_labels)
    return Components(tuple(model.transform(tr[idx]) for tr in rec.trials), model)


def _check_rejected(model: IcaModel, rejected: Iterable[int]) -> np.ndarray:
    rej = np.array(sorted(set(int(r) for r in rejected)), dtype=int)
    if rej.size and (rej[0] < 0 or rej[-1] >= model.n_components):
        raise IndexError(f"rejected components {rej.tolist()} outside 0..{model.n_components - 1}")
    return rej


def _removed(model, comps, rec, rej, weights=None):
    """Subtract ``A[:, rej] @ (S[rej] * weights)`` from the model channels of ``rec``."""
    if comps.trial_lengths != rec.trial_lengths:
        raise ValueError(f"component trials {comps.trial_lengths} do not match recording {rec.trial_lengths}")
    idx = rec.indices(model.channel_labels)
    A_r = model.mixing[:, rej]
    out = []
    for t, (tr, S) in enumerate(zip(rec.trials, comps.trials)):
        tr = tr.copy()
        if rej.size:
            S_r = S[rej] if weights is None else S[rej] * weights[t]
            tr[idx] -= A_r @ S_r
        out.append(tr)
    return rec.with_trials(out)


def reconstruct(model: IcaModel, comps: Components, rejected: Iterable[int], original: Recording) -> Recording:
    """Rebuild the model channels of ``original`` without the rejected components.

    Evaluated as ``X - A[:, rejected] @ S[rejected]``, which equals
    ``A @ S' + mean`` (rejected rows of ``S`` zeroed) whenever ``W @ A = I``
    and leaves the data untouched when nothing is rejected.  Channels outside
    the model, EOG included, pass through unchanged.
    """
    return _removed(model, comps, original, _check_rejected(model, rejected))


def reconstruct_partial(model: IcaModel, comps: Components, rejected: Iterable[int],
                        msf, original: Recording) -> Recording:
    """Attenuate rejected components sample-by-sample by the MSF weight.

    ``S'[r, t] = S[r, t] * (1 - w[t])`` for rejected ``r``; binary weights
    remove the components exactly where the MSF is 1.
    """
    rej = _check_rejected(model, rejected)
    weights = [np.asarray(w, dtype=float) for w in getattr(msf, "trials", msf)]
    if tuple(len(w) for w in weights) != comps.trial_lengths:
        raise ValueError(f"MSF trial lengths {tuple(len(w) for w in weights)} do not match "
                         f"components {comps.trial_lengths}")
    return _removed(model, comps, original, rej, weights)


def _fmt_matrix(M: np.ndarray) -> str:
    return "\n".join(" ".join(repr(float(v)) for v in row) for row in np.atleast_2d(M))


def save_model(model: IcaModel, path: str | Path) -> Path:
    """Write a model as plain text.

    Layout: ``key: value`` lines for labels, seed and sizes, then ``[mean]``,
    ``[whitener]``, ``[unmixing]`` and ``[mixing]`` blocks of whitespace
    separated rows.  Values use ``repr`` so loading is exact.
    """
    path = Path(path)
    n, k = len(model.channel_labels), model.n_components
    parts = [
        "# artifact ICA model v1",
        f"labels: {','.join(model.channel_labels)}",
        f"seed: {model.seed}",
        f"n_channels: {n}",
        f"n_components: {k}",
        "[mean]", _fmt_matrix(model.mean[None, :]),
        "[whitener]", _fmt_matrix(model.whitener),
        "[unmixing]", _fmt_matrix(model.unmixing),
        "[mixing]", _fmt_matrix(model.mixing),
    ]
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return path


def load_model(path: str | Path) -> IcaModel:
    meta: dict[str, str] = {}
    blocks: dict[str, list[list[float]]] = {}
    current = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            blocks[current] = []
        elif current is None:
            key, _, value = line.partition(":")
            meta[key.strip()] = value.strip()
        else:
            blocks[current].append([float(v) for v in line.split()])
    try:
        labels = tuple(meta["labels"].split(","))
        n, k = int(meta["n_channels"]), int(meta["n_components"])
        mats = {name: np.array(blocks[name], dtype=float) for name in ("mean", "whitener", "unmixing", "mixing")}
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: malformed model file ({exc})") from None
    expected = {"mean": (1, n), "whitener": (k, n), "unmixing": (k, n), "mixing": (n, k)}
    for name, shape in expected.items():
        if mats[name].shape != shape:
            raise ValueError(f"{path}: [{name}] has shape {mats[name].shape}, expected {shape}")
    return IcaModel(labels, mats["mean"][0], mats["whitener"], mats["unmixing"], mats["mixing"],
                    seed=int(meta.get("seed", 42)))


def fit_recording(rec: Recording, labels: Sequence[str], seed: int = 42, max_iter: int = 500,
                  tol: float = 1e-6, n_components: int | None = None, keep=None) -> IcaModel:
    """FastICA on the named channels of ``rec`` with trials concatenated.

    ``keep`` optionally selects concatenated columns (boolean mask) to train on.
    """
    X = concatenate_trials(rec)[rec.indices(labels)]
    if keep is not None and not np.all(keep):
        X = X[:, np.asarray(keep, dtype=bool)]
    return fastica(X, seed=seed, max_iter=max_iter, tol=tol, n_components=n_components, labels=labels)


__all__ = [
    "Components", "Convergence", "IcaModel", "amari_index", "apply_unmixing", "fastica",
    "fit_recording", "gaussianity_z", "load_model", "reconstruct", "reconstruct_partial",
    "save_model", "whiten",
]
