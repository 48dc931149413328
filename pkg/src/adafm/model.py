"""Second-order FM predictor, gradients, ensembles, and model serialization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FeatureEncoder, RngHandle, SparseVector

__all__ = [
    "FmParams",
    "EnsembleModel",
    "ModelFormatError",
    "init_params",
    "predict_naive",
    "predict_fast",
    "partial_score",
    "score_items",
    "merge_ensemble",
    "ensemble_predict",
    "save_model",
    "load_model",
]

_HEADER = "ADAFM v1"


class ModelFormatError(ValueError):
    """Raised for malformed model files; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass
class FmParams:
    """Parameters of one FM: linear weights ``w`` (d,) and factors ``V`` (d, k)."""

    w: np.ndarray
    V: np.ndarray

    @property
    def d(self) -> int:
        return len(self.w)

    @property
    def k(self) -> int:
        return self.V.shape[1]

    def copy(self) -> FmParams:
        return FmParams(self.w.copy(), self.V.copy())

    def validate(self) -> None:
        if self.V.shape[0] != self.d:
            raise ValueError("w and V disagree on feature count")
        if not 1 <= self.k <= self.d:
            raise ValueError(f"rank k={self.k} must lie in [1, d={self.d}]")
        if not (np.all(np.isfinite(self.w)) and np.all(np.isfinite(self.V))):
            raise ValueError("parameters contain non-finite values")


def init_params(d: int, k: int, rng: RngHandle) -> FmParams:
    """Fresh parameters: w all zero, factors i.i.d. Gaussian with std 0.1."""
    if not 1 <= k <= d:
        raise ValueError(f"rank k={k} must lie in [1, d={d}]")
    return FmParams(w=np.zeros(d), V=rng.gen.normal(0.0, 0.1, size=(d, k)))


def _check_dim(p: FmParams, x: SparseVector) -> None:
    if x.dim != p.d:
        raise ValueError(f"vector dim {x.dim} does not match model dim {p.d}")


def predict_naive(p: FmParams, x: SparseVector) -> float:
    """Reference predictor: explicit loop over all nonzero pairs.

    Computes w.x + sum over l < m of (V V^T)_lm x_l x_m. Quadratic in the
    number of nonzeros; kept as the ground truth the fast form is checked
    against.
    """
    _check_dim(p, x)
    idx, val = x.indices, x.values
    score = float(p.w[idx] @ val)
    V = p.V
    for a in range(len(idx)):
        va = V[idx[a]]
        for b in range(a + 1, len(idx)):
            score += float(va @ V[idx[b]]) * float(val[a]) * float(val[b])
    return score


def predict_fast(p: FmParams, x: SparseVector) -> float:
    """O(k * nnz) predictor: w.x + (|V^T x|^2 - sum_s |v_s o x|^2) / 2."""
    _check_dim(p, x)
    idx, val = x.indices, x.values
    rows = p.V[idx]
    lin = float(p.w[idx] @ val)
    vx = val @ rows
    sq = (val * val) @ (rows * rows)
    return lin + 0.5 * (float(vx @ vx) - float(sq.sum()))


def partial_score(p: FmParams, x: SparseVector, coord: tuple) -> float:
    """Derivative of the FM score at one parameter coordinate.

    ``coord`` is ``("w", l)`` or ``("v", l, m)``. The score is multi-linear in
    each coordinate, so dh/dw_l = x_l and dh/dv_lm = x_l (V[:,m].x) - v_lm x_l^2.
    """
    _check_dim(p, x)
    kind = coord[0]
    if kind == "w":
        (_, l) = coord
        if not 0 <= l < p.d:
            raise ValueError(f"w index {l} out of range")
        pos = np.searchsorted(x.indices, l)
        if pos == x.nnz or x.indices[pos] != l:
            return 0.0
        return float(x.values[pos])
    if kind == "v":
        (_, l, m) = coord
        if not 0 <= l < p.d:
            raise ValueError(f"v row {l} out of range")
        if not 0 <= m < p.k:
            raise ValueError(f"v column {m} out of range")
        pos = np.searchsorted(x.indices, l)
        if pos == x.nnz or x.indices[pos] != l:
            return 0.0
        x_l = float(x.values[pos])
        s_m = float(p.V[x.indices, m] @ x.values)
        return x_l * s_m - float(p.V[l, m]) * x_l * x_l
    raise ValueError(f"unknown coordinate kind {kind!r}")


def score_items(p: FmParams, enc: FeatureEncoder, user: int, items: np.ndarray) -> np.ndarray:
    """Vectorized scores of one user against many items.

    For two-hot pair encodings the self-interaction terms cancel, leaving
    w_u + w_i + V_u . V_i per item.
    """
    off = enc.n_users
    return p.w[user] + p.w[off + items] + p.V[off + items] @ p.V[user]


class EnsembleModel:
    """Weighted list of component FMs plus its merged single-FM form.

    All components share feature count and rank; weights are positive. The
    merged form (computed lazily) is one FM of rank k*T whose predictions
    equal the weighted component sum.
    """

    def __init__(self, components: list[tuple[float, FmParams]]):
        if not components:
            raise ValueError("ensemble needs at least one component")
        d, k = components[0][1].d, components[0][1].k
        for t, (alpha, params) in enumerate(components):
            if alpha <= 0:
                raise ValueError(f"component {t}: weight {alpha} must be positive")
            if params.d != d or params.k != k:
                raise ValueError(f"component {t}: shape mismatch")
        self.components = list(components)
        self._merged: FmParams | None = None

    @property
    def d(self) -> int:
        return self.components[0][1].d

    @property
    def k(self) -> int:
        return self.components[0][1].k

    @property
    def n_components(self) -> int:
        return len(self.components)

    def merged(self) -> FmParams:
        if self._merged is None:
            self._merged = merge_ensemble(self)
        return self._merged

    def predict(self, x: SparseVector) -> float:
        return ensemble_predict(self, x)

    def __repr__(self) -> str:
        return f"EnsembleModel(T={self.n_components}, d={self.d}, k={self.k})"


def ensemble_predict(e: EnsembleModel, x: SparseVector) -> float:
    """Weighted sum of component predictions."""
    return float(sum(alpha * predict_fast(p, x) for alpha, p in e.components))


def merge_ensemble(e: EnsembleModel) -> FmParams:
    """Collapse the ensemble into one FM of rank k*T.

    Linear parts add with their weights; factor blocks are scaled by
    sqrt(weight) and concatenated, so the merged interaction matrix is the
    weighted sum of the component ones and predictions are preserved.
    """
    w = np.zeros(e.d)
    blocks = []
    for alpha, p in e.components:
        w += alpha * p.w
        blocks.append(np.sqrt(alpha) * p.V)
    return FmParams(w=w, V=np.hstack(blocks))


def _fmt(v: float) -> str:
    return format(v, ".17g")


def save_model(model: EnsembleModel, path) -> None:
    """Write the versioned text format; round-trips float64 exactly."""
    lines = [_HEADER, f"d={model.d} k={model.k} T={model.n_components}"]
    for alpha, p in model.components:
        if not np.isfinite(alpha):
            raise ValueError("cannot save non-finite component weight")
        p.validate()
        lines.append(f"alpha={_fmt(alpha)}")
        lines.append(" ".join(_fmt(v) for v in p.w))
        for row in p.V:
            lines.append(" ".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_floats(text: str, expected: int, line_no: int) -> np.ndarray:
    parts = text.split()
    if len(parts) != expected:
        raise ModelFormatError(f"expected {expected} values, got {len(parts)}", line_no)
    try:
        arr = np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ModelFormatError(str(exc), line_no) from None
    if not np.all(np.isfinite(arr)):
        raise ModelFormatError("non-finite value", line_no)
    return arr


def load_model(path) -> EnsembleModel:
    """Read a model file written by ``save_model``; strict about structure."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    def need(i: int) -> str:
        if i >= len(lines):
            raise ModelFormatError("unexpected end of file", i + 1)
        return lines[i]

    if need(0) != _HEADER:
        raise ModelFormatError(f"expected header {_HEADER!r}", 1)
    fields = need(1).split()
    try:
        meta = dict(f.split("=", 1) for f in fields)
        d, k, t = int(meta["d"]), int(meta["k"]), int(meta["T"])
    except (ValueError, KeyError):
        raise ModelFormatError("expected 'd=<int> k=<int> T=<int>'", 2) from None
    if d < 1 or k < 1 or t < 1:
        raise ModelFormatError("d, k, T must be positive", 2)

    pos = 2
    components = []
    for _ in range(t):
        alpha_line = need(pos)
        if not alpha_line.startswith("alpha="):
            raise ModelFormatError("expected 'alpha=<decimal>'", pos + 1)
        try:
            alpha = float(alpha_line[len("alpha="):])
        except ValueError:
            raise ModelFormatError("bad alpha value", pos + 1) from None
        if not np.isfinite(alpha) or alpha <= 0:
            raise ModelFormatError("alpha must be positive and finite", pos + 1)
        pos += 1
        w = _parse_floats(need(pos), d, pos + 1)
        pos += 1
        V = np.empty((d, k))
        for r in range(d):
            V[r] = _parse_floats(need(pos), k, pos + 1)
            pos += 1
        components.append((alpha, FmParams(w=w, V=V)))
    if any(line.strip() for line in lines[pos:]):
        raise ModelFormatError("unexpected trailing content", pos + 1)
    return EnsembleModel(components)
