"""Encoder/decoder mapping, batch power normalization and the information loss.

Messages are 1-based in the scalar helpers (matching the usual communications
convention s in {1..M}); batch internals and the CSV export use 0-based
indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import DenseLayer, apply_activation, mlp_forward

EPS_NORM = 1e-20   # degenerate-batch guard on the pre-normalization energy
EPS_LOG = 1e-15    # clamp for log() in the cross entropy


class ConstellationFormatError(Exception):
    """Raised for malformed constellation CSV files (carries the line number)."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


@dataclass
class Constellation:
    """M complex points with their (uniform) symbol probabilities."""
    points: np.ndarray        # complex, shape (M,)
    probabilities: np.ndarray  # float, shape (M,)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex)
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        if self.points.shape != self.probabilities.shape:
            raise ValueError("points/probabilities shape mismatch")

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def mean_power(self) -> float:
        return float(np.sum(self.probabilities * np.abs(self.points) ** 2))


def one_hot(s: int, m: int) -> np.ndarray:
    """Length-m indicator vector for message s in {1..m}."""
    if not 1 <= s <= m:
        raise ValueError(f"message {s} out of range 1..{m}")
    v = np.zeros(m)
    v[s - 1] = 1.0
    return v


def encode(encoder: list[DenseLayer], messages: np.ndarray) -> np.ndarray:
    """Map 0-based message indices to complex symbols, pre-normalization.

    The one-hot times first-weight-matrix product is realized as column
    selection.
    """
    msgs = np.asarray(messages, dtype=int)
    first = encoder[0]
    h = apply_activation(first.weights.T[msgs] + first.biases, first.activation)
    for layer in encoder[1:]:
        h = apply_activation(h @ layer.weights.T + layer.biases, layer.activation)
    if h.shape[-1] != 2:
        raise ValueError("encoder output must be 2-wide (re, im)")
    return h[:, 0] + 1j * h[:, 1]


def normalize_power(symbols: np.ndarray, p_a: float):
    """Scale a batch so its mean power equals p_a.

    Returns (scaled symbols, scale, degenerate flag); a batch with essentially
    zero energy keeps a clamped scale and is flagged degenerate.
    """
    x = np.asarray(symbols, dtype=complex)
    if x.size == 0:
        raise ValueError("empty symbol batch")
    energy = float(np.sum(x.real ** 2 + x.imag ** 2))
    degenerate = energy < EPS_NORM
    scale = np.sqrt(p_a * x.size / max(energy, EPS_NORM))
    return scale * x, scale, degenerate


def decode(decoder: list[DenseLayer], y: np.ndarray) -> np.ndarray:
    """Noisy complex symbols -> (B, M) probability rows (softmax output)."""
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    feats = np.stack([y.real, y.imag], axis=-1)
    out, _, _ = mlp_forward(decoder, feats)
    return out


def detect(probs: np.ndarray) -> int:
    """Most probable message (1-based); ties break toward the lowest index."""
    p = np.asarray(probs, dtype=float)
    if p.size == 0:
        raise ValueError("empty probability vector")
    return int(np.argmax(p)) + 1


def cross_entropy(s_onehot: np.ndarray, probs: np.ndarray) -> float:
    """-sum(s_i log p_i) with probabilities clamped to >= EPS_LOG."""
    s = np.asarray(s_onehot, dtype=float)
    p = np.asarray(probs, dtype=float)
    if s.shape != p.shape:
        raise ValueError("one-hot / probability length mismatch")
    return float(-np.sum(s * np.log(np.maximum(p, EPS_LOG))))


def batch_cross_entropy(probs: np.ndarray, messages: np.ndarray) -> float:
    """Mean -log p[s] over a batch of 0-based message indices."""
    msgs = np.asarray(messages, dtype=int)
    picked = probs[np.arange(msgs.size), msgs]
    return float(-np.log(np.maximum(picked, EPS_LOG)).mean())


def export_constellation(encoder: list[DenseLayer], m: int, p_a: float) -> Constellation:
    """All M messages through encode + normalize_power as one uniform batch."""
    raw = encode(encoder, np.arange(m))
    points, _, degenerate = normalize_power(raw, p_a)
    if degenerate:
        raise ValueError("degenerate encoder: all constellation points at origin")
    return Constellation(points=points, probabilities=np.full(m, 1.0 / m))


# --- CSV interface: header index,probability,real,imag; 0-based index; ---
# --- 17-significant-digit decimals. ---

CSV_HEADER = "index,probability,real,imag"


def write_constellation_csv(constellation: Constellation, path) -> None:
    lines = [CSV_HEADER]
    for i, (pt, pr) in enumerate(zip(constellation.points,
                                     constellation.probabilities)):
        lines.append(f"{i},{pr:.17g},{pt.real:.17g},{pt.imag:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_constellation_csv(path) -> Constellation:
    with open(path) as fh:
        rows = [ln.strip() for ln in fh if ln.strip()]
    if not rows:
        raise ConstellationFormatError(f"{path}: empty constellation CSV", line=0)
    if rows[0] != CSV_HEADER:
        raise ConstellationFormatError(f"{path}:1: bad header {rows[0]!r}", line=1)
    if len(rows) == 1:
        raise ConstellationFormatError(f"{path}: no constellation rows", line=1)
    points, probs = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        parts = row.split(",")
        if len(parts) != 4:
            raise ConstellationFormatError(
                f"{path}:{lineno}: expected 4 fields, got {len(parts)}", line=lineno)
        try:
            idx = int(parts[0])
            pr, re, im = (float(p) for p in parts[1:])
        except ValueError as exc:
            raise ConstellationFormatError(
                f"{path}:{lineno}: unparseable row {row!r}", line=lineno) from exc
        if idx != lineno - 2:
            raise ConstellationFormatError(
                f"{path}:{lineno}: index {idx} out of order", line=lineno)
        probs.append(pr)
        points.append(re + 1j * im)
    return Constellation(points=np.array(points), probabilities=np.array(probs))
