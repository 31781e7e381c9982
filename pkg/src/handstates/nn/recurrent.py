"""Gated recurrent (LSTM) layers with exact backpropagation through time,
plus the bidirectional encoder used by the classifier.

Gate layout in the fused weight matrices is [input, forget, candidate,
output] along the last axis. At sequence length 1 the bidirectional encoder
performs no temporal unrolling at all: each direction's cell runs once from
a zero state and the two hidden states are concatenated, which turns the
gated cell into a static nonlinear feature encoder.
"""

from __future__ import annotations

import numpy as np

from .layers import glorot_uniform


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_step(x, h_prev, c_prev, wx, wh, b):
    """Single gated-cell step; returns (h, c, cache for backward).

    i = sig(.), f = sig(.), g = tanh(.), o = sig(.);
    c = f * c_prev + i * g; h = o * tanh(c).
    """
    if x.shape[1] != wx.shape[0] or h_prev.shape[1] != wh.shape[0]:
        raise ValueError(
            f"lstm_step shape mismatch: x {x.shape}, h {h_prev.shape}, "
            f"wx {wx.shape}, wh {wh.shape}"
        )
    units = wh.shape[0]
    a = x @ wx + h_prev @ wh + b
    i = _sigmoid(a[:, :units])
    f = _sigmoid(a[:, units : 2 * units])
    g = np.tanh(a[:, 2 * units : 3 * units])
    o = _sigmoid(a[:, 3 * units :])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    cache = (x, h_prev, c_prev, i, f, g, o, tc)
    return h, c, cache


def lstm_step_backward(dh, dc_in, cache, wx, wh):
    """Gradients of one step given dL/dh and incoming dL/dc."""
    x, h_prev, c_prev, i, f, g, o, tc = cache
    do = dh * tc
    dc = dc_in + dh * o * (1.0 - tc * tc)
    di = dc * g
    df = dc * c_prev
    dg = dc * i
    dc_prev = dc * f
    da = np.concatenate(
        [
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g * g),
            do * o * (1.0 - o),
        ],
        axis=1,
    )
    dwx = x.T @ da
    dwh = h_prev.T @ da
    db = da.sum(axis=0)
    dx = da @ wx.T
    dh_prev = da @ wh.T
    return dx, dh_prev, dc_prev, dwx, dwh, db


class LSTMLayer:
    """LSTM unrolled over a (batch, length, features) sequence."""

    def __init__(self, wx, wh, b, l2: float = 0.0, name: str = "lstm"):
        self.wx = wx
        self.wh = wh
        self.b = b
        self.l2 = float(l2)
        self.name = name
        self.units = wh.shape[0]
        self.dwx = np.zeros_like(wx)
        self.dwh = np.zeros_like(wh)
        self.db = np.zeros_like(b)
        self._caches: list | None = None

    @classmethod
    def create(cls, rng, n_in: int, units: int, l2: float = 0.0, name: str = "lstm"):
        wx = glorot_uniform(rng, n_in, 4 * units, (n_in, 4 * units))
        wh = glorot_uniform(rng, units, 4 * units, (units, 4 * units))
        b = np.zeros(4 * units)
        b[units : 2 * units] = 1.0  # forget-gate bias keeps early memory open
        return cls(wx, wh, b, l2=l2, name=name)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Run the cell over all steps; returns hidden states (B, L, units)."""
        if x.ndim != 3:
            raise ValueError(f"{self.name}: expected (batch, length, features) input")
        batch, length, _ = x.shape
        h = np.zeros((batch, self.units))
        c = np.zeros((batch, self.units))
        outputs = np.empty((batch, length, self.units))
        self._caches = []
        for t in range(length):
            h, c, cache = lstm_step(x[:, t, :], h, c, self.wx, self.wh, self.b)
            outputs[:, t, :] = h
            self._caches.append(cache)
        return outputs

    def backward(self, d_outputs: np.ndarray) -> np.ndarray:
        """BPTT given gradients for every per-step hidden state."""
        caches = self._caches
        batch, length, _ = d_outputs.shape
        dx = np.empty((batch, length, self.wx.shape[0]))
        dh_next = np.zeros((batch, self.units))
        dc_next = np.zeros((batch, self.units))
        for t in range(length - 1, -1, -1):
            dh = d_outputs[:, t, :] + dh_next
            dxt, dh_next, dc_next, dwx, dwh, db = lstm_step_backward(
                dh, dc_next, caches[t], self.wx, self.wh
            )
            self.dwx += dwx
            self.dwh += dwh
            self.db += db
            dx[:, t, :] = dxt
        return dx

    def penalty(self) -> float:
        if self.l2 <= 0.0:
            return 0.0
        return self.l2 * float((self.wx * self.wx).sum() + (self.wh * self.wh).sum())

    def add_penalty_grads(self):
        if self.l2 > 0.0:
            self.dwx += 2.0 * self.l2 * self.wx
            self.dwh += 2.0 * self.l2 * self.wh

    def params(self):
        return {
            f"{self.name}.wx": self.wx,
            f"{self.name}.wh": self.wh,
            f"{self.name}.b": self.b,
        }

    def grads(self):
        return {
            f"{self.name}.wx": self.dwx,
            f"{self.name}.wh": self.dwh,
            f"{self.name}.b": self.db,
        }

    def zero_grads(self):
        self.dwx[:] = 0.0
        self.dwh[:] = 0.0
        self.db[:] = 0.0


class BidirectionalLSTM:
    """Forward and reversed passes over a sequence, states concatenated.

    ``forward`` returns per-step outputs (B, L, 2 * units) for stacking and
    the encoding (B, 2 * units) formed from the two final hidden states.
    """

    def __init__(self, fwd: LSTMLayer, bwd: LSTMLayer):
        self.fwd = fwd
        self.bwd = bwd
        self.units = fwd.units

    @classmethod
    def create(cls, rng, n_in: int, units: int, l2: float = 0.0, name: str = "bilstm"):
        fwd = LSTMLayer.create(rng, n_in, units, l2=l2, name=f"{name}.fwd")
        bwd = LSTMLayer.create(rng, n_in, units, l2=l2, name=f"{name}.bwd")
        return cls(fwd, bwd)

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if x.shape[1] < 1:
            raise ValueError("bidirectional encoder needs a non-empty sequence")
        hf = self.fwd.forward(x)
        hb = self.bwd.forward(x[:, ::-1, :])
        steps = np.concatenate([hf, hb[:, ::-1, :]], axis=2)
        encoding = np.concatenate([hf[:, -1, :], hb[:, -1, :]], axis=1)
        return steps, encoding

    def backward(self, d_steps: np.ndarray | None, d_encoding: np.ndarray | None) -> np.ndarray:
        batch = (d_steps if d_steps is not None else d_encoding).shape[0]
        length = len(self.fwd._caches)
        u = self.units
        dhf = np.zeros((batch, length, u))
        dhb = np.zeros((batch, length, u))
        if d_steps is not None:
            dhf += d_steps[:, :, :u]
            dhb += d_steps[:, ::-1, u:]
        if d_encoding is not None:
            dhf[:, -1, :] += d_encoding[:, :u]
            dhb[:, -1, :] += d_encoding[:, u:]
        dx = self.fwd.backward(dhf)
        dx += self.bwd.backward(dhb)[:, ::-1, :]
        return dx

    def penalty(self) -> float:
        return self.fwd.penalty() + self.bwd.penalty()

    def add_penalty_grads(self):
        self.fwd.add_penalty_grads()
        self.bwd.add_penalty_grads()

    def params(self):
        return {**self.fwd.params(), **self.bwd.params()}

    def grads(self):
        return {**self.fwd.grads(), **self.bwd.grads()}

    def zero_grads(self):
        self.fwd.zero_grads()
        self.bwd.zero_grads()


def bidirectional_encode(x: np.ndarray, layer: BidirectionalLSTM) -> np.ndarray:
    """Encoding of a batch of sequences (width 2 * units)."""
    _, encoding = layer.forward(x)
    return encoding
