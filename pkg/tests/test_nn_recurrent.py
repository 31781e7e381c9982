"""Gated-cell and bidirectional-encoder tests, including the sequence-length-1
static-encoder identity asserted bit for bit."""

import numpy as np
import pytest

from handstates.nn.recurrent import BidirectionalLSTM, LSTMLayer, lstm_step


def make_layer(rng, n_in, units, name="lstm"):
    return LSTMLayer.create(rng, n_in, units, name=name)


class TestLstmStep:
    def test_zero_parameters_give_zero_state(self, rng):
        x = rng.normal(size=(3, 6))
        h, c, _ = lstm_step(
            x,
            np.zeros((3, 4)),
            np.zeros((3, 4)),
            np.zeros((6, 16)),
            np.zeros((4, 16)),
            np.zeros(16),
        )
        assert np.array_equal(h, np.zeros((3, 4)))
        assert np.array_equal(c, np.zeros((3, 4)))

    def test_saturated_forget_gate_preserves_cell(self, rng):
        units = 5
        b = np.zeros(4 * units)
        b[units : 2 * units] = 50.0  # forget gate pinned open
        c_prev = rng.normal(size=(2, units))
        _, c, _ = lstm_step(
            rng.normal(size=(2, 3)),
            np.zeros((2, units)),
            c_prev,
            np.zeros((3, 4 * units)),
            np.zeros((units, 4 * units)),
            b,
        )
        assert np.abs(c - c_prev).max() <= 1e-9

    def test_shape_mismatch(self, rng):
        with pytest.raises(ValueError, match="mismatch"):
            lstm_step(
                np.zeros((2, 3)),
                np.zeros((2, 4)),
                np.zeros((2, 4)),
                np.zeros((5, 16)),
                np.zeros((4, 16)),
                np.zeros(16),
            )


def test_three_step_bptt_matches_finite_differences(rng):
    layer = make_layer(rng, 4, 3)
    x = rng.normal(size=(2, 3, 4))
    proj = rng.normal(size=(2, 3, 3))

    def loss():
        return float((layer.forward(x) * proj).sum())

    layer.forward(x)
    layer.zero_grads()
    dx = layer.backward(proj)

    h = 1e-5
    worst = 0.0
    for param, grad in (
        (layer.wx, layer.dwx),
        (layer.wh, layer.dwh),
        (layer.b, layer.db),
        (x, dx),
    ):
        flat = param.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            plus = loss()
            flat[i] = orig - h
            minus = loss()
            flat[i] = orig
            numeric = (plus - minus) / (2 * h)
            denom = max(abs(numeric), abs(gflat[i]), 1e-4)
            worst = max(worst, abs(gflat[i] - numeric) / denom)
    assert worst <= 1e-5


class TestBidirectional:
    def test_seq1_width_contract(self, rng):
        bi = BidirectionalLSTM.create(rng, 8, 7)
        _, enc = bi.forward(rng.normal(size=(4, 1, 8)))
        assert enc.shape == (4, 14)

    def test_seq1_equals_two_explicit_cell_calls(self, rng):
        """At sequence length 1 the encoder IS two zero-state cell calls."""
        bi = BidirectionalLSTM.create(rng, 8, 6)
        x = rng.normal(size=(5, 1, 8))
        _, enc = bi.forward(x)
        zeros = np.zeros((5, 6))
        hf, _, _ = lstm_step(x[:, 0, :], zeros, zeros, bi.fwd.wx, bi.fwd.wh, bi.fwd.b)
        hb, _, _ = lstm_step(x[:, 0, :], zeros, zeros, bi.bwd.wx, bi.bwd.wh, bi.bwd.b)
        explicit = np.concatenate([hf, hb], axis=1)
        assert np.array_equal(enc, explicit)  # bit-identical

    def test_palindrome_with_tied_parameters(self, rng):
        fwd = make_layer(rng, 3, 4, name="f")
        bwd = LSTMLayer(fwd.wx.copy(), fwd.wh.copy(), fwd.b.copy(), name="b")
        bi = BidirectionalLSTM(fwd, bwd)
        half = rng.normal(size=(2, 3, 3))
        seq = np.concatenate([half, half[:, ::-1, :]], axis=1)  # palindrome
        _, enc = bi.forward(seq)
        assert np.array_equal(enc[:, :4], enc[:, 4:])

    def test_empty_sequence_rejected(self, rng):
        bi = BidirectionalLSTM.create(rng, 3, 2)
        with pytest.raises(ValueError, match="non-empty"):
            bi.forward(np.zeros((2, 0, 3)))

    def test_encoder_backward_matches_finite_differences(self, rng):
        bi = BidirectionalLSTM.create(rng, 3, 2)
        x = rng.normal(size=(2, 4, 3))
        proj = rng.normal(size=(2, 4))

        def loss():
            _, enc = bi.forward(x)
            return float((enc * proj).sum())

        bi.forward(x)
        bi.zero_grads()
        dx = bi.backward(None, proj)
        h = 1e-5
        flat = x.reshape(-1)
        gflat = dx.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            plus = loss()
            flat[i] = orig - h
            minus = loss()
            flat[i] = orig
            assert abs(gflat[i] - (plus - minus) / (2 * h)) < 1e-6
