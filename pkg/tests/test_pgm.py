"""Binary PGM reader/writer: bit-exact round trips and header handling."""

import numpy as np
import pytest

from handstates import pgm


def test_round_trip_is_bit_exact(tmp_path, rng):
    img = rng.integers(0, 256, (37, 53)).astype(np.uint8)
    path = tmp_path / "x.pgm"
    pgm.write_pgm(path, img)
    back = pgm.read_pgm(path)
    assert back.dtype == np.uint8
    assert np.array_equal(back, img)
    # writing the same array twice produces identical bytes
    path2 = tmp_path / "y.pgm"
    pgm.write_pgm(path2, img)
    assert path.read_bytes() == path2.read_bytes()


def test_float_input_is_rounded_and_clipped(tmp_path):
    img = np.array([[-3.0, 12.4], [12.6, 300.0]])
    path = tmp_path / "f.pgm"
    pgm.write_pgm(path, img)
    assert np.array_equal(pgm.read_pgm(path), np.array([[0, 12], [13, 255]], np.uint8))


def test_comments_and_whitespace_in_header(tmp_path):
    raw = b"P5\n# a comment\n 2 # inline\n2\n255\n" + bytes([1, 2, 3, 4])
    path = tmp_path / "c.pgm"
    path.write_bytes(raw)
    img = pgm.read_pgm(path)
    assert np.array_equal(img, np.array([[1, 2], [3, 4]], np.uint8))


@pytest.mark.parametrize(
    "raw, message",
    [
        (b"P2\n2 2\n255\n1 2 3 4", "not a binary PGM"),
        (b"P5\n2 2\n65535\n" + bytes(8), "maxval"),
        (b"P5\n2 2\n255\n" + bytes(3), "truncated"),
    ],
)
def test_malformed_files_rejected(tmp_path, raw, message):
    path = tmp_path / "bad.pgm"
    path.write_bytes(raw)
    with pytest.raises(ValueError, match=message):
        pgm.read_pgm(path)


def test_mask_convention_threshold_128():
    gray = np.array([[0, 127], [128, 255]], np.uint8)
    assert np.array_equal(pgm.gray_to_mask(gray), [[False, False], [True, True]])
    mask = np.array([[True, False]])
    assert np.array_equal(pgm.mask_to_gray(mask), [[255, 0]])


def test_mask_round_trip(tmp_path, rng):
    mask = rng.random((9, 14)) < 0.4
    path = tmp_path / "m.pgm"
    pgm.write_pgm(path, pgm.mask_to_gray(mask))
    assert np.array_equal(pgm.gray_to_mask(pgm.read_pgm(path)), mask)
