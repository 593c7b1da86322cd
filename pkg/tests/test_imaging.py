import numpy as np
import pytest

from fracscan.errors import ConfigError, DegenerateImageError, InvalidImageError
from fracscan.imaging import (
    EnhancementConfig,
    detect_edges,
    edge_map_from_rle,
    edge_map_to_rle,
    enhance,
    quantize_direction,
)


def passthrough_config(**overrides):
    base = dict(
        gamma=1.0,
        denoise_window=1,
        unsharp_amount=0.0,
        crop_threshold=256.0,
        equalize=False,
        canny_low=50.0,
        canny_high=150.0,
    )
    base.update(overrides)
    return EnhancementConfig(**base)


class TestEnhance:
    def test_constant_image_is_fixed_point(self):
        img = np.full((64, 64), 128, dtype=np.uint8)
        cfg = passthrough_config(equalize=True)
        assert np.array_equal(enhance(img, cfg), img)

    def test_identity_chain(self):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, size=(40, 30), dtype=np.uint8)
        assert np.array_equal(enhance(img, passthrough_config()), img)

    def test_gamma_matches_per_pixel_recomputation(self):
        img = np.zeros((8, 8), dtype=np.uint8)
        img[::2, ::2] = 200
        img[1::2, 1::2] = 200
        cfg = passthrough_config(gamma=2.0)
        out = enhance(img, cfg)
        expected = np.clip(np.floor(255.0 * (img / 255.0) ** 2.0 + 0.5), 0, 255).astype(np.uint8)
        assert np.array_equal(out, expected)

    def test_white_border_crop(self):
        img = np.full((10, 10), 255, dtype=np.uint8)
        img[2:8, 3:9] = 10
        out = enhance(img, passthrough_config(crop_threshold=245.0))
        assert out.shape == (6, 6)
        assert (out == 10).all()

    def test_crop_all_rows_is_degenerate(self):
        img = np.full((5, 5), 255, dtype=np.uint8)
        with pytest.raises(DegenerateImageError):
            enhance(img, passthrough_config(crop_threshold=245.0))

    def test_empty_image_rejected(self):
        with pytest.raises(InvalidImageError):
            enhance(np.zeros((0, 0), dtype=np.uint8), passthrough_config())

    def test_deterministic(self):
        rng = np.random.default_rng(1)
        img = rng.integers(0, 256, size=(50, 40), dtype=np.uint8)
        cfg = EnhancementConfig()
        assert np.array_equal(enhance(img, cfg), enhance(img, cfg))


class TestDetectEdges:
    def test_all_black_has_no_edges(self):
        img = np.zeros((32, 32), dtype=np.uint8)
        assert detect_edges(img, passthrough_config()).sum() == 0

    def test_vertical_step_edge_location(self):
        img = np.zeros((32, 32), dtype=np.uint8)
        img[:, 16:] = 255
        edges = detect_edges(img, passthrough_config())
        cols = np.unique(np.nonzero(edges)[1])
        assert len(cols) >= 1
        assert all(15 <= c <= 17 for c in cols)
        # one contiguous vertical line: every interior row has an edge pixel
        rows = np.unique(np.nonzero(edges)[0])
        assert len(rows) >= 28

    def test_square_perimeter_count(self):
        img = np.zeros((48, 48), dtype=np.uint8)
        img[16:32, 16:32] = 255
        edges = detect_edges(img, passthrough_config())
        # brute-force perimeter of the drawn square: 4 * 16 - 4 = 60
        count = int(edges.sum())
        assert abs(count - 60) <= 8

    def test_invalid_thresholds(self):
        with pytest.raises(ConfigError):
            detect_edges(np.zeros((8, 8), dtype=np.uint8), passthrough_config(canny_low=10.0, canny_high=5.0))

    def test_raising_high_never_adds_edges(self):
        rng = np.random.default_rng(7)
        img = rng.integers(0, 256, size=(48, 48), dtype=np.uint8)
        lows = passthrough_config(canny_low=20.0, canny_high=80.0)
        highs = passthrough_config(canny_low=20.0, canny_high=200.0)
        e_low = detect_edges(img, lows)
        e_high = detect_edges(img, highs)
        assert e_high.sum() <= e_low.sum()
        assert not (e_high & ~e_low).any()


def test_quantize_direction_only_four_angles():
    rng = np.random.default_rng(3)
    gx = rng.normal(size=1000)
    gy = rng.normal(size=1000)
    angles = quantize_direction(gx, gy)
    assert set(np.unique(angles)).issubset({0, 45, 90, 135})


def test_rle_round_trip():
    rng = np.random.default_rng(5)
    edges = rng.random((20, 30)) < 0.2
    doc = edge_map_to_rle(edges)
    assert np.array_equal(edge_map_from_rle(doc), edges)
