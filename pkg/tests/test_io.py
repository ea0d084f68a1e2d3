"""Tests for the file formats: PFM, PNG, CSV, JSON, and stack layout."""

import csv
import json

import numpy as np
import pytest

from swisim.core import DepthMap, build_schedule, derive_synthetic
from swisim.exceptions import InconsistentStack
from swisim.forward import AcquisitionSettings, acquire_stack
from swisim.io import (STACK_MANIFEST, frame_name, load_stack, read_depth_pfm,
                       read_image, read_json, read_pfm, save_stack,
                       settings_from_payload, write_colormap_png, write_csv,
                       write_depth_pfm, write_gray_png, write_json,
                       write_mask_png, write_pfm)
from swisim.retrieve import reconstruct
from swisim.scenes import specular_scene

MICRO = derive_synthetic(780.0, 781.0)


class TestPfm:
    def test_round_trip_is_exact_in_float32(self, tmp_path):
        rng = np.random.default_rng(0)
        image = rng.normal(scale=100.0, size=(7, 5)).astype(np.float32)
        path = tmp_path / "img.pfm"
        write_pfm(path, image)
        np.testing.assert_array_equal(read_pfm(path), image.astype(np.float64))

    def test_header_layout_and_row_order(self, tmp_path):
        image = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)
        path = tmp_path / "img.pfm"
        write_pfm(path, image)
        raw = path.read_bytes()
        header = b"Pf\n2 2\n-1.0\n"
        assert raw.startswith(header)
        # bottom row is stored first
        payload = np.frombuffer(raw[len(header):], dtype="<f4")
        np.testing.assert_array_equal(payload, [3.0, 4.0, 1.0, 2.0])

    def test_reads_big_endian_payloads(self, tmp_path):
        image = np.array([[5.0, -6.0]], dtype=">f4")
        path = tmp_path / "big.pfm"
        path.write_bytes(b"Pf\n2 1\n1.0\n" + image.tobytes())
        np.testing.assert_array_equal(read_pfm(path), [[5.0, -6.0]])

    def test_truncated_payload_raises(self, tmp_path):
        path = tmp_path / "bad.pfm"
        path.write_bytes(b"Pf\n4 4\n-1.0\n" + b"\x00" * 8)
        with pytest.raises(ValueError):
            read_pfm(path)

    def test_rejects_color_pfm(self, tmp_path):
        path = tmp_path / "color.pfm"
        path.write_bytes(b"PF\n1 1\n-1.0\n" + b"\x00" * 12)
        with pytest.raises(ValueError):
            read_pfm(path)

    def test_depth_map_round_trip_preserves_mask(self, tmp_path):
        depth = np.array([[1.5, 2.5], [3.5, 0.0]])
        mask = np.array([[True, False], [True, True]])
        path = tmp_path / "depth.pfm"
        write_depth_pfm(path, DepthMap(depth=depth, mask=mask))
        loaded = read_depth_pfm(path)
        np.testing.assert_array_equal(loaded.mask, mask)
        np.testing.assert_array_equal(loaded.depth[mask], depth[mask])


class TestPng:
    def test_gray_eight_bit_round_trip(self, tmp_path):
        image = np.linspace(0.0, 10.0, 64).reshape(8, 8)
        path = tmp_path / "img.png"
        lo, hi = write_gray_png(path, image, bit_depth=8)
        assert (lo, hi) == (0.0, 10.0)
        loaded = read_image(path)
        assert loaded.shape == (8, 8)
        np.testing.assert_allclose(loaded, image / 10.0, atol=1 / 255 + 1e-9)

    def test_gray_sixteen_bit_resolution(self, tmp_path):
        image = np.linspace(0.0, 1.0, 256).reshape(16, 16)
        path = tmp_path / "img16.png"
        write_gray_png(path, image, bit_depth=16)
        loaded = read_image(path)
        np.testing.assert_allclose(loaded, image, atol=1 / 65535 + 1e-9)

    def test_gray_rejects_other_depths(self, tmp_path):
        with pytest.raises(ValueError):
            write_gray_png(tmp_path / "x.png", np.zeros((2, 2)), bit_depth=12)

    def test_explicit_range_clips(self, tmp_path):
        image = np.array([[-1.0, 0.5, 2.0]])
        path = tmp_path / "img.png"
        write_gray_png(path, image, bit_depth=8, lo=0.0, hi=1.0)
        loaded = read_image(path)
        np.testing.assert_allclose(loaded, [[0.0, 0.5, 1.0]], atol=1 / 255)

    def test_colormap_png_is_rgb_and_deterministic(self, tmp_path):
        rng = np.random.default_rng(1)
        image = rng.uniform(size=(12, 12))
        first, second = tmp_path / "a.png", tmp_path / "b.png"
        write_colormap_png(first, image)
        write_colormap_png(second, image)
        assert first.read_bytes() == second.read_bytes()
        from PIL import Image
        with Image.open(first) as handle:
            assert handle.mode == "RGB"
            assert handle.size == (12, 12)

    def test_mask_png_is_binary(self, tmp_path):
        mask = np.array([[True, False], [False, True]])
        path = tmp_path / "mask.png"
        write_mask_png(path, mask)
        loaded = read_image(path)
        np.testing.assert_array_equal(loaded, np.where(mask, 1.0, 0.0))


class TestTables:
    def test_csv_uses_crlf_and_header(self, tmp_path):
        path = tmp_path / "rows.csv"
        write_csv(path, ["a", "b"], [[1, 2.5], [3, "x"]])
        raw = path.read_bytes()
        assert raw == b"a,b\r\n1,2.5\r\n3,x\r\n"
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows == [["a", "b"], ["1", "2.5"], ["3", "x"]]

    def test_json_sorted_and_stable(self, tmp_path):
        payload = {"zeta": 1, "alpha": {"b": 2.5, "a": [1, 2]}}
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        write_json(first, payload)
        write_json(second, json.loads(first.read_text()))
        assert first.read_bytes() == second.read_bytes()
        assert first.read_text().index("alpha") < first.read_text().index("zeta")
        assert read_json(first) == payload

    def test_json_refuses_non_finite(self, tmp_path):
        with pytest.raises(ValueError):
            write_json(tmp_path / "bad.json", {"x": float("inf")})


class TestSettingsPayload:
    def test_round_trip_with_infinite_sbr(self):
        settings = AcquisitionSettings(sbr=np.inf, noise_sigma=0.5, seed=9,
                                       speckle_realizations=4)
        from swisim.io import _settings_payload
        payload = _settings_payload(settings)
        assert payload["sbr"] is None
        assert settings_from_payload(payload) == settings

    def test_round_trip_with_finite_sbr(self):
        settings = AcquisitionSettings(sbr=0.1)
        from swisim.io import _settings_payload
        assert settings_from_payload(_settings_payload(settings)) == settings


def _small_stack(seed=0):
    scene = specular_scene((6, 6), MICRO, seed=seed)
    schedule = build_schedule(MICRO, 3, 3)
    settings = AcquisitionSettings(seed=seed)
    return acquire_stack(scene, schedule, settings, MICRO), settings


class TestStackLayout:
    def test_round_trip(self, tmp_path):
        stack, settings = _small_stack()
        save_stack(tmp_path, stack, settings)
        loaded, manifest = load_stack(tmp_path)
        # frames pass through float32 storage
        np.testing.assert_allclose(loaded.frames, stack.frames,
                                   rtol=1e-6, atol=1e-4)
        assert (loaded.schedule.m_steps, loaded.schedule.n_steps,
                loaded.schedule.l0) == (3, 3, 0.0)
        np.testing.assert_array_equal(loaded.schedule.positions,
                                      stack.schedule.positions)
        assert loaded.config == stack.config
        assert manifest["lambda_s_um"] == pytest.approx(MICRO.lambda_s)
        assert settings_from_payload(manifest["settings"]) == settings

    def test_round_trip_preserves_reconstruction(self, tmp_path):
        stack, _ = _small_stack(seed=3)
        save_stack(tmp_path, stack)
        loaded, _ = load_stack(tmp_path)
        original = reconstruct(stack)
        replayed = reconstruct(loaded)
        np.testing.assert_allclose(replayed.depth, original.depth, atol=1e-3)

    def test_save_is_byte_deterministic(self, tmp_path):
        stack, settings = _small_stack()
        first, second = tmp_path / "a", tmp_path / "b"
        save_stack(first, stack, settings)
        save_stack(second, stack, settings)
        for name in [STACK_MANIFEST] + [frame_name(n, m)
                                        for n in range(3) for m in range(3)]:
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_missing_frame_is_inconsistent(self, tmp_path):
        stack, _ = _small_stack()
        save_stack(tmp_path, stack)
        (tmp_path / frame_name(1, 2)).unlink()
        with pytest.raises(InconsistentStack):
            load_stack(tmp_path)

    def test_manifest_count_mismatch_is_inconsistent(self, tmp_path):
        stack, _ = _small_stack()
        save_stack(tmp_path, stack)
        manifest = read_json(tmp_path / STACK_MANIFEST)
        manifest["frames"] = manifest["frames"][:-1]
        write_json(tmp_path / STACK_MANIFEST, manifest)
        with pytest.raises(InconsistentStack):
            load_stack(tmp_path)

    def test_wrong_frame_shape_is_inconsistent(self, tmp_path):
        stack, _ = _small_stack()
        save_stack(tmp_path, stack)
        write_pfm(tmp_path / frame_name(0, 0), np.zeros((2, 2)))
        with pytest.raises(InconsistentStack):
            load_stack(tmp_path)

    def test_missing_manifest_is_io_error(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_stack(tmp_path)
