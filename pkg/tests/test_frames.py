import numpy as np
import pytest

from flowseries.errors import DimensionMismatchError, FrameLoadError, NoFramesError
from flowseries.frames import (
    Frame,
    FrameSequence,
    load_frame_sequence,
    read_pgm,
    to_grayscale,
    write_pgm,
)


def _write_frames(directory, sizes, prefix="frame", start=1):
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(0)
    paths = []
    for i, (w, h) in enumerate(sizes, start=start):
        raster = rng.integers(0, 256, size=(h, w), dtype=np.uint8)
        path = directory / f"{prefix}{i:04d}.pgm"
        write_pgm(path, raster)
        paths.append(path)
    return paths


class TestToGrayscale:
    def test_white_and_black(self):
        assert to_grayscale(255, 255, 255) == 255
        assert to_grayscale(0, 0, 0) == 0

    def test_pure_red(self):
        # round(0.299 * 255) = round(76.245)
        assert to_grayscale(255, 0, 0) == 76

    def test_monotone_in_each_channel(self):
        base = to_grayscale(100, 100, 100)
        assert to_grayscale(120, 100, 100) > base
        assert to_grayscale(100, 120, 100) > base
        assert to_grayscale(100, 100, 120) > base

    def test_permutation_sensitive(self):
        assert to_grayscale(200, 50, 0) != to_grayscale(50, 200, 0)

    def test_array_input(self):
        out = to_grayscale(np.array([255, 0]), np.array([0, 255]), np.array([0, 0]))
        assert out.tolist() == [76, 150]


class TestPgm:
    def test_round_trip_bytes(self, tmp_path):
        rng = np.random.default_rng(7)
        raster = rng.integers(0, 256, size=(17, 23), dtype=np.uint8)
        path = tmp_path / "a.pgm"
        write_pgm(path, raster)
        loaded = read_pgm(path)
        assert (loaded == raster).all()
        # re-serializing reproduces identical bytes
        path2 = tmp_path / "b.pgm"
        write_pgm(path2, loaded)
        assert path.read_bytes() == path2.read_bytes()

    def test_comment_header(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P5\n# a comment\n2 2\n255\n" + bytes([1, 2, 3, 4]))
        assert read_pgm(path).tolist() == [[1, 2], [3, 4]]

    def test_truncated_pixels(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
        with pytest.raises(FrameLoadError, match="truncated"):
            read_pgm(path)

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
        with pytest.raises(FrameLoadError):
            read_pgm(path)


class TestLoadFrameSequence:
    def test_orders_by_embedded_index(self, tmp_path):
        _write_frames(tmp_path, [(64, 64)] * 3)
        seq = load_frame_sequence(tmp_path)
        assert len(seq) == 3
        assert [f.index for f in seq] == [0, 1, 2]
        assert seq.width == 64 and seq.height == 64

    def test_single_frame_is_no_frames_error(self, tmp_path):
        _write_frames(tmp_path, [(64, 64)])
        with pytest.raises(NoFramesError, match="no frames"):
            load_frame_sequence(tmp_path)

    def test_mixed_dimensions(self, tmp_path):
        _write_frames(tmp_path, [(64, 64), (32, 32)])
        with pytest.raises(DimensionMismatchError, match="dimension mismatch"):
            load_frame_sequence(tmp_path)

    def test_duplicate_index_is_error(self, tmp_path):
        _write_frames(tmp_path, [(16, 16)], prefix="a", start=1)
        _write_frames(tmp_path, [(16, 16)], prefix="b", start=1)
        with pytest.raises(FrameLoadError, match="share index"):
            load_frame_sequence(tmp_path)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(FrameLoadError):
            load_frame_sequence(tmp_path / "nope")

    def test_manifest_overrides_glob_order(self, tmp_path):
        paths = _write_frames(tmp_path, [(16, 16)] * 3)
        reversed_names = [p.name for p in reversed(paths)]
        (tmp_path / "frames.txt").write_text("\n".join(reversed_names) + "\n")
        seq = load_frame_sequence(tmp_path)
        direct = [read_pgm(p) for p in reversed(paths)]
        for frame, raster in zip(seq, direct):
            assert (frame.data == raster).all()

    def test_png_input(self, tmp_path):
        from PIL import Image

        rng = np.random.default_rng(3)
        rgb = rng.integers(0, 256, size=(12, 12, 3), dtype=np.uint8)
        for i in range(2):
            Image.fromarray(rgb).save(tmp_path / f"{i}.png")
        seq = load_frame_sequence(tmp_path)
        expected = to_grayscale(rgb[..., 0], rgb[..., 1], rgb[..., 2])
        assert (seq.frames[0].data == expected).all()

    def test_default_tag_strips_numeric_suffix(self, tmp_path):
        d = tmp_path / "person-14"
        _write_frames(d, [(16, 16)] * 2)
        assert load_frame_sequence(d).object_tag == "person"


class TestFrameTypes:
    def test_frame_rejects_non_2d(self):
        with pytest.raises(FrameLoadError):
            Frame(data=np.zeros(10, dtype=np.uint8), index=0)

    def test_sequence_requires_two_frames(self):
        frame = Frame(data=np.zeros((8, 8), dtype=np.uint8), index=0)
        with pytest.raises(NoFramesError):
            FrameSequence(frames=[frame], source_id="x")
