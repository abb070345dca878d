"""Image codec tests: PPM and PNG, including hand-filtered PNG streams."""

import struct
import zlib

import numpy as np
import pytest

from freqfuse.harness.imageio import (
    PNG_SIGNATURE,
    ImageDecodeError,
    UnsupportedImageError,
    load_image,
    save_image,
)
from util import random_image


def test_ppm_round_trip_quantizes_only(tmp_path):
    img = random_image(1, 9, 7)
    path = tmp_path / "img.ppm"
    save_image(img, path)
    back = load_image(path)
    assert back.shape == img.shape
    assert np.abs(back - img).max() <= 0.5 / 255 + 1e-9


def test_png_round_trip_quantizes_only(tmp_path):
    img = random_image(2, 6, 11)
    path = tmp_path / "img.png"
    save_image(img, path)
    back = load_image(path)
    assert np.abs(back - img).max() <= 0.5 / 255 + 1e-9


def test_formats_agree(tmp_path):
    img = random_image(3, 5, 5)
    save_image(img, tmp_path / "a.ppm")
    save_image(img, tmp_path / "a.png")
    assert np.array_equal(load_image(tmp_path / "a.ppm"), load_image(tmp_path / "a.png"))


def test_save_clamps_out_of_range(tmp_path):
    img = np.zeros((2, 2, 3))
    img[0, 0] = [1.3, -0.2, 0.5]
    path = tmp_path / "clamp.ppm"
    save_image(img, path)
    back = load_image(path)
    assert back[0, 0, 0] == 1.0
    assert back[0, 0, 1] == 0.0


def test_rounding_is_half_up(tmp_path):
    values = np.array([0.0, 0.5 / 255, 0.4999 / 255, 254.5 / 255, 1.0])
    img = np.tile(values[:, None, None], (1, 1, 3))
    path = tmp_path / "round.ppm"
    save_image(img, path)
    back = load_image(path) * 255.0
    assert back[:, 0, 0] == pytest.approx([0, 1, 0, 255, 255])


def test_direct_p6_decode(tmp_path):
    path = tmp_path / "two.ppm"
    path.write_bytes(b"P6\n2 1\n255\n" + bytes([255, 0, 0, 0, 0, 255]))
    img = load_image(path)
    assert img.shape == (1, 2, 3)
    assert np.array_equal(img[0, 0], [1.0, 0.0, 0.0])
    assert np.array_equal(img[0, 1], [0.0, 0.0, 1.0])


def test_ppm_header_comments(tmp_path):
    path = tmp_path / "c.ppm"
    path.write_bytes(b"P6 # eh\n# full line\n1 1 # dims\n255\n\xff\x00\x00")
    assert np.array_equal(load_image(path)[0, 0], [1.0, 0.0, 0.0])


def test_ppm_rejects_wrong_maxval(tmp_path):
    path = tmp_path / "deep.ppm"
    path.write_bytes(b"P6\n1 1\n65535\n" + bytes(6))
    with pytest.raises(UnsupportedImageError, match="unsupported maxval"):
        load_image(path)


def test_ppm_rejects_truncation_and_garbage(tmp_path):
    short = tmp_path / "short.ppm"
    short.write_bytes(b"P6\n4 4\n255\n" + bytes(5))
    with pytest.raises(ImageDecodeError, match="truncated"):
        load_image(short)
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"GIF89a whatever")
    with pytest.raises(ImageDecodeError, match="not a P6 PPM or PNG"):
        load_image(bad)
    header_only = tmp_path / "hdr.ppm"
    header_only.write_bytes(b"P6\n2 2")
    with pytest.raises(ImageDecodeError):
        load_image(header_only)


def test_save_rejects_unknown_extension(tmp_path):
    with pytest.raises(UnsupportedImageError, match="extension"):
        save_image(np.zeros((2, 2, 3)), tmp_path / "img.bmp")


# hand-built PNG streams


def png_chunk(kind, payload):
    return (
        struct.pack(">I", len(payload))
        + kind
        + payload
        + struct.pack(">I", zlib.crc32(kind + payload))
    )


def filter_row(filter_type, row, prior):
    # reference implementation of the PNG row filters (encode direction)
    out = bytearray([filter_type])
    for i in range(len(row)):
        left = row[i - 3] if i >= 3 else 0
        up = prior[i]
        upleft = prior[i - 3] if i >= 3 else 0
        if filter_type == 0:
            pred = 0
        elif filter_type == 1:
            pred = left
        elif filter_type == 2:
            pred = up
        elif filter_type == 3:
            pred = (left + up) // 2
        else:
            p = left + up - upleft
            pa, pb, pc = abs(p - left), abs(p - up), abs(p - upleft)
            if pa <= pb and pa <= pc:
                pred = left
            elif pb <= pc:
                pred = up
            else:
                pred = upleft
        out.append((row[i] - pred) & 0xFF)
    return bytes(out)


def build_png(pixels, filter_types, depth=8, color=2, interlace=0):
    h, w, _ = pixels.shape
    ihdr = struct.pack(">IIBBBBB", w, h, depth, color, 0, 0, interlace)
    raw = bytearray()
    prior = bytes(w * 3)
    for r in range(h):
        row = pixels[r].tobytes()
        raw += filter_row(filter_types[r], row, prior)
        prior = row
    return (
        PNG_SIGNATURE
        + png_chunk(b"IHDR", ihdr)
        + png_chunk(b"IDAT", zlib.compress(bytes(raw)))
        + png_chunk(b"IEND", b"")
    )


def test_png_all_filter_types_decode(tmp_path):
    pixels = (random_image(4, 5, 6) * 255).astype(np.uint8)
    path = tmp_path / "filters.png"
    path.write_bytes(build_png(pixels, filter_types=[0, 1, 2, 3, 4]))
    back = (load_image(path) * 255).astype(np.uint8)
    assert np.array_equal(back, pixels)


def test_png_rejects_bad_crc(tmp_path):
    pixels = (random_image(5, 2, 2) * 255).astype(np.uint8)
    blob = bytearray(build_png(pixels, [0, 0]))
    blob[-5] ^= 0xFF  # corrupt the IEND CRC
    path = tmp_path / "crc.png"
    path.write_bytes(bytes(blob))
    with pytest.raises(ImageDecodeError, match="checksum"):
        load_image(path)


def test_png_rejects_16_bit(tmp_path):
    pixels = (random_image(6, 2, 2) * 255).astype(np.uint8)
    path = tmp_path / "deep.png"
    path.write_bytes(build_png(pixels, [0, 0], depth=16))
    with pytest.raises(UnsupportedImageError, match="bit depth"):
        load_image(path)


def test_png_rejects_non_rgb(tmp_path):
    pixels = (random_image(7, 2, 2) * 255).astype(np.uint8)
    path = tmp_path / "gray.png"
    path.write_bytes(build_png(pixels, [0, 0], color=0))
    with pytest.raises(UnsupportedImageError, match="color type"):
        load_image(path)


def test_png_rejects_interlaced(tmp_path):
    pixels = (random_image(8, 2, 2) * 255).astype(np.uint8)
    path = tmp_path / "adam7.png"
    path.write_bytes(build_png(pixels, [0, 0], interlace=1))
    with pytest.raises(UnsupportedImageError, match="interlaced"):
        load_image(path)


def test_png_rejects_corrupt_deflate(tmp_path):
    ihdr = struct.pack(">IIBBBBB", 2, 2, 8, 2, 0, 0, 0)
    blob = (
        PNG_SIGNATURE
        + png_chunk(b"IHDR", ihdr)
        + png_chunk(b"IDAT", b"not deflate data")
        + png_chunk(b"IEND", b"")
    )
    path = tmp_path / "corrupt.png"
    path.write_bytes(blob)
    with pytest.raises(ImageDecodeError, match="deflate"):
        load_image(path)


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_image(tmp_path / "nope.ppm")
