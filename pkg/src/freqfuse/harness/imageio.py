"""Binary PPM (P6) and 8-bit RGB PNG codecs.

Loading scales byte values to [0, 1]; saving clamps to [0, 1] and rounds
half-up to 0..255, so a save/load round trip only quantizes. The format is
chosen by magic bytes on load and by file extension on save. Only what the
package needs is supported: maxval-255 PPM and non-interlaced 8-bit RGB PNG.
"""

import struct
import zlib

import numpy as np

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


class ImageError(Exception):
    """Base class for image codec failures."""


class ImageDecodeError(ImageError):
    """Malformed or corrupt image data."""


class UnsupportedImageError(ImageError):
    """Well-formed image in a variant this codec does not handle."""


def _quantize(image) -> np.ndarray:
    clamped = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    return np.floor(clamped * 255.0 + 0.5).astype(np.uint8)


def load_image(path) -> np.ndarray:
    """Read a PPM or PNG file into an (h, w, 3) float array in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] == b"P6":
        raw, h, w = _decode_ppm(data)
    elif data[: len(PNG_SIGNATURE)] == PNG_SIGNATURE:
        raw, h, w = _decode_png(data)
    else:
        raise ImageDecodeError(f"{path}: not a P6 PPM or PNG file")
    return np.frombuffer(raw, dtype=np.uint8).reshape(h, w, 3) / 255.0


def save_image(image, path) -> None:
    """Write an image as PPM (.ppm/.pnm) or PNG (.png) based on extension."""
    name = str(path).lower()
    pixels = _quantize(image)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) image, got shape {pixels.shape}")
    if name.endswith((".ppm", ".pnm")):
        blob = _encode_ppm(pixels)
    elif name.endswith(".png"):
        blob = _encode_png(pixels)
    else:
        raise UnsupportedImageError(f"{path}: unknown extension, use .ppm or .png")
    with open(path, "wb") as fh:
        fh.write(blob)


# PPM


def _encode_ppm(pixels) -> bytes:
    h, w, _ = pixels.shape
    return b"P6\n%d %d\n255\n" % (w, h) + pixels.tobytes()


def _ppm_tokens(data):
    # header tokens are whitespace-separated; # starts a comment to EOL
    i = 0
    while True:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i] == ord("#"):
            while i < len(data) and data[i] != ord("\n"):
                i += 1
            continue
        start = i
        while i < len(data) and not data[i : i + 1].isspace() and data[i] != ord("#"):
            i += 1
        if start == i:
            raise ImageDecodeError("truncated PPM header")
        yield data[start:i], i


def _decode_ppm(data):
    tokens = _ppm_tokens(data)
    try:
        magic, _ = next(tokens)
        if magic != b"P6":
            raise ImageDecodeError(f"bad PPM magic {magic!r}")
        fields = []
        for _ in range(3):
            token, end = next(tokens)
            fields.append(token)
    except StopIteration:
        raise ImageDecodeError("truncated PPM header") from None
    try:
        w, h, maxval = (int(f) for f in fields)
    except ValueError:
        raise ImageDecodeError(f"non-numeric PPM header fields {fields}") from None
    if w < 1 or h < 1:
        raise ImageDecodeError(f"bad PPM dimensions {w}x{h}")
    if maxval != 255:
        raise UnsupportedImageError(f"unsupported maxval {maxval}, only 255")
    # exactly one whitespace byte separates the header from the pixels
    if end >= len(data) or not data[end : end + 1].isspace():
        raise ImageDecodeError("PPM header does not end in whitespace")
    pixels = data[end + 1 :]
    expected = h * w * 3
    if len(pixels) < expected:
        raise ImageDecodeError(
            f"PPM pixel data truncated: want {expected} bytes, have {len(pixels)}"
        )
    return pixels[:expected], h, w


# PNG


def _png_chunk(kind, payload) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + kind
        + payload
        + struct.pack(">I", zlib.crc32(kind + payload))
    )


def _encode_png(pixels) -> bytes:
    h, w, _ = pixels.shape
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    rows = bytearray()
    for r in range(h):
        rows.append(0)
        rows += pixels[r].tobytes()
    return (
        PNG_SIGNATURE
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", zlib.compress(bytes(rows), 9))
        + _png_chunk(b"IEND", b"")
    )


def _iter_chunks(data):
    i = len(PNG_SIGNATURE)
    while i < len(data):
        if i + 8 > len(data):
            raise ImageDecodeError("truncated PNG chunk header")
        (length,) = struct.unpack(">I", data[i : i + 4])
        kind = data[i + 4 : i + 8]
        payload = data[i + 8 : i + 8 + length]
        if len(payload) != length or i + 12 + length > len(data):
            raise ImageDecodeError(f"truncated PNG chunk {kind!r}")
        (crc,) = struct.unpack(">I", data[i + 8 + length : i + 12 + length])
        if crc != zlib.crc32(kind + payload):
            raise ImageDecodeError(f"PNG chunk {kind!r} fails its checksum")
        yield kind, payload
        i += 12 + length


def _paeth(a, b, c):
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def _unfilter(raw, h, w):
    stride = w * 3
    out = bytearray(h * stride)
    prior = bytes(stride)
    pos = 0
    for r in range(h):
        if pos >= len(raw):
            raise ImageDecodeError("PNG pixel data truncated")
        filter_type = raw[pos]
        row = bytearray(raw[pos + 1 : pos + 1 + stride])
        if len(row) != stride:
            raise ImageDecodeError("PNG pixel data truncated")
        pos += 1 + stride
        if filter_type == 0:
            pass
        elif filter_type == 1:
            for i in range(3, stride):
                row[i] = (row[i] + row[i - 3]) & 0xFF
        elif filter_type == 2:
            for i in range(stride):
                row[i] = (row[i] + prior[i]) & 0xFF
        elif filter_type == 3:
            for i in range(stride):
                left = row[i - 3] if i >= 3 else 0
                row[i] = (row[i] + (left + prior[i]) // 2) & 0xFF
        elif filter_type == 4:
            for i in range(stride):
                left = row[i - 3] if i >= 3 else 0
                upleft = prior[i - 3] if i >= 3 else 0
                row[i] = (row[i] + _paeth(left, prior[i], upleft)) & 0xFF
        else:
            raise ImageDecodeError(f"unknown PNG filter type {filter_type}")
        out[r * stride : (r + 1) * stride] = row
        prior = row
    return bytes(out)


def _decode_png(data):
    header = None
    idat = bytearray()
    for kind, payload in _iter_chunks(data):
        if kind == b"IHDR":
            if len(payload) != 13:
                raise ImageDecodeError("bad IHDR length")
            header = struct.unpack(">IIBBBBB", payload)
        elif kind == b"IDAT":
            idat += payload
        elif kind == b"IEND":
            break
    if header is None:
        raise ImageDecodeError("PNG is missing its IHDR chunk")
    w, h, depth, color, compression, filter_method, interlace = header
    if w < 1 or h < 1:
        raise ImageDecodeError(f"bad PNG dimensions {w}x{h}")
    if depth != 8:
        raise UnsupportedImageError(f"unsupported bit depth {depth}, only 8")
    if color != 2:
        raise UnsupportedImageError(f"unsupported color type {color}, only RGB (2)")
    if compression != 0 or filter_method != 0:
        raise UnsupportedImageError("unsupported PNG compression or filter method")
    if interlace != 0:
        raise UnsupportedImageError("interlaced PNG is not supported")
    if not idat:
        raise ImageDecodeError("PNG has no IDAT data")
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise ImageDecodeError(f"PNG deflate stream is corrupt: {exc}") from None
    if len(raw) != h * (w * 3 + 1):
        raise ImageDecodeError(
            f"PNG pixel data has {len(raw)} bytes, expected {h * (w * 3 + 1)}"
        )
    return _unfilter(raw, h, w), h, w
