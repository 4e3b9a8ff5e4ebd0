"""Reading and writing scalar fields as PGM (P2/P5) or CSV.

PGM samples are scaled by ``1 / maxval`` into [0, 1]; 16-bit P5 samples
are big-endian. CSV holds one grid row per line and is written with 17
significant digits so that a round trip is exact.
"""

import os
import re

import numpy as np

from .exceptions import FieldFormatError
from .grid import ScalarField

SUPPORTED_MAXVAL = (255, 65535)
_WS = b" \t\n\r\v\f"


def _format_of(path):
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".pgm", ".pnm"):
        return "pgm"
    if ext in (".csv", ".txt"):
        return "csv"
    raise ValueError(f"cannot infer format from extension {ext!r} of {path}; use .pgm or .csv")


def _header_tokens(buf, count, start):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments.

    Returns the tokens as ``(value_bytes, offset)`` pairs and the offset just
    past the last token.
    """
    pos, tokens = start, []
    n = len(buf)
    while len(tokens) < count:
        while pos < n and (buf[pos] in _WS or buf[pos] == ord("#")):
            if buf[pos] == ord("#"):
                while pos < n and buf[pos] not in b"\n\r":
                    pos += 1
            else:
                pos += 1
        if pos >= n:
            raise FieldFormatError("malformed-header", pos, "header ends early")
        begin = pos
        while pos < n and buf[pos] not in _WS and buf[pos] != ord("#"):
            pos += 1
        tokens.append((buf[begin:pos], begin))
    return tokens, pos


def _positive_int(tok, what):
    raw, off = tok
    if not raw.isdigit():
        raise FieldFormatError("malformed-header", off, f"{what} is not a decimal integer: {raw[:20]!r}")
    val = int(raw)
    if val <= 0 and what != "maxval":
        raise FieldFormatError("malformed-header", off, f"{what} must be positive")
    return val


def parse_pgm(buf):
    """Decode PGM bytes to ``(samples, maxval)`` with integer samples of shape ``(H, W)``."""
    if len(buf) < 2 or buf[:2] not in (b"P2", b"P5"):
        raise FieldFormatError("malformed-header", 0, "magic number must be P2 or P5")
    magic = buf[:2]
    if len(buf) > 2 and buf[2] not in _WS and buf[2] != ord("#"):
        raise FieldFormatError("malformed-header", 2, "whitespace expected after magic number")
    (wt, ht, mt), pos = _header_tokens(buf, 3, 2)
    width = _positive_int(wt, "width")
    height = _positive_int(ht, "height")
    maxval = _positive_int(mt, "maxval")
    if maxval not in SUPPORTED_MAXVAL:
        raise FieldFormatError("maxval-unsupported", mt[1], f"maxval {maxval}; supported: 255, 65535")
    count = width * height

    if magic == b"P5":
        if pos >= len(buf) or buf[pos] not in _WS:
            raise FieldFormatError("malformed-header", pos, "single whitespace expected before raster")
        pos += 1
        nbytes = 1 if maxval < 256 else 2
        need = count * nbytes
        if len(buf) - pos < need:
            have = (len(buf) - pos) // nbytes
            raise FieldFormatError("truncated-data", pos + have * nbytes, f"{have} of {count} samples present")
        dtype = np.uint8 if nbytes == 1 else np.dtype(">u2")
        data = np.frombuffer(buf, dtype=dtype, count=count, offset=pos).astype(np.int64)
        return data.reshape(height, width), maxval

    samples = []
    for m in re.finditer(rb"#[^\n\r]*|[^\s#]+", buf[pos:]):
        tok = m.group()
        if tok.startswith(b"#"):
            continue
        off = pos + m.start()
        if not tok.isdigit():
            raise FieldFormatError("malformed-data", off, f"non-integer sample {tok[:20]!r}")
        v = int(tok)
        if v > maxval:
            raise FieldFormatError("malformed-data", off, f"sample {v} exceeds maxval {maxval}")
        samples.append(v)
        if len(samples) == count:
            break
    if len(samples) < count:
        raise FieldFormatError("truncated-data", len(buf), f"{len(samples)} of {count} samples present")
    return np.array(samples, dtype=np.int64).reshape(height, width), maxval


def parse_csv(buf):
    rows, widths = [], None
    offset = 0
    for line in buf.splitlines(keepends=True):
        text = line.strip()
        if text:
            try:
                row = [float(t) for t in text.split(b",")]
            except ValueError:
                raise FieldFormatError("malformed-data", offset, "non-numeric CSV entry") from None
            if widths is None:
                widths = len(row)
            elif len(row) != widths:
                raise FieldFormatError("malformed-data", offset, f"row has {len(row)} entries, expected {widths}")
            rows.append(row)
        offset += len(line)
    if not rows:
        raise FieldFormatError("truncated-data", 0, "empty CSV")
    return np.array(rows, dtype=float)


def read_field(path, spacing=1.0):
    """Read a :class:`ScalarField` from ``.pgm`` or ``.csv``.

    Raises
    ------
    FieldFormatError
        Malformed header, truncated data, or unsupported maxval; the message
        names the byte offset.
    """
    fmt = _format_of(path)
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from exc
    if fmt == "pgm":
        samples, maxval = parse_pgm(buf)
        values = samples / float(maxval)
    else:
        values = parse_csv(buf)
    return ScalarField(values, spacing)


def quantize(values, maxval=255):
    """Clamp to [0, 1] and round to integer samples."""
    v = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    return np.rint(v * maxval).astype(np.int64)


def encode_pgm(values, maxval=255):
    if maxval not in SUPPORTED_MAXVAL:
        raise ValueError(f"maxval must be 255 or 65535, got {maxval}")
    q = quantize(values, maxval)
    h, w = q.shape
    header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    dtype = np.uint8 if maxval == 255 else np.dtype(">u2")
    return header + q.astype(dtype).tobytes()


def encode_csv(values):
    v = np.asarray(values, dtype=float)
    return "".join(",".join(format(x, ".17g") for x in row) + "\n" for row in v).encode("ascii")


def write_field(field, path, maxval=255):
    """Write a field as P5 PGM (``maxval`` 255 or 65535) or CSV, by extension.

    PGM output is clamped to [0, 1] before quantization.
    """
    values = field.values if isinstance(field, ScalarField) else np.asarray(field, dtype=float)
    if values.ndim != 2:
        raise ValueError(f"expected a 2-D field, got shape {values.shape}")
    fmt = _format_of(path)
    data = encode_pgm(values, maxval) if fmt == "pgm" else encode_csv(values)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
