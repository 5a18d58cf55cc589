"""Plain-text vector/model dumps and binary PGM images.

Vector files hold one value per line; complex values are written ``re,im``.
Lines starting with ``#`` are headers. Model files start with a header line

    # model dense <m> <n> <field>         (followed by the m*n entries, row-major)
    # model cdp <K> <n> <h> <w> <field>   (followed by the K*n mask entries)

where ``w`` is 0 for the 1-D DFT variant.
"""
from __future__ import annotations

import os

import numpy as np

from .measurement import CDPModel, DenseModel, MeasurementModel, Observation
from .numerics import REAL


class ParseError(ValueError):
    """Malformed input file."""


def _fmt(v) -> str:
    if isinstance(v, complex) or np.iscomplexobj(v):
        return f"{v.real:.17g},{v.imag:.17g}"
    return f"{v:.17g}"


def format_values(values) -> str:
    values = np.asarray(values).ravel()
    return "".join(_fmt(v) + "\n" for v in values)


def _parse_values(lines, path):
    out = []
    is_complex = False
    for lineno, line in lines:
        try:
            if "," in line:
                re_, im = line.split(",")
                out.append(complex(float(re_), float(im)))
                is_complex = True
            else:
                out.append(float(line))
        except ValueError:
            raise ParseError(f"{path}:{lineno}: cannot parse value {line!r}") from None
    dtype = np.complex128 if is_complex else np.float64
    return np.array(out, dtype=dtype)


def _read_lines(path):
    with open(path) as fh:
        raw = fh.read().splitlines()
    headers, body = [], []
    for i, line in enumerate(raw, start=1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            headers.append(s[1:].split())
        else:
            body.append((i, s))
    return headers, body


def write_vector(path, v, header: str | None = None):
    v = np.asarray(v)
    with open(path, "w") as fh:
        if header:
            fh.write(f"# {header}\n")
        fh.write(format_values(v))


def read_vector(path) -> np.ndarray:
    _, body = _read_lines(path)
    if not body:
        raise ParseError(f"{path}: no values found")
    return _parse_values(body, path)


def write_observation(path, obs: Observation):
    header = f"observation {obs.m}"
    if obs.noisy:
        header += f" snr_db={obs.snr_db:.17g} sigma2={obs.sigma2:.17g}"
    write_vector(path, obs.b, header)


def read_observation(path) -> Observation:
    b = read_vector(path)
    if np.iscomplexobj(b):
        raise ParseError(f"{path}: observations must be real amplitudes")
    try:
        return Observation(b)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None


def write_model(path, model: MeasurementModel):
    with open(path, "w") as fh:
        if isinstance(model, DenseModel):
            fh.write(f"# model dense {model.m} {model.n} {model.field}\n")
            fh.write(format_values(model.A))
        elif isinstance(model, CDPModel):
            h, w = (model.shape[0], 0) if len(model.shape) == 1 else model.shape
            fh.write(f"# model cdp {model.K} {model.n} {h} {w} {model.field}\n")
            fh.write(format_values(model.masks))
        else:
            raise TypeError(f"cannot serialise {type(model).__name__}")


def read_model(path) -> MeasurementModel:
    headers, body = _read_lines(path)
    spec = next((h for h in headers if h and h[0] == "model"), None)
    if spec is None:
        raise ParseError(f"{path}: missing '# model ...' header")
    values = _parse_values(body, path)
    try:
        if spec[1] == "dense":
            m, n, field = int(spec[2]), int(spec[3]), spec[4]
            if values.size != m * n:
                raise ParseError(f"{path}: header declares {m}x{n} = {m * n} entries, found {values.size}")
            if field == REAL and np.iscomplexobj(values):
                raise ParseError(f"{path}: complex entries in a real model")
            return DenseModel(values.reshape(m, n), field=field)
        if spec[1] == "cdp":
            K, n, h, w, field = int(spec[2]), int(spec[3]), int(spec[4]), int(spec[5]), spec[6]
            if values.size != K * n:
                raise ParseError(f"{path}: header declares {K}x{n} = {K * n} mask entries, found {values.size}")
            shape = (h,) if w == 0 else (h, w)
            return CDPModel(values.astype(np.complex128).reshape(K, n), shape=shape, field=field)
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{path}: bad model header or data: {exc}") from None
    raise ParseError(f"{path}: unknown model kind {spec[1]!r}")


def _pgm_token(data: bytes, pos: int):
    """Next whitespace-delimited header token, skipping ``#`` comments."""
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ParseError(f"unexpected end of PGM header at byte offset {start}")
    return data[start:pos], start, pos


def parse_pgm(data: bytes) -> np.ndarray:
    """Decode a binary (P5) PGM image into floats in ``[0, 1]``, shape ``(h, w)``."""
    if data[:2] != b"P5":
        raise ParseError("not a binary PGM file: expected magic 'P5' at byte offset 0")
    pos = 2
    fields = []
    for name in ("width", "height", "maxval"):
        tok, start, pos = _pgm_token(data, pos)
        if not tok.isdigit():
            raise ParseError(f"invalid PGM {name} {tok!r} at byte offset {start}")
        fields.append(int(tok))
    width, height, maxval = fields
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ParseError(f"invalid PGM dimensions {width}x{height} maxval {maxval}")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise ParseError(f"missing whitespace after PGM header at byte offset {pos}")
    pos += 1
    depth = 1 if maxval < 256 else 2
    need = width * height * depth
    if len(data) - pos < need:
        raise ParseError(f"truncated PGM raster: expected {need} bytes from byte offset {pos}, "
                         f"found {len(data) - pos}")
    dtype = np.uint8 if depth == 1 else np.dtype(">u2")
    raster = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
    if raster.max(initial=0) > maxval:
        bad = int(np.argmax(raster > maxval))
        raise ParseError(f"pixel value exceeds maxval at byte offset {pos + bad * depth}")
    return raster.reshape(height, width).astype(np.float64) / maxval


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return parse_pgm(data)
    except ParseError as exc:
        raise ParseError(f"{os.fspath(path)}: {exc}") from None


def write_pgm(path, image):
    """Write ``image`` (floats, clipped to ``[0, 1]``) as an 8-bit P5 PGM."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {img.shape}")
    px = np.round(np.clip(img, 0.0, 1.0) * 255).astype(np.uint8)
    h, w = px.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(px.tobytes())

