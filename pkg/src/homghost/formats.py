"""PGM (P5), CSV and JSON sidecar input/output."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np


def to_gray8(img: np.ndarray) -> np.ndarray:
    """Map a [0, 1] image (bool or float) to 8-bit grey, rounding half up."""
    img = np.asarray(img)
    if img.dtype == np.uint8:
        return img
    if img.dtype == bool:
        return np.where(img, 255, 0).astype(np.uint8)
    return np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def pgm_bytes(img: np.ndarray) -> bytes:
    data = to_gray8(img)
    if data.ndim != 2:
        raise ValueError(f"PGM needs a 2-D image, got shape {data.shape}")
    h, w = data.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(data).tobytes()


def write_pgm(path: str | Path, img: np.ndarray) -> Path:
    path = Path(path)
    path.write_bytes(pgm_bytes(img))
    return path


def _tokens(raw: bytes, count: int) -> tuple[list[bytes], int]:
    toks: list[bytes] = []
    i = 0
    while len(toks) < count:
        while i < len(raw) and raw[i : i + 1].isspace():
            i += 1
        if raw[i : i + 1] == b"#":
            while i < len(raw) and raw[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < len(raw) and not raw[j : j + 1].isspace():
            j += 1
        if j == i:
            raise ValueError("truncated PGM header")
        toks.append(raw[i:j])
        i = j
    return toks, i + 1  # single whitespace byte ends the header


def read_pgm(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    toks, offset = _tokens(raw, 4)
    if toks[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {toks[0]!r})")
    w, h, maxval = (int(t) for t in toks[1:])
    if maxval > 255:
        raise ValueError(f"{path}: 16-bit PGM not supported")
    body = raw[offset : offset + w * h]
    if len(body) != w * h:
        raise ValueError(f"{path}: expected {w * h} pixel bytes, found {len(body)}")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w).copy()


def read_mask(path: str | Path) -> np.ndarray:
    """Binary mask from a PGM: values >= 128 are white (1)."""
    return read_pgm(path) >= 128


def write_mask(path: str | Path, mask: np.ndarray) -> Path:
    return write_pgm(path, np.asarray(mask, dtype=bool))


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["maskId", "expectedRate", "sampledCount"])
    for r in records:
        w.writerow([r.mask_id, repr(float(r.expected_rate)), "" if r.sampled_count is None else r.sampled_count])
    return buf.getvalue()


def read_records_csv(path: str | Path):
    from .protocols import CoincidenceRecord

    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            sc = row["sampledCount"]
            out.append(CoincidenceRecord(int(row["maskId"]), float(row["expectedRate"]), int(sc) if sc else None))
    return out


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def write_json(path: str | Path, doc: dict) -> Path:
    return write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
