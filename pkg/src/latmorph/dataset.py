"""Synthetic lattice unit-cell datasets and the LMD1 on-disk format.

A unit cell is a 50x50 grid of material densities in [0, 1] (0 = void,
1 = material); generated cells are strictly binary. Cells are drawn
from five parametric families — orthogonal struts, diagonal struts,
square frames, circular rings, and thresholded low-order trigonometric
fields — constructed on a 49-periodic canvas whose first row/column is
duplicated into the last, so opposite cell edges always match and the
cells tile. Every record carries the homogenized 3x3 stiffness tensor
of its cell.

LMD1 file format (little-endian throughout):
  8 bytes   magic b"LMDSET01"
  4 bytes   uint32 length L of the JSON header
  L bytes   UTF-8 JSON: {"format_version", "count", "resolution",
            "material": {"E0", "nu", "Emin"}, "generator_seed",
            "stiffness_dtype"}
  count*2500 bytes   cell pixels, uint8 row-major; 0/255 for binary
            cells, intermediate values map to [0,1] by /255 on load
  count*9 floats     stiffness tensors row-major, float32 by default;
            the external variant uses float64 (header field
            "stiffness_dtype": "float64", or inferred from file size
            when the field is absent)

Only resolution 50 is accepted. Generated stiffness values are rounded
to float32 precision when records are built, which makes save/load
round trips bit-exact.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .homogenize import DEFAULT_MATERIAL, MaterialModel, homogenize_cell

CELL_SIZE = 50
_CANVAS = 49  # periodic canvas size; row/col 49 duplicates row/col 0

MAGIC = b"LMDSET01"
FORMAT_VERSION = 1

VOLUME_FRACTION_MIN = 0.05
VOLUME_FRACTION_MAX = 0.95
DUPLICATE_WARN_FRACTION = 0.05


class DatasetFormatError(ValueError):
    """Malformed LMD1 file; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass
class CellRecord:
    id: int
    cell: np.ndarray       # (50, 50) float64 densities in [0, 1]
    stiffness: np.ndarray  # (3, 3) float64


@dataclass
class Dataset:
    records: list[CellRecord]
    material: MaterialModel = DEFAULT_MATERIAL
    generator_seed: int | None = None
    format_version: int = FORMAT_VERSION

    def __len__(self) -> int:
        return len(self.records)

    def pixels(self) -> np.ndarray:
        """All cells stacked into an (n, 50, 50) array."""
        return np.stack([r.cell for r in self.records])

    def stiffness_array(self) -> np.ndarray:
        """All stiffness tensors stacked into an (n, 3, 3) array."""
        return np.stack([r.stiffness for r in self.records])

    def validate(self) -> None:
        if not self.records:
            raise ValueError("dataset is empty")
        ids = [r.id for r in self.records]
        if ids != list(range(len(self.records))):
            raise ValueError("record ids must be contiguous from 0")
        for r in self.records:
            if r.cell.shape != (CELL_SIZE, CELL_SIZE):
                raise ValueError(f"record {r.id}: cell shape {r.cell.shape}")
            if r.cell.min() < 0.0 or r.cell.max() > 1.0:
                raise ValueError(f"record {r.id}: densities outside [0, 1]")

    def content_hash(self) -> str:
        """SHA-256 of the serialized LMD1 byte stream."""
        buf = io.BytesIO()
        _write_stream(self, buf)
        return hashlib.sha256(buf.getvalue()).hexdigest()


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.85
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0,1), got {self.train_fraction}")


# ---------------------------------------------------------------------------
# generator families
# ---------------------------------------------------------------------------

def _family_ortho(rng) -> np.ndarray:
    img = np.zeros((_CANVAS, _CANVAS))
    for _ in range(rng.integers(1, 3)):
        pos, w = rng.integers(0, _CANVAS), rng.integers(4, 13)
        img[(pos + np.arange(w)) % _CANVAS, :] = 1.0
    for _ in range(rng.integers(1, 3)):
        pos, w = rng.integers(0, _CANVAS), rng.integers(4, 13)
        img[:, (pos + np.arange(w)) % _CANVAS] = 1.0
    return img


def _family_diag(rng) -> np.ndarray:
    yy, xx = np.mgrid[0:_CANVAS, 0:_CANVAS]
    img = np.zeros((_CANVAS, _CANVAS))
    for _ in range(rng.integers(1, 3)):
        t = (xx + yy) % _CANVAS if rng.integers(0, 2) else (xx - yy) % _CANVAS
        c, w = rng.integers(0, _CANVAS), rng.integers(5, 12)
        img[((t - c) % _CANVAS) < w] = 1.0
    return img


def _family_frame(rng) -> np.ndarray:
    yy, xx = np.mgrid[0:_CANVAS, 0:_CANVAS]
    r_out = int(rng.integers(12, 24))
    # keep the shape whole: wrapped frames read as scrambled corner pieces
    cx, cy = rng.integers(r_out, _CANVAS - r_out, size=2)
    m = np.maximum(np.abs(xx - cx), np.abs(yy - cy))
    r_in = r_out - int(rng.integers(4, max(5, r_out // 2 + 1)))
    img = ((m <= r_out) & (m > r_in)).astype(np.float64)
    if rng.random() < 0.5 and r_in > 5:
        img[m < rng.integers(3, r_in - 1)] = 1.0
    return img


def _family_ring(rng) -> np.ndarray:
    yy, xx = np.mgrid[0:_CANVAS, 0:_CANVAS]
    r_out = rng.uniform(10.0, 23.5)
    ro = int(np.ceil(r_out))
    cx, cy = rng.integers(ro, _CANVAS - ro, size=2)
    rr = np.hypot(xx - cx, yy - cy)
    t = rng.uniform(4.0, max(4.5, r_out / 2))
    img = ((rr <= r_out) & (rr > r_out - t)).astype(np.float64)
    if rng.random() < 0.4 and r_out - t > 7:
        img[rr < rng.uniform(3.0, r_out - t - 3)] = 1.0
    return img


def _family_trig(rng) -> np.ndarray:
    # integer spatial frequencies on the periodic canvas, so edges match
    u = 2.0 * np.pi * np.arange(_CANVAS) / _CANVAS
    k1, k2, k3, k4 = rng.integers(1, 3, size=4)
    p1, p2, p3, p4 = rng.uniform(0.0, 2.0 * np.pi, size=4)
    a = rng.uniform(0.0, 1.0)
    f = (
        np.cos(k1 * u + p1)[None, :]
        + np.cos(k2 * u + p2)[:, None]
        + a * np.cos(k3 * u + p3)[None, :] * np.cos(k4 * u + p4)[:, None]
    )
    q = rng.uniform(0.25, 0.75)
    return (f > np.quantile(f, q)).astype(np.float64)


FAMILIES = {
    "diag": _family_diag,
    "frame": _family_frame,
    "ortho": _family_ortho,
    "ring": _family_ring,
    "trig": _family_trig,
}

DEFAULT_FAMILY_WEIGHTS = {name: 1.0 for name in FAMILIES}


def _make_cell(rng, family: str) -> np.ndarray:
    """One tileable binary 50x50 cell with volume fraction in bounds."""
    maker = FAMILIES[family]
    for _ in range(200):
        img = maker(rng)
        if VOLUME_FRACTION_MIN <= img.mean() <= VOLUME_FRACTION_MAX:
            cell = np.zeros((CELL_SIZE, CELL_SIZE))
            cell[:_CANVAS, :_CANVAS] = img
            cell[_CANVAS, :_CANVAS] = img[0]
            cell[:_CANVAS, _CANVAS] = img[:, 0]
            cell[_CANVAS, _CANVAS] = img[0, 0]
            return cell
    raise RuntimeError(f"family {family!r} kept leaving the volume-fraction window")


def generate_synthetic_dataset(
    count: int,
    seed: int,
    family_weights: dict[str, float] | None = None,
    material: MaterialModel = DEFAULT_MATERIAL,
    verbose: bool = False,
) -> Dataset:
    """Generate `count` labeled unit cells, a pure function of its arguments.

    Stiffness tensors are computed by periodic homogenization and rounded
    to float32 precision so that LMD1 persistence is lossless. Warns when
    more than 5% of the generated pixel arrays are exact duplicates.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    weights = dict(DEFAULT_FAMILY_WEIGHTS if family_weights is None else family_weights)
    unknown = set(weights) - set(FAMILIES)
    if unknown:
        raise ValueError(f"unknown families: {sorted(unknown)}")
    if any(w < 0 for w in weights.values()) or sum(weights.values()) <= 0:
        raise ValueError("family weights must be non-negative and not all zero")

    names = sorted(name for name, w in weights.items() if w > 0)
    probs = np.array([weights[n] for n in names])
    probs = probs / probs.sum()

    rng = np.random.default_rng(seed)
    records = []
    seen: dict[bytes, int] = {}
    duplicates = 0
    for i in range(count):
        family = names[rng.choice(len(names), p=probs)]
        cell = _make_cell(rng, family)
        key = cell.tobytes()
        if key in seen:
            duplicates += 1
        else:
            seen[key] = i
        stiff = homogenize_cell(cell, material).astype(np.float32).astype(np.float64)
        records.append(CellRecord(id=i, cell=cell, stiffness=stiff))
        if verbose and (i + 1) % 500 == 0:
            print(f"  generated {i + 1}/{count} cells")
    if duplicates / count > DUPLICATE_WARN_FRACTION:
        warnings.warn(
            f"{duplicates}/{count} duplicate cells "
            f"({100.0 * duplicates / count:.1f}% > {100 * DUPLICATE_WARN_FRACTION:.0f}%)",
            stacklevel=2,
        )
    return Dataset(records=records, material=material, generator_seed=seed)


def split_dataset(d: Dataset, s: SplitSpec) -> tuple[Dataset, Dataset]:
    """Disjoint train/test partition; the permutation is fixed by s.seed.

    Both halves are renumbered to contiguous ids, preserving the original
    record order within each half.
    """
    if not d.records:
        raise ValueError("cannot split an empty dataset")
    n = len(d.records)
    n_train = int(np.floor(s.train_fraction * n + 0.5))
    perm = np.random.default_rng(s.seed).permutation(n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])

    def take(idx):
        recs = [
            CellRecord(id=k, cell=d.records[i].cell, stiffness=d.records[i].stiffness)
            for k, i in enumerate(idx)
        ]
        return Dataset(records=recs, material=d.material, generator_seed=d.generator_seed)

    return take(train_idx), take(test_idx)


# ---------------------------------------------------------------------------
# LMD1 persistence
# ---------------------------------------------------------------------------

def _write_stream(d: Dataset, fh) -> None:
    header = {
        "format_version": d.format_version,
        "count": len(d.records),
        "resolution": CELL_SIZE,
        "material": {"E0": d.material.e0, "nu": d.material.nu, "Emin": d.material.emin},
        "generator_seed": d.generator_seed,
        "stiffness_dtype": "float32",
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    fh.write(MAGIC)
    fh.write(struct.pack("<I", len(blob)))
    fh.write(blob)
    pix = np.stack([r.cell for r in d.records])
    fh.write(np.round(pix * 255.0).astype(np.uint8).tobytes())
    stiff = np.stack([r.stiffness for r in d.records])
    fh.write(stiff.astype("<f4").tobytes())


def save_dataset(d: Dataset, path) -> None:
    """Write the LMD1 file for a dataset (see module docstring for the layout)."""
    d.validate()
    with open(path, "wb") as fh:
        _write_stream(d, fh)


def load_dataset(path) -> Dataset:
    """Read an LMD1 file; accepts both float32 and external float64 stiffness."""
    with open(path, "rb") as fh:
        raw = fh.read()

    if len(raw) < len(MAGIC) + 4:
        raise DatasetFormatError("file shorter than the fixed header", len(raw))
    if raw[: len(MAGIC)] != MAGIC:
        raise DatasetFormatError(f"bad magic bytes {raw[:8]!r}", 0)
    (hlen,) = struct.unpack_from("<I", raw, len(MAGIC))
    off = len(MAGIC) + 4
    if len(raw) < off + hlen:
        raise DatasetFormatError("truncated JSON header", len(raw))
    try:
        header = json.loads(raw[off : off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DatasetFormatError(f"unreadable JSON header: {exc}", off) from None
    off += hlen

    count = int(header.get("count", -1))
    if count < 1:
        raise DatasetFormatError(f"invalid record count {count}", off)
    resolution = int(header.get("resolution", CELL_SIZE))
    if resolution != CELL_SIZE:
        raise DatasetFormatError(f"unsupported resolution {resolution} (only {CELL_SIZE})", off)

    pix_bytes = count * CELL_SIZE * CELL_SIZE
    if len(raw) < off + pix_bytes:
        raise DatasetFormatError("truncated pixel payload", len(raw))
    pix = np.frombuffer(raw, dtype=np.uint8, count=pix_bytes, offset=off)
    pix = pix.reshape(count, CELL_SIZE, CELL_SIZE).astype(np.float64) / 255.0
    off += pix_bytes

    dtype = header.get("stiffness_dtype")
    if dtype is None:
        remaining = len(raw) - off
        dtype = "float64" if remaining == count * 9 * 8 else "float32"
    if dtype not in ("float32", "float64"):
        raise DatasetFormatError(f"unsupported stiffness dtype {dtype!r}", off)
    np_dtype = "<f4" if dtype == "float32" else "<f8"
    stiff_bytes = count * 9 * (4 if dtype == "float32" else 8)
    if len(raw) < off + stiff_bytes:
        raise DatasetFormatError("truncated stiffness payload", len(raw))
    stiff = np.frombuffer(raw, dtype=np_dtype, count=count * 9, offset=off)
    stiff = stiff.reshape(count, 3, 3).astype(np.float64)

    m = header.get("material", {})
    material = MaterialModel(
        e0=float(m.get("E0", DEFAULT_MATERIAL.e0)),
        nu=float(m.get("nu", DEFAULT_MATERIAL.nu)),
        emin=float(m.get("Emin", DEFAULT_MATERIAL.emin)),
    )
    seed = header.get("generator_seed")
    records = [
        CellRecord(id=i, cell=pix[i].copy(), stiffness=stiff[i].copy()) for i in range(count)
    ]
    ds = Dataset(
        records=records,
        material=material,
        generator_seed=None if seed is None else int(seed),
        format_version=int(header.get("format_version", FORMAT_VERSION)),
    )
    ds.validate()
    return ds
