"""Disk-backed sorted set of packed o-polynomial records.

File layout: a 32-byte header (magic, format version, e, record size,
reduction polynomial, record count) followed by fixed-width records in
bytewise order, without duplicates.  Chunks are sorted independently and merged block by block, so
memory use is bounded by the block size times the number of chunks rather
than by the store size.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .gf2e import GF2e
from .opoly import OPoly, record_size, unpack_even

MAGIC = b"HFSTORE\0"
VERSION = 1
_HEADER = struct.Struct("<8sIIIIQ")
HEADER_SIZE = _HEADER.size


class StoreError(IOError):
    pass


def _void(rows: np.ndarray) -> np.ndarray:
    rows = np.ascontiguousarray(rows, dtype=np.uint8)
    return rows.view(np.dtype((np.void, rows.shape[1]))).ravel()


def sort_unique(records: np.ndarray) -> np.ndarray:
    """Rows of packed records, sorted bytewise with duplicates removed."""
    if len(records) == 0:
        return np.asarray(records, dtype=np.uint8)
    u = np.unique(_void(records))
    return u.view(np.uint8).reshape(len(u), -1)


def write_chunk(path: Path, records: np.ndarray) -> int:
    """Write sorted unique records atomically; returns the record count."""
    rows = sort_unique(records)
    tmp = Path(str(path) + ".tmp")
    rows.tofile(tmp)
    os.replace(tmp, path)
    return len(rows)


def _write_header(fh, F: GF2e, width: int, count: int) -> None:
    fh.seek(0)
    fh.write(_HEADER.pack(MAGIC, VERSION, F.e, width, F.poly, count))


def merge_chunks(chunks: list[Path], out: Path, F: GF2e, block: int = 1 << 18) -> int:
    """k-way merge of sorted chunk files into a store file; returns the count."""
    width = record_size(F)
    srcs = []
    for p in chunks:
        n = os.path.getsize(p) // width
        if n:
            srcs.append(np.memmap(p, dtype=np.uint8, mode="r", shape=(n, width)))
    pos = [0] * len(srcs)
    total = 0
    tmp = Path(str(out) + ".tmp")
    with open(tmp, "wb") as fh:
        _write_header(fh, F, width, 0)
        while True:
            live = [i for i in range(len(srcs)) if pos[i] < len(srcs[i])]
            if not live:
                break
            heads = {i: _void(srcs[i][pos[i] : pos[i] + block]) for i in live}
            # everything up to the smallest block maximum can be emitted now
            low = min(heads[i][-1].tobytes() for i in live)
            bound = _void(np.frombuffer(low, dtype=np.uint8)[None, :])[0]
            parts = []
            for i in live:
                k = int(np.searchsorted(heads[i], bound, side="right"))
                parts.append(heads[i][:k])
                pos[i] += k
            merged = np.unique(np.concatenate(parts))
            fh.write(merged.tobytes())
            total += len(merged)
        _write_header(fh, F, width, total)
    os.replace(tmp, out)
    return total


class ClassStore:
    """Read-only view of a store file."""

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        with open(self.path, "rb") as fh:
            raw = fh.read(HEADER_SIZE)
        if len(raw) != HEADER_SIZE:
            raise StoreError(f"{self.path}: truncated header")
        magic, version, e, width, poly, count = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise StoreError(f"{self.path}: not a class store")
        if version != VERSION:
            raise StoreError(f"{self.path}: unsupported format version {version}")
        self.F = GF2e(e, poly)
        self.q = self.F.q
        self.width = width
        self.count = count
        if width != record_size(self.F):
            raise StoreError(f"{self.path}: record size {width} does not match q={self.q}")
        if os.path.getsize(self.path) != HEADER_SIZE + count * width:
            raise StoreError(f"{self.path}: size does not match header count {count}")
        if count:
            self.records = np.memmap(self.path, dtype=np.uint8, mode="r", offset=HEADER_SIZE, shape=(count, width))
        else:
            self.records = np.zeros((0, width), dtype=np.uint8)
        self._keys = _void(self.records) if count else None

    def __len__(self) -> int:
        return self.count

    def __repr__(self) -> str:
        return f"ClassStore({str(self.path)!r}, q={self.q}, count={self.count})"

    def _key(self, item) -> bytes:
        if isinstance(item, OPoly):
            item = item.pack()
        if len(item) != self.width:
            raise ValueError(f"record must be {self.width} bytes")
        return bytes(item)

    def index(self, item) -> int:
        """Position of a record or o-polynomial in the store, -1 if absent."""
        if not self.count:
            return -1
        key = np.frombuffer(self._key(item), dtype=np.uint8)[None, :]
        k = _void(key)[0]
        i = int(np.searchsorted(self._keys, k))
        if i < self.count and self._keys[i] == k:
            return i
        return -1

    def __contains__(self, item) -> bool:
        return self.index(item) >= 0

    def __getitem__(self, i: int) -> OPoly:
        return OPoly.unpack(bytes(self.records[i]), self.F)

    def even_coefficients(self, lo: int, hi: int) -> np.ndarray:
        """Unpacked even-degree coefficients of records lo..hi-1."""
        return unpack_even(np.asarray(self.records[lo:hi]), self.F)

    def batches(self, size: int = 1 << 16):
        for lo in range(0, self.count, size):
            yield lo, min(lo + size, self.count)

    def is_sorted_unique(self) -> bool:
        if self.count < 2:
            return True
        step = 1 << 20
        for lo in range(0, self.count - 1, step):
            if not _strictly_increasing(self._keys[lo : lo + step + 1]):
                return False
        return True


def _strictly_increasing(keys: np.ndarray) -> bool:
    # void arrays have no ordering ufuncs; sorting a sorted array is a no-op
    s = np.sort(keys)
    return bool(np.array_equal(s, keys)) and len(np.unique(keys)) == len(keys)
