"""Feature-matrix storage: binary file format, decimation map, cached store.

A feature file (.vfm) holds one 2-D float32 matrix: magic `VFM1`, row
and column counts as unsigned 32-bit little-endian, then the row-major
IEEE-754 binary32 payload.  A manifest maps video ids to feature files.
"""

import os
import struct
import threading

import numpy as np

from .util import InputError

MAGIC = b"VFM1"
_HEADER_BYTES = 12


def decimation_indices(frame_count, target=80):
    """Linearly spaced frame indices mapping frame_count frames to target.

    idx_i = round(i * (frame_count - 1) / (target - 1)) with halves
    rounded away from zero, so the first and last frames always anchor
    the endpoints.  Videos shorter than target repeat frames.  With
    target = 1 only the first frame is selected.
    """
    if frame_count < 1:
        raise InputError(f"frame_count must be >= 1, got {frame_count}")
    if target < 1:
        raise InputError(f"target must be >= 1, got {target}")
    if target == 1:
        return np.zeros(1, dtype=np.int64)
    num = frame_count - 1
    den = target - 1
    i = np.arange(target, dtype=np.int64)
    # exact integer round-half-up of i*num/den (non-negative operands)
    return (2 * i * num + den) // (2 * den)


def write_feature_file(path, matrix):
    """Write a 2-D matrix of finite values as float32 in .vfm format."""
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise InputError(f"feature matrix must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError("feature matrix contains non-finite entries")
    rows, cols = m.shape
    if rows >= 2 ** 32 or cols >= 2 ** 32:
        raise InputError(f"dimensions {rows}x{cols} overflow the 32-bit header")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", rows, cols))
        fh.write(np.ascontiguousarray(m, dtype="<f4").tobytes())


def read_feature_file(path):
    """Read a .vfm file back into a float32 matrix, bit-exactly."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER_BYTES:
        raise InputError(f"{path}: truncated header ({len(blob)} bytes)")
    if blob[:4] != MAGIC:
        raise InputError(f"{path}: bad magic {blob[:4]!r}, expected {MAGIC!r}")
    rows, cols = struct.unpack_from("<II", blob, 4)
    expected = _HEADER_BYTES + 4 * rows * cols
    if len(blob) != expected:
        raise InputError(f"{path}: payload is {len(blob)} bytes, expected {expected}")
    data = np.frombuffer(blob, dtype="<f4", count=rows * cols, offset=_HEADER_BYTES)
    m = data.reshape(rows, cols).copy()
    if not np.all(np.isfinite(m)):
        raise InputError(f"{path}: non-finite feature entries")
    return m


def load_manifest(path):
    """Parse `<video_id><TAB><relative-path>` lines into an id->path map.

    Paths resolve relative to the manifest's directory and must exist;
    duplicate ids are rejected.
    """
    base = os.path.dirname(os.path.abspath(path))
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "\t" not in line:
                raise InputError(f"{path}:{ln}: expected '<video_id>\\t<path>'")
            vid, rel = line.split("\t", 1)
            if vid in entries:
                raise InputError(f"{path}:{ln}: duplicate video id '{vid}'")
            full = os.path.join(base, rel)
            if not os.path.isfile(full):
                raise InputError(f"feature file for '{vid}' not found: {full}")
            entries[vid] = full
    return entries


class FeatureStore:
    """Serves feature matrices by video id, caching reads in memory.

    Matrices come back read-only so cached data cannot be mutated by a
    caller.  Lookups are thread-safe with single-writer insertion; pass
    cache=False to re-read files on every access instead.
    """

    def __init__(self, manifest_path, cache=True, expected_shape=None):
        self.entries = load_manifest(manifest_path)
        self.cache_enabled = cache
        self.expected_shape = expected_shape
        self._cache = {}
        self._lock = threading.Lock()

    def __contains__(self, video_id):
        return video_id in self.entries

    def ids(self):
        return list(self.entries)

    def get(self, video_id):
        if self.cache_enabled:
            with self._lock:
                hit = self._cache.get(video_id)
            if hit is not None:
                return hit
        if video_id not in self.entries:
            raise InputError(f"unknown video id '{video_id}'")
        m = read_feature_file(self.entries[video_id])
        if self.expected_shape is not None and m.shape != self.expected_shape:
            raise InputError(f"features for '{video_id}' have shape {m.shape}, "
                             f"expected {self.expected_shape}")
        m.flags.writeable = False
        if self.cache_enabled:
            with self._lock:
                self._cache[video_id] = m
        return m
