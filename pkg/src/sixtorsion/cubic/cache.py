"""Resumable on-disk cache of cubic fields.

Layout of ``<root>/cubic_X<X>/``:

* ``chunk_<neg|pos>_<lo>_<hi>.npy``: maximal engine rows for leading
  coefficients lo..hi, written one at a time;
* ``manifest.json``: X, engine version, sha256 of every finished chunk, and
  once complete, sha256 of the outputs;
* ``fields.npy``: int64 columns disc, a, b, c, d, beta, q, type2, type3
  (type codes index the id lists in the manifest);
* ``fields.csv``: the same data with header
  ``disc,a,b,c,d,beta,q,is_galois,sig_real,type2,type3``.

A run that stops part way leaves a manifest with status "partial"; rerunning
skips every chunk whose checksum still matches, so the final files are
byte-identical to an uninterrupted run.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..arith import build_factor_table
from ..errors import DataError, IntegrityError
from .engine import a_bound, enumerate_raw
from .fields import FieldTable, build_field_table, field_table

log = logging.getLogger(__name__)

ENGINE_VERSION = "1"
CSV_HEADER = "disc,a,b,c,d,beta,q,is_galois,sig_real,type2,type3"
DEFAULT_CHUNKS_PER_SIGN = 8


class CacheMissingError(DataError):
    """No complete cache covers the requested X."""


def default_cache_dir() -> Path:
    env = os.environ.get("SIXTORSION_CACHE_DIR")
    return Path(env) if env else Path.home() / ".cache" / "sixtorsion"


def cache_path(X: int, root: Path | None = None) -> Path:
    return Path(root or default_cache_dir()) / f"cubic_X{int(X)}"


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass(frozen=True)
class Chunk:
    sign: int
    lo: int
    hi: int

    @property
    def name(self) -> str:
        return f"chunk_{'neg' if self.sign < 0 else 'pos'}_{self.lo:06d}_{self.hi:06d}.npy"


def plan_chunks(X: int, chunks_per_sign: int = DEFAULT_CHUNKS_PER_SIGN) -> list[Chunk]:
    out = []
    for sign in (-1, 1):
        A = a_bound(X, sign)
        if A < 1:
            continue
        width = max(1, -(-A // chunks_per_sign))
        for lo in range(1, A + 1, width):
            out.append(Chunk(sign, lo, min(A, lo + width - 1)))
    return out


def _write_json(path: Path, obj) -> None:
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    tmp.replace(path)


def _read_manifest(d: Path) -> dict | None:
    p = d / "manifest.json"
    if not p.exists():
        return None
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"unreadable cache manifest {p}") from exc


def build_cache(X: int, root: Path | None = None, chunks_per_sign: int = DEFAULT_CHUNKS_PER_SIGN,
                max_chunks: int | None = None) -> Path:
    """Enumerate cubic fields with |disc| <= X into the cache, resuming if possible.

    Args:
        X: discriminant bound.
        root: cache root (default from SIXTORSION_CACHE_DIR).
        chunks_per_sign: number of leading-coefficient ranges per sign.
        max_chunks: stop after computing this many new chunks (the manifest
            is left "partial"); used to exercise resumption.

    Returns:
        The cache directory.
    """
    d = cache_path(X, root)
    d.mkdir(parents=True, exist_ok=True)
    plan = plan_chunks(X, chunks_per_sign)
    man = _read_manifest(d)
    if man is not None:
        if man.get("X") != X or man.get("engine_version") != ENGINE_VERSION:
            raise IntegrityError(f"cache at {d} was built for different inputs; remove it to rebuild")
        if man.get("plan") != [c.name for c in plan]:
            raise IntegrityError(f"cache at {d} uses a different chunk plan")
        if man.get("status") == "complete":
            verify_cache(d)
            return d
    else:
        man = {"X": X, "engine_version": ENGINE_VERSION, "plan": [c.name for c in plan], "chunks": {},
               "status": "partial"}
        _write_json(d / "manifest.json", man)

    spf = build_factor_table(max(X, 2)).spf
    done = 0
    for c in plan:
        path = d / c.name
        known = man["chunks"].get(c.name)
        if known is not None and path.exists() and sha256_file(path) == known:
            continue
        if max_chunks is not None and done >= max_chunks:
            log.info("stopping after %d new chunks", done)
            return d
        rows = enumerate_raw(X, c.sign, spf, (c.lo, c.hi), maximal_only=True)
        np.save(path, rows)
        man["chunks"][c.name] = sha256_file(path)
        _write_json(d / "manifest.json", man)
        done += 1

    rows = np.concatenate([np.load(d / c.name) for c in plan]) if plan else np.zeros((0, 6), dtype=np.int64)
    table = build_field_table(rows, spf)
    _write_outputs(d, table)
    man["outputs"] = {name: sha256_file(d / name) for name in ("fields.npy", "fields.csv")}
    man["type2_ids"] = list(table.type2_ids)
    man["type3_ids"] = list(table.type3_ids)
    man["rows"] = len(table)
    man["status"] = "complete"
    _write_json(d / "manifest.json", man)
    return d


def _write_outputs(d: Path, t: FieldTable) -> None:
    arr = np.column_stack([t.disc, t.forms, t.beta, t.q, t.type2.astype(np.int64), t.type3.astype(np.int64)])
    arr = np.ascontiguousarray(arr, dtype=np.int64).reshape(-1, 9)
    np.save(d / "fields.npy", arr)
    write_fields_csv(d / "fields.csv", t)


def write_fields_csv(path: Path, t: FieldTable) -> None:
    t2 = t.type2_labels()
    t3 = t.type3_labels()
    with open(path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for i in range(len(t)):
            a, b, c, dd = (int(x) for x in t.forms[i])
            D = int(t.disc[i])
            fh.write(f"{D},{a},{b},{c},{dd},{int(t.beta[i])},{int(t.q[i])},{int(t.beta[i] == 1)},"
                     f"{'R3' if D > 0 else 'RC'},{t2[i]},{t3[i]}\n")


def verify_cache(d: Path) -> dict:
    """Check output checksums; raises IntegrityError on any mismatch."""
    man = _read_manifest(d)
    if man is None or man.get("status") != "complete":
        raise CacheMissingError(f"no complete cache at {d}")
    for name, digest in man["outputs"].items():
        p = d / name
        if not p.exists() or sha256_file(p) != digest:
            raise IntegrityError(f"cache file {p} fails its checksum; refusing to use it")
    return man


def _complete_caches(root: Path) -> list[tuple[int, Path]]:
    out = []
    if not root.exists():
        return out
    for d in root.glob("cubic_X*"):
        man = _read_manifest(d)
        if man and man.get("status") == "complete":
            out.append((int(man["X"]), d))
    return sorted(out)


def load_cache(X: int, root: Path | None = None) -> FieldTable:
    """Smallest complete cache with bound >= X, restricted to |disc| <= X."""
    root = Path(root or default_cache_dir())
    for Xc, d in _complete_caches(root):
        if Xc >= X:
            man = verify_cache(d)
            arr = np.load(d / "fields.npy")
            t = FieldTable(arr[:, 0].copy(), arr[:, 1:5].copy(), arr[:, 5].copy(), arr[:, 6].copy(),
                           arr[:, 7].astype(np.int8), arr[:, 8].astype(np.int8),
                           tuple(man["type2_ids"]), tuple(man["type3_ids"]), Xc)
            t = t.subset(np.abs(t.disc) <= X)
            t.X = X
            return t
    raise CacheMissingError(
        f"no cubic-field cache covers X = {X} under {root}; run `sixtorsion enumerate-cubics --X {X}` first"
    )


def get_field_table(X: int, root: Path | None = None, compute: bool = True) -> FieldTable:
    """Load from the cache if one covers X, otherwise (if allowed) enumerate in memory."""
    try:
        return load_cache(X, root)
    except CacheMissingError:
        if not compute:
            raise
        return field_table(X)
