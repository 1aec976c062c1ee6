"""Banded LSH index over tensors in any format.

The index keeps L band tables. A band is K concatenated hash codes mixed
into one 64-bit key; an item lands in exactly one bucket per band. Queries
take the union of the query's L buckets, deduplicate, re-rank candidates by
the exact metric of the family (Frobenius distance for bucketed Euclidean
hashing, angle for sign hashing), and truncate.

Amplification lives entirely here: the per-code families know nothing about
K or L. With per-code collision probability p, a true neighbor is retrieved
with probability 1 - (1 - p**K)**L, up to rare 64-bit key mixing collisions
(which can only add candidates, never lose them).

Concurrency: one writer, any number of readers; no internal locking.
Deletion is not supported -- rebuild to remove items.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import rng
from .families import (
    DEFAULT_WIDTH,
    E2lshFamily,
    FamilyKind,
    SrpFamily,
    e2lsh_hash,
    make_e2lsh_family,
    make_srp_family,
    naive_hash,
    srp_hash,
)
from .tensorio import read_tensor
from .tensors import Tensor, angle_between, frobenius_distance, validate_shape

__all__ = ["IndexParams", "LshIndex", "load_index", "retrieval_probability"]


def retrieval_probability(p: float, codes_per_band: int, bands: int) -> float:
    """Chance a pair with per-code collision probability p shares >= 1 band key.

    The banded AND/OR construction: 1 - (1 - p**K)**L.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if codes_per_band < 1 or bands < 1:
        raise ValueError("band geometry must be positive")
    return 1.0 - (1.0 - p**codes_per_band) ** bands


@dataclass(frozen=True)
class IndexParams:
    """Fixed-at-construction geometry of an index."""

    kind: FamilyKind
    shape: tuple[int, ...]
    rank: int
    codes_per_band: int
    bands: int
    width: float = DEFAULT_WIDTH
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape", validate_shape(self.shape))
        if self.codes_per_band < 1:
            raise ValueError("codes_per_band must be positive")
        if self.bands < 1:
            raise ValueError("bands must be positive")
        if self.rank < 1:
            raise ValueError("rank must be positive")
        if self.kind.is_euclidean and not self.width > 0:
            raise ValueError("width must be positive for Euclidean kinds")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "shape": list(self.shape),
            "rank": self.rank,
            "codes_per_band": self.codes_per_band,
            "bands": self.bands,
            "width": self.width,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IndexParams":
        return cls(
            kind=FamilyKind(d["kind"]),
            shape=tuple(d["shape"]),
            rank=int(d["rank"]),
            codes_per_band=int(d["codes_per_band"]),
            bands=int(d["bands"]),
            width=float(d["width"]),
            seed=int(d["seed"]),
        )


def _mix_band_key(band: int, codes) -> int:
    """Fold a band's K codes into one 64-bit bucket key.

    Key collisions between distinct code vectors are possible but only add
    spurious candidates, which re-ranking absorbs.
    """
    h = rng.splitmix64(0xB4D ^ band)
    for c in codes:
        h = rng.splitmix64(h ^ (int(c) & rng.MASK64))
    return h


class LshIndex:
    """Banded bucket tables plus the originals needed for exact re-ranking."""

    def __init__(self, params: IndexParams) -> None:
        self.params = params
        # One family per (band, slot): component index = band * K + slot.
        self._families: list[list[E2lshFamily | SrpFamily]] = []
        if not params.kind.is_naive:
            for band in range(params.bands):
                row = []
                for slot in range(params.codes_per_band):
                    component = band * params.codes_per_band + slot
                    if params.kind.is_euclidean:
                        row.append(
                            make_e2lsh_family(
                                params.kind, params.shape, params.rank,
                                params.width, params.seed, component,
                            )
                        )
                    else:
                        row.append(
                            make_srp_family(
                                params.kind, params.shape, params.rank,
                                params.seed, component,
                            )
                        )
                self._families.append(row)
        self._tables: list[dict[int, list[int]]] = [{} for _ in range(params.bands)]
        self._items: dict[int, Tensor] = {}
        self._keys: dict[int, list[int]] = {}  # item id -> its L band keys

    def __len__(self) -> int:
        return len(self._items)

    def _band_keys(self, x: Tensor) -> list[int]:
        p = self.params
        if x.shape != p.shape:
            raise ValueError(f"tensor shape {x.shape} does not match index shape {p.shape}")
        keys = []
        for band in range(p.bands):
            if p.kind.is_naive:
                base = band * p.codes_per_band
                hv = naive_hash(p.kind, x, p.codes_per_band, p.width, p.seed, base)
                codes = hv.codes
            else:
                row = self._families[band]
                if p.kind.is_euclidean:
                    codes = [e2lsh_hash(f, x) for f in row]
                else:
                    codes = [srp_hash(f, x) for f in row]
            keys.append(_mix_band_key(band, codes))
        return keys

    def insert(self, item_id: int, x: Tensor) -> None:
        """Add (or replace) an item. Re-inserting an id removes its old placements."""
        if item_id in self._items:
            self._remove_placements(item_id)
        keys = self._band_keys(x)
        for band, key in enumerate(keys):
            self._tables[band].setdefault(key, []).append(item_id)
        self._items[item_id] = x
        self._keys[item_id] = keys

    def _remove_placements(self, item_id: int) -> None:
        for band, key in enumerate(self._keys[item_id]):
            bucket = self._tables[band][key]
            bucket.remove(item_id)
            if not bucket:
                del self._tables[band][key]
        del self._items[item_id]
        del self._keys[item_id]

    def query(
        self, x: Tensor, max_candidates: int | None = None, rerank: bool = True
    ) -> list[int]:
        """Candidate ids for x: bucket union, deduplicated, ranked, truncated.

        Euclidean kinds rank by ascending Frobenius distance, sign kinds by
        ascending angle; ties break on id so results are deterministic.
        """
        seen: dict[int, None] = {}
        for band, key in enumerate(self._band_keys(x)):
            for item_id in self._tables[band].get(key, ()):
                seen.setdefault(item_id, None)
        candidates = list(seen)
        if rerank:
            if self.params.kind.is_euclidean:
                metric = lambda i: frobenius_distance(self._items[i], x)
            else:
                metric = lambda i: angle_between(self._items[i], x)
            candidates.sort(key=lambda i: (metric(i), i))
        else:
            candidates.sort()
        if max_candidates is not None:
            candidates = candidates[:max_candidates]
        return candidates

    def contains(self, item_id: int) -> bool:
        return item_id in self._items

    # -- persistence ---------------------------------------------------------

    def save_manifest(self, manifest_path: str | Path, tensor_paths: dict[int, str]) -> None:
        """Write the manifest: parameters plus an id -> tensor-file listing.

        Bucket tables are never serialized; a loader rebuilds them by
        re-hashing the listed files in order. Every indexed id must appear
        in ``tensor_paths``.
        """
        missing = [i for i in self._items if i not in tensor_paths]
        if missing:
            raise ValueError(f"no tensor path recorded for ids {missing}")
        doc = {
            "params": self.params.to_dict(),
            "items": [{"id": i, "path": str(tensor_paths[i])} for i in self._items],
        }
        Path(manifest_path).write_text(json.dumps(doc, indent=2) + "\n")


def load_index(manifest_path: str | Path) -> LshIndex:
    """Rebuild an index from its manifest, re-hashing every listed tensor.

    Relative tensor paths resolve against the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    doc = json.loads(manifest_path.read_text())
    index = LshIndex(IndexParams.from_dict(doc["params"]))
    for entry in doc["items"]:
        path = Path(entry["path"])
        if not path.is_absolute():
            path = manifest_path.parent / path
        index.insert(int(entry["id"]), read_tensor(path))
    return index
