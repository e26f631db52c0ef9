"""Categorical microdata after role cross-classification.

Every record is a triple of dense 0-based category indices
``(match, hold, swap)``.  A :class:`Dataset` keeps its records in order
(the swapper needs stable positions), but all public equality and
distance semantics are multiset-level: two datasets that differ only by
record order are equal, at distance zero, and in the same universe.

The fully saturated contingency table ``counts[m, h, s]`` determines a
dataset up to record order and is the output type of the swapping
mechanism.  The released margins are the match-by-hold counts
``n_mh.`` and the match-by-swap counts ``n_m.s``; datasets sharing both
margin families form a *universe*, the scope within which the privacy
guarantee is stated.

Degenerate shapes (an axis of size zero, or no records) are legal and
all operations return zero/empty results for them.
"""

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Union

import numpy as np

__all__ = [
    "Record",
    "Domain",
    "DatasetSchema",
    "Dataset",
    "ContingencyTable",
    "SwapInvariants",
    "DomainMismatchError",
    "tabulate",
    "swap_invariants",
    "l1_distance",
    "hamming_distance",
    "same_universe",
    "max_stratum_b",
    "dataset_from_table",
    "stratum_indices",
]


class DomainMismatchError(ValueError):
    """Raised when an operation receives datasets over different domains."""


class Record(NamedTuple):
    """One microdata record: (match, hold, swap) category indices."""

    m: int
    h: int
    s: int


class Domain(NamedTuple):
    """Category counts (M, H, S) for the three cross-classified axes."""

    match: int
    hold: int
    swap: int

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.match, self.hold, self.swap)

    @property
    def cells(self) -> int:
        return self.match * self.hold * self.swap


@dataclass(frozen=True)
class DatasetSchema:
    """Optional provenance: source column names and category labels.

    Labels are per-axis, indexed by category; composite categories built
    by cross-classification join their per-column labels with ``|``.
    The schema never participates in equality or distance.
    """

    match_columns: tuple[str, ...] = ()
    hold_columns: tuple[str, ...] = ()
    swap_columns: tuple[str, ...] = ()
    match_labels: tuple[str, ...] = ()
    hold_labels: tuple[str, ...] = ()
    swap_labels: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered records over a fixed domain.

    Equality and hashing are multiset-level (record order ignored,
    schema ignored); the stored order only matters to permutation
    bookkeeping inside the swapper.
    """

    records: tuple[Record, ...]
    domain: Domain
    schema: Union[DatasetSchema, None] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "records", tuple(Record(*r) for r in self.records)
        )
        mx, hx, sx = self.domain
        for i, rec in enumerate(self.records):
            if not (0 <= rec.m < mx and 0 <= rec.h < hx and 0 <= rec.s < sx):
                raise ValueError(
                    f"record {i} = {tuple(rec)} outside domain {tuple(self.domain)}"
                )

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.domain == other.domain and sorted(self.records) == sorted(
            other.records
        )

    def __hash__(self) -> int:
        return hash((self.domain, tuple(sorted(self.records))))

    def reordered(self, order: Iterable[int]) -> "Dataset":
        """Same multiset with records listed in the given position order."""
        order = list(order)
        if sorted(order) != list(range(len(self.records))):
            raise ValueError("order must be a permutation of record positions")
        return Dataset(
            tuple(self.records[i] for i in order), self.domain, self.schema
        )


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Fully saturated M x H x S count tensor ``n_mhs``.

    The canonical serialization used as a mapping key everywhere is the
    row-major flattened tuple of counts (m slowest, s fastest); the
    string form prefixes the shape, ``"MxHxS:c0,c1,..."``.
    """

    counts: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.counts, dtype=np.int64)
        if arr.ndim != 3:
            raise ValueError(f"expected a 3-way tensor, got shape {arr.shape}")
        if (arr < 0).any():
            raise ValueError("contingency counts must be non-negative")
        arr.flags.writeable = False
        object.__setattr__(self, "counts", arr)

    @property
    def domain(self) -> Domain:
        return Domain(*self.counts.shape)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def canonical_key(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.counts.ravel())

    def canonical_string(self) -> str:
        mx, hx, sx = self.counts.shape
        body = ",".join(str(c) for c in self.canonical_key())
        return f"{mx}x{hx}x{sx}:{body}"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContingencyTable):
            return NotImplemented
        return self.counts.shape == other.counts.shape and bool(
            np.array_equal(self.counts, other.counts)
        )

    def __hash__(self) -> int:
        return hash((self.counts.shape, self.canonical_key()))


@dataclass(frozen=True, eq=False)
class SwapInvariants:
    """The released margin vector: all ``n_mh.`` and all ``n_m.s``.

    Both families tabulate the same stratum sizes ``n_m..``; the
    constructor rejects inconsistent pairs.
    """

    mh: np.ndarray
    ms: np.ndarray

    def __post_init__(self) -> None:
        mh = np.ascontiguousarray(self.mh, dtype=np.int64)
        ms = np.ascontiguousarray(self.ms, dtype=np.int64)
        if mh.ndim != 2 or ms.ndim != 2 or mh.shape[0] != ms.shape[0]:
            raise ValueError("margins must be M x H and M x S matrices")
        if not np.array_equal(mh.sum(axis=1), ms.sum(axis=1)):
            raise ValueError("mh and ms margins imply different stratum sizes")
        mh.flags.writeable = False
        ms.flags.writeable = False
        object.__setattr__(self, "mh", mh)
        object.__setattr__(self, "ms", ms)

    @property
    def stratum_sizes(self) -> np.ndarray:
        """One-dimensional margin ``n_m..``."""
        return self.mh.sum(axis=1)

    @property
    def hold_totals(self) -> np.ndarray:
        """One-dimensional margin ``n_.h.``."""
        return self.mh.sum(axis=0)

    @property
    def swap_totals(self) -> np.ndarray:
        """One-dimensional margin ``n_..s``."""
        return self.ms.sum(axis=0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SwapInvariants):
            return NotImplemented
        return (
            self.mh.shape == other.mh.shape
            and self.ms.shape == other.ms.shape
            and bool(np.array_equal(self.mh, other.mh))
            and bool(np.array_equal(self.ms, other.ms))
        )

    def __hash__(self) -> int:
        return hash(
            (
                self.mh.shape,
                self.ms.shape,
                tuple(int(v) for v in self.mh.ravel()),
                tuple(int(v) for v in self.ms.ravel()),
            )
        )


TableLike = Union[Dataset, ContingencyTable]


def _as_table(data: TableLike) -> ContingencyTable:
    if isinstance(data, ContingencyTable):
        return data
    if isinstance(data, Dataset):
        return tabulate(data)
    raise TypeError(f"expected Dataset or ContingencyTable, got {type(data)!r}")


def tabulate(x: Dataset) -> ContingencyTable:
    """Count records into the fully saturated M x H x S table."""
    counts = np.zeros(x.domain.shape, dtype=np.int64)
    if x.records:
        arr = np.asarray(x.records, dtype=np.int64)
        np.add.at(counts, (arr[:, 0], arr[:, 1], arr[:, 2]), 1)
    return ContingencyTable(counts)


def swap_invariants(data: TableLike) -> SwapInvariants:
    """Margins released exactly by swapping: ``n_mh.`` and ``n_m.s``."""
    t = _as_table(data)
    return SwapInvariants(mh=t.counts.sum(axis=2), ms=t.counts.sum(axis=1))


def _require_same_domain(a: TableLike, b: TableLike) -> tuple[ContingencyTable, ContingencyTable]:
    ta, tb = _as_table(a), _as_table(b)
    if ta.domain != tb.domain:
        raise DomainMismatchError(
            f"domains differ: {tuple(ta.domain)} vs {tuple(tb.domain)}"
        )
    return ta, tb


def l1_distance(x: TableLike, y: TableLike) -> int:
    """Cell-wise l1 distance between the saturated tables."""
    tx, ty = _require_same_domain(x, y)
    return int(np.abs(tx.counts - ty.counts).sum())


def hamming_distance(x: TableLike, y: TableLike) -> Union[int, float]:
    """Record-level Hamming distance: half the l1 distance.

    Defined as ``math.inf`` when the record counts differ (infinity is a
    legitimate distance value here, not an error).  For equal counts the
    l1 distance is always even; this is asserted.
    """
    tx, ty = _require_same_domain(x, y)
    if tx.total != ty.total:
        return math.inf
    l1 = int(np.abs(tx.counts - ty.counts).sum())
    assert l1 % 2 == 0, "l1 distance between equal-size datasets must be even"
    return l1 // 2


def same_universe(x: TableLike, y: TableLike) -> bool:
    """True iff both datasets share the released margin vector."""
    _require_same_domain(x, y)
    return swap_invariants(x) == swap_invariants(y)


def max_stratum_b(data: TableLike) -> int:
    """Largest stratum containing two records with different values.

    Strata whose records are all identical do not count, so the result
    is 0 when every stratum is constant (or empty).
    """
    t = _as_table(data)
    best = 0
    sizes = t.counts.sum(axis=(1, 2))
    peaks = t.counts.max(axis=(1, 2)) if t.domain.cells else sizes * 0
    for m in range(t.domain.match):
        n_m = int(sizes[m])
        if n_m >= 2 and int(peaks[m]) < n_m:
            best = max(best, n_m)
    return best


def dataset_from_table(table: ContingencyTable) -> Dataset:
    """Canonical dataset for a table: records sorted ascending."""
    records = []
    counts = table.counts
    for m, h, s in np.argwhere(counts):
        records.extend([Record(int(m), int(h), int(s))] * int(counts[m, h, s]))
    return Dataset(tuple(records), table.domain)


def stratum_indices(x: Dataset) -> dict[int, list[int]]:
    """Record positions grouped by match category, in input order."""
    groups: dict[int, list[int]] = {m: [] for m in range(x.domain.match)}
    for i, rec in enumerate(x.records):
        groups[rec.m].append(i)
    return groups
