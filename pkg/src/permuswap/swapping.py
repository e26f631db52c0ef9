"""The stratified permutation swapper.

Within each match stratum of size >= 2, records are selected
independently with probability p; whenever exactly one record comes up
selected the whole stratum is redrawn from scratch, so the accepted
selection has size 0 or >= 2.  A uniformly random derangement of the
selected records then permutes their *swap* values only (match and hold
values stay put), and the released output is the saturated contingency
table of the permuted dataset.  The released margins n_mh. and n_m.s
are preserved by construction.

Randomness is drawn from a named substream per stratum, keyed by
(seed, match index), so the output is a pure function of (dataset,
params) no matter in which order strata are processed and bit-identical
under parallel execution.

Derangements are sampled by rejection from uniform permutations of the
selected set (accept iff no fixed point, expected < e retries), which
is exactly uniform over derangements.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Union

import numpy as np

from .budget import derangement_count
from .dataset import ContingencyTable, Dataset, Record, stratum_indices, tabulate

__all__ = [
    "PsaParams",
    "Permutation",
    "SelectionResult",
    "SwapRun",
    "apply_permutation",
    "select_records",
    "sample_derangement",
    "run_psa",
    "run_psa_details",
    "stratum_permutation_prob",
    "to_exact_rate",
]

RateLike = Union[Fraction, float, int, str]


def to_exact_rate(p: RateLike) -> Fraction:
    """Coerce a rate to an exact rational.

    Floats are read through their shortest decimal representation, so
    0.1 means 1/10 (not the binary float), matching how rates are
    written in configs.  Fractions and strings like "1/3" pass through
    exactly.
    """
    if isinstance(p, Fraction):
        return p
    if isinstance(p, int):
        return Fraction(p)
    if isinstance(p, float):
        return Fraction(str(p))
    if isinstance(p, str):
        return Fraction(p)
    raise TypeError(f"cannot interpret {p!r} as a rate")


def _validate_rate(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"swap rate must lie in [0, 1], got {p}")
    return p


@dataclass(frozen=True)
class PsaParams:
    """Swap-selection probability and the 64-bit run seed."""

    p: float
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _validate_rate(self.p))
        object.__setattr__(self, "seed", int(self.seed))


def _normalized_seed(seed: int) -> int:
    # two's-complement wrap keeps SeedSequence entropy non-negative
    return int(seed) & (2**64 - 1)


def _stratum_rng(seed: int, m: int) -> np.random.Generator:
    return np.random.default_rng([_normalized_seed(seed), int(m)])


@dataclass(frozen=True)
class Permutation:
    """A bijection g on record positions; position i takes the swap
    value of position g(i).

    The derangement count |{i : g(i) != i}| of a bijection is never 1,
    which is exactly the constraint the selection stage enforces.
    """

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        mapping = tuple(int(j) for j in self.mapping)
        object.__setattr__(self, "mapping", mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise ValueError("mapping is not a bijection on record positions")

    def __len__(self) -> int:
        return len(self.mapping)

    @property
    def derange_count(self) -> int:
        return sum(1 for i, j in enumerate(self.mapping) if i != j)

    @property
    def is_identity(self) -> bool:
        return self.derange_count == 0

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))


def apply_permutation(perm: Permutation, x: Dataset) -> Dataset:
    """Permute swap values only: record i becomes (m_i, h_i, s_g(i))."""
    if len(perm) != len(x.records):
        raise ValueError("permutation length does not match record count")
    recs = x.records
    return Dataset(
        tuple(Record(r.m, r.h, recs[j].s) for r, j in zip(recs, perm.mapping)),
        x.domain,
        x.schema,
    )


class SelectionResult(NamedTuple):
    """Accepted selection (stratum-local positions) plus redraw count."""

    indices: tuple[int, ...]
    retries: int


def select_records(
    stratum_size: int, p: float, rng: np.random.Generator
) -> SelectionResult:
    """Independent selection, redrawn whenever exactly one record is hit.

    The accepted subset therefore has size 0 or >= 2, with conditional
    law P(S) = p^|S| (1-p)^(n-|S|) / (1 - n p (1-p)^(n-1)).  For
    0 < p < 1 the loop terminates with probability one; there is no
    iteration cap, but the retry count is reported for diagnostics.
    """
    n = int(stratum_size)
    if n < 2:
        raise ValueError("selection needs a stratum of at least two records")
    p = _validate_rate(p)
    retries = 0
    while True:
        mask = rng.random(n) < p
        hits = int(mask.sum())
        if hits != 1:
            return SelectionResult(tuple(int(i) for i in np.flatnonzero(mask)), retries)
        retries += 1


def sample_derangement(k: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform derangement of 0..k-1 by rejection; identity for k = 0.

    k = 1 is a contract violation: the selection stage never produces a
    single selected record.
    """
    k = int(k)
    if k == 1:
        raise ValueError("no derangement of a single record exists")
    if k == 0:
        return ()
    positions = np.arange(k)
    while True:
        perm = rng.permutation(k)
        if not np.any(perm == positions):
            return tuple(int(j) for j in perm)


def stratum_permutation_prob(k_g: int, n: int, p: RateLike) -> Fraction:
    """Exact chance that the swapper realizes a given permutation g
    deranging k_g of the stratum's n records:

        p^k (1-p)^(n-k) / ((1 - n p (1-p)^(n-1)) d(k))
    """
    k = int(k_g)
    n = int(n)
    if n < 0 or k > n:
        raise ValueError("derange count cannot exceed stratum size")
    if k == 1:
        raise ValueError("permutations never derange exactly one record")
    if k < 0:
        raise ValueError("derange count must be non-negative")
    prob = to_exact_rate(p)
    if not 0 < prob < 1:
        raise ValueError("exact permutation probabilities require 0 < p < 1")
    q = 1 - prob
    exactly_one = n * prob * q ** (n - 1)
    return prob**k * q ** (n - k) / ((1 - exactly_one) * derangement_count(k))


@dataclass(frozen=True)
class SwapRun:
    """One realized run: output table plus reproducibility diagnostics.

    raw_selection_rate counts every selected record; effective_swap_rate
    counts only records whose swap value actually changed (a permutation
    can move a record onto an equal swap value, which changes nothing in
    the table).
    """

    table: ContingencyTable
    permutation: Permutation
    selected_count: int
    selection_retries: int
    raw_selection_rate: float
    effective_swap_rate: float


def run_psa_details(x: Dataset, params: PsaParams) -> SwapRun:
    """Run the swapper and keep the realized permutation and rates."""
    n = len(x.records)
    mapping = list(range(n))
    selected_total = 0
    retries_total = 0
    for m, idx in sorted(stratum_indices(x).items()):
        if len(idx) < 2:
            continue
        rng = _stratum_rng(params.seed, m)
        selection = select_records(len(idx), params.p, rng)
        retries_total += selection.retries
        selected_total += len(selection.indices)
        local = sample_derangement(len(selection.indices), rng)
        for pos, target in zip(selection.indices, local):
            mapping[idx[pos]] = idx[selection.indices[target]]
    perm = Permutation(tuple(mapping))
    swapped = apply_permutation(perm, x)
    changed = sum(
        1 for a, b in zip(x.records, swapped.records) if a.s != b.s
    )
    return SwapRun(
        table=tabulate(swapped),
        permutation=perm,
        selected_count=selected_total,
        selection_retries=retries_total,
        raw_selection_rate=selected_total / n if n else 0.0,
        effective_swap_rate=changed / n if n else 0.0,
    )


def run_psa(x: Dataset, params: PsaParams) -> ContingencyTable:
    """Release the saturated contingency table of the swapped dataset."""
    return run_psa_details(x, params).table
