"""Synthetic categorical microdata with a controllable stratum bound.

Each stratum spec becomes one match category.  A *mixed* stratum of
size >= 2 is guaranteed to contain two records with different
(hold, swap) values, so it counts toward the stratum bound b; a
*constant* stratum holds identical records and never does, no matter
how large.  The largest mixed stratum therefore pins b exactly.

Records are drawn from a named substream per stratum, so output is a
pure function of (specs, domain sizes, seed).  Labels are zero-padded,
which makes written CSVs round-trip through ingestion (inferred
category order is lexicographic, and zero-padded labels sort like their
indices).
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Dataset, DatasetSchema, Domain, Record
from .ingest import default_axis_labels

__all__ = ["StratumSpec", "synthesize"]


@dataclass(frozen=True)
class StratumSpec:
    size: int
    mixed: bool = True

    def __post_init__(self) -> None:
        if self.size < 0:
            raise ValueError("stratum size must be non-negative")


def synthesize(
    strata: Sequence[StratumSpec],
    hold_levels: int,
    swap_levels: int,
    seed: int = 0,
) -> Dataset:
    """Generate one record stream per stratum spec."""
    if hold_levels < 1 or swap_levels < 1:
        raise ValueError("hold and swap axes need at least one level")
    records: list[Record] = []
    for m, spec in enumerate(strata):
        rng = np.random.default_rng([int(seed) & (2**64 - 1), m])
        if spec.mixed:
            hs = rng.integers(0, hold_levels, size=spec.size)
            ss = rng.integers(0, swap_levels, size=spec.size)
            if spec.size >= 2:
                if hold_levels * swap_levels < 2:
                    raise ValueError(
                        "a mixed stratum of size >= 2 needs at least two (hold, swap) cells"
                    )
                distinct = any(
                    (hs[i], ss[i]) != (hs[0], ss[0]) for i in range(1, spec.size)
                )
                if not distinct:
                    # force one differing record so the stratum stays mixed
                    if swap_levels > 1:
                        ss[1] = (ss[1] + 1) % swap_levels
                    else:
                        hs[1] = (hs[1] + 1) % hold_levels
            records.extend(
                Record(m, int(h), int(s)) for h, s in zip(hs, ss)
            )
        else:
            h = int(rng.integers(0, hold_levels))
            s = int(rng.integers(0, swap_levels))
            records.extend(Record(m, h, s) for _ in range(spec.size))
    domain = Domain(len(strata), hold_levels, swap_levels)
    schema = DatasetSchema(
        match_columns=("match",),
        hold_columns=("hold",),
        swap_columns=("swap",),
        match_labels=default_axis_labels("m", domain.match),
        hold_labels=default_axis_labels("h", domain.hold),
        swap_labels=default_axis_labels("s", domain.swap),
    )
    return Dataset(tuple(records), domain, schema)
