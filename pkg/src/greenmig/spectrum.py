"""Per-link frequency-slot bookkeeping and first-fit spectrum assignment.

A lightpath occupies one contiguous run of slots (payload plus a trailing
guard band), identical on every link of its path. Allocation is first-fit
under a congestion cap: the occupied-slot ratio of the path (union over its
links) must stay within umax after the allocation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .topology import Link, Path, Topology

_EPS = 1e-9


class SpectrumError(RuntimeError):
    """Contract violation on the grid (releasing slots that are not held, ...)."""


@dataclass(frozen=True)
class SlotRange:
    """1-based contiguous allocation: `width` payload slots then `guard` slots."""

    start: int
    width: int
    guard: int = 0

    def __post_init__(self):
        if self.start < 1:
            raise ValueError("slot indices are 1-based")
        if self.width < 1:
            raise ValueError("width must be at least one slot")
        if self.guard < 0:
            raise ValueError("guard cannot be negative")

    @property
    def total(self) -> int:
        return self.width + self.guard

    @property
    def end(self) -> int:
        """Last occupied slot index (guard included), 1-based."""
        return self.start + self.total - 1


def slots_for_bandwidth(gbps: float, level: int, slot_rate_gbps: float) -> int:
    """Number of payload slots for a flow: ceil(gbps / (level * slot rate))."""
    if gbps <= 0 or level <= 0 or slot_rate_gbps <= 0:
        raise ValueError("bandwidth, modulation level, and slot rate must be positive")
    return max(1, math.ceil(gbps / (level * slot_rate_gbps) - _EPS))


def _link_keys(path: Path | Iterable[Link]) -> list[tuple]:
    if isinstance(path, Path):
        return list(path.link_keys)
    return [l.key for l in path]


class SpectrumGrid:
    """Occupancy vectors, one boolean array of `slot_capacity` per link."""

    def __init__(self, links: Topology | Iterable[Link], slot_capacity: int | None = None,
                 slot_rate_gbps: float = 12.5, count_guard_in_congestion: bool = True):
        if isinstance(links, Topology):
            link_list = list(links.links)
            slot_capacity = slot_capacity or links.slot_capacity
        else:
            link_list = list(links)
            slot_capacity = slot_capacity or link_list[0].slot_capacity
        if slot_capacity < 1:
            raise ValueError("slot capacity must be positive")
        self.slot_capacity = int(slot_capacity)
        self.slot_rate_gbps = float(slot_rate_gbps)
        self.count_guard_in_congestion = count_guard_in_congestion
        self._occ: dict[tuple, np.ndarray] = {
            l.key: np.zeros(self.slot_capacity, dtype=bool) for l in link_list
        }

    # -- queries ---------------------------------------------------------

    def occupied_count(self, link_key: tuple) -> int:
        return int(self._occ[link_key].sum())

    def _union(self, path: Path) -> np.ndarray:
        keys = _link_keys(path)
        occ = self._occ
        out = occ[keys[0]].copy()
        for key in keys[1:]:
            np.logical_or(out, occ[key], out=out)
        return out

    def path_occupancy_ratio(self, path: Path) -> float:
        """Fraction of slots blocked somewhere along the path (union over links)."""
        return float(self._union(path).sum()) / self.slot_capacity

    def congestion_feasible(self, path: Path, additional_slots: int, umax: float) -> bool:
        """Would adding `additional_slots` keep the path's occupancy within umax?"""
        if additional_slots < 0:
            raise ValueError("additional_slots must be non-negative")
        used = int(self._union(path).sum())
        return used + additional_slots <= umax * self.slot_capacity + _EPS

    def available_contiguous_bandwidth(self, path: Path, umax: float) -> int:
        """Longest run of slots free on every link, clamped by the congestion cap."""
        free = ~self._union(path)
        run = _longest_run(free)
        budget = int(math.floor(umax * self.slot_capacity + _EPS)) - int((~free).sum())
        return max(0, min(run, budget))

    # -- mutation --------------------------------------------------------

    def first_fit_allocate(self, path: Path, width: int, guard: int,
                           umax: float) -> SlotRange | None:
        """Allocate the lowest-start run of width+guard slots free on all links.

        Returns None (blocked) when no such run exists or the congestion cap
        would be exceeded; the grid is left unchanged in that case.
        """
        if width < 1:
            raise ValueError("width must be at least one slot")
        if not 0 < umax <= 1:
            raise ValueError("umax must be in (0, 1]")
        total = width + guard
        additional = total if self.count_guard_in_congestion else width
        if not self.congestion_feasible(path, additional, umax):
            return None
        free = ~self._union(path)
        start0 = _first_run(free, total)
        if start0 is None:
            return None
        sl = slice(start0, start0 + total)
        for key in _link_keys(path):
            self._occ[key][sl] = True
        return SlotRange(start0 + 1, width, guard)

    def allocate_at(self, path: Path, rng: SlotRange, umax: float | None = None) -> None:
        """Occupy an explicit range on every link of the path.

        Fails loudly if any slot is already taken or the cap would break;
        used to replay recorded assignments during verification.
        """
        if rng.end > self.slot_capacity:
            raise SpectrumError(f"range {rng} exceeds the {self.slot_capacity}-slot grid")
        if umax is not None:
            additional = rng.total if self.count_guard_in_congestion else rng.width
            if not self.congestion_feasible(path, additional, umax):
                raise SpectrumError(f"range {rng} would break the congestion cap {umax}")
        sl = slice(rng.start - 1, rng.start - 1 + rng.total)
        keys = _link_keys(path)
        for key in keys:
            if self._occ[key][sl].any():
                raise SpectrumError(f"slots {rng.start}..{rng.end} not free on link {key}")
        for key in keys:
            self._occ[key][sl] = True

    def release(self, path: Path, rng: SlotRange) -> None:
        """Free a previously allocated range on every link of the path."""
        sl = slice(rng.start - 1, rng.start - 1 + rng.total)
        keys = _link_keys(path)
        for key in keys:
            if not self._occ[key][sl].all():
                raise SpectrumError(
                    f"release of slots {rng.start}..{rng.end} on link {key}: not allocated"
                )
        for key in keys:
            self._occ[key][sl] = False

    def preoccupy_random(self, rng, fraction: float, run_width: int = 4) -> None:
        """Scatter background traffic: random runs per link up to `fraction` occupancy."""
        if not 0 <= fraction <= 1:
            raise ValueError("fraction must be in [0, 1]")
        target = int(fraction * self.slot_capacity)
        for key in sorted(self._occ):
            occ = self._occ[key]
            guardrail = 0
            while occ.sum() < target and guardrail < 10 * self.slot_capacity:
                guardrail += 1
                width = int(rng.integers(1, run_width + 1))
                start = int(rng.integers(0, self.slot_capacity - width + 1))
                occ[start:start + width] = True

    # -- export ----------------------------------------------------------

    def clone(self) -> "SpectrumGrid":
        dup = SpectrumGrid.__new__(SpectrumGrid)
        dup.slot_capacity = self.slot_capacity
        dup.slot_rate_gbps = self.slot_rate_gbps
        dup.count_guard_in_congestion = self.count_guard_in_congestion
        dup._occ = {k: v.copy() for k, v in self._occ.items()}
        return dup

    def snapshot(self) -> dict[str, list[list[int]]]:
        """Occupied runs per link as [start, end] 1-based inclusive pairs."""
        out: dict[str, list[list[int]]] = {}
        for key in sorted(self._occ):
            runs = _runs(self._occ[key])
            out[f"{key[0]}-{key[1]}"] = [[s + 1, e] for s, e in runs]
        return out


def _first_run(free: np.ndarray, total: int) -> int | None:
    """0-based start of the first run of `total` consecutive free slots."""
    idx = np.flatnonzero(free)
    if idx.size < total:
        return None
    window = idx[total - 1:] - idx[: idx.size - total + 1]
    hits = np.flatnonzero(window == total - 1)
    return int(idx[hits[0]]) if hits.size else None


def _longest_run(free: np.ndarray) -> int:
    if not free.any():
        return 0
    padded = np.concatenate(([0], free.astype(np.int8), [0]))
    d = np.diff(padded)
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    return int((ends - starts).max())


def _runs(occ: np.ndarray) -> list[tuple[int, int]]:
    """Occupied runs as (start0, end1) half-open pairs turned inclusive-end."""
    padded = np.concatenate(([0], occ.astype(np.int8), [0]))
    d = np.diff(padded)
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    return [(int(s), int(e)) for s, e in zip(starts, ends)]
