"""Randomly right-censored samples: construction, ordering, top-k views, CSV I/O."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributions import Distribution
from .errors import DataError, DomainError, KRangeError, ParseError

__all__ = [
    "CensoredSample",
    "SortedCensoredSample",
    "TailView",
    "generate_censored",
    "sort_with_concomitants",
    "top_k_view",
    "uncensored_fraction",
    "read_survival_csv",
    "write_survival_csv",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class CensoredSample:
    """Observed minima ``z`` and indicators ``delta`` (1 = event observed)."""

    z: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        z = np.array(self.z, dtype=float)
        delta = np.array(self.delta)
        if z.ndim != 1 or delta.ndim != 1:
            raise DataError("z and delta must be one-dimensional")
        if z.size == 0:
            raise DataError("a censored sample needs at least one observation")
        if z.size != delta.size:
            raise DataError(f"length mismatch: {z.size} observations, {delta.size} indicators")
        if not np.all(np.isin(delta, (0, 1))):
            raise DataError("censoring indicators must be 0 or 1")
        object.__setattr__(self, "z", _frozen(z))
        object.__setattr__(self, "delta", _frozen(delta.astype(np.int8)))

    @property
    def n(self) -> int:
        return int(self.z.size)

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True, eq=False)
class SortedCensoredSample:
    z_sorted: np.ndarray
    delta_concomitant: np.ndarray
    permutation: np.ndarray

    @property
    def n(self) -> int:
        return int(self.z_sorted.size)

    def unsort(self) -> CensoredSample:
        z = np.empty_like(self.z_sorted)
        d = np.empty_like(self.delta_concomitant)
        z[self.permutation] = self.z_sorted
        d[self.permutation] = self.delta_concomitant
        return CensoredSample(z, d)


@dataclass(frozen=True, eq=False)
class TailView:
    """Top-k ratios Z_{n-i+1,n} / Z_{n-k,n}, i = 1 (largest) .. k, with indicators.

    The threshold observation's own indicator is not part of the view.
    """

    k: int
    threshold: float
    ratios: np.ndarray
    delta_top: np.ndarray

    @classmethod
    def from_arrays(cls, ratios, delta_top, threshold: float = 1.0) -> "TailView":
        """Build a view directly from ratios (largest first) and indicators."""
        r = np.asarray(ratios, dtype=float)
        raw = np.asarray(delta_top)
        if r.size != raw.size or r.size < 1:
            raise DataError("ratios and delta_top must be nonempty and of equal length")
        if not (r[1:] <= r[:-1]).all() or not r[-1] >= 1:
            raise DataError("ratios must be nonincreasing and >= 1")
        # validate before the int8 cast, which would wrap e.g. 256 to 0
        if not ((raw == 0) | (raw == 1)).all():
            raise DataError("delta_top entries must be 0 or 1")
        return cls(int(r.size), float(threshold), _frozen(r), _frozen(raw.astype(np.int8)))


def generate_censored(
    f_dist: Distribution, g_dist: Distribution, n: int, rng: np.random.Generator
) -> CensoredSample:
    """Draw Z = min(X, Y), delta = 1{X <= Y} with X ~ f_dist and Y ~ g_dist.

    X and Y use two child streams spawned from ``rng`` so that the event times
    do not depend on the censoring family.
    """
    rx, ry = rng.spawn(2)
    x = f_dist.sample(rx, n)
    y = g_dist.sample(ry, n)
    return CensoredSample(np.minimum(x, y), (x <= y).astype(np.int8))


def sort_with_concomitants(sample: CensoredSample) -> SortedCensoredSample:
    """Stable ascending sort carrying the indicators along.

    Among exactly tied values, uncensored observations come first, so a
    subject censored at t is still at risk for an event at t. Ties with equal
    indicators keep their input order.
    """
    # lexsort: last key is primary; (1 - delta) puts events before censorings
    perm = np.lexsort((1 - sample.delta, sample.z))
    return SortedCensoredSample(
        _frozen(sample.z[perm]), _frozen(sample.delta[perm]), _frozen(perm)
    )


def top_k_view(sorted_sample: SortedCensoredSample, k: int) -> TailView:
    n = sorted_sample.n
    if not (1 <= k <= n - 1):
        raise KRangeError(f"k must satisfy 1 <= k <= n - 1 = {n - 1}, got {k}")
    threshold = float(sorted_sample.z_sorted[n - k - 1])
    if not threshold > 0:
        raise DomainError(f"threshold Z_(n-k,n) = {threshold} must be positive")
    top = sorted_sample.z_sorted[n - k :][::-1]
    return TailView(
        k,
        threshold,
        _frozen(top / threshold),
        _frozen(sorted_sample.delta_concomitant[n - k :][::-1].copy()),
    )


def uncensored_fraction(view: TailView) -> float:
    return float(np.mean(view.delta_top))


def read_survival_csv(path: str | Path) -> CensoredSample:
    """Read a ``time,status`` file; status 1 = event observed, 0 = censored.

    Extra columns are ignored and blank lines skipped. Row numbers in errors
    count the header as row 1.
    """
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    times: list[float] = []
    status: list[int] = []
    with fh:
        reader = csv.reader(fh)
        header = None
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if header is None:
                header = [c.strip().lower() for c in row]
                missing = {"time", "status"} - set(header)
                if missing:
                    raise ParseError(f"missing column(s) {sorted(missing)}", row_no)
                i_time, i_status = header.index("time"), header.index("status")
                continue
            if len(row) <= max(i_time, i_status):
                raise ParseError("too few fields", row_no)
            t_raw, s_raw = row[i_time].strip(), row[i_status].strip()
            try:
                t = float(t_raw)
            except ValueError:
                raise ParseError(f"nonnumeric time {t_raw!r}", row_no) from None
            if not math.isfinite(t) or t <= 0:
                raise ParseError(f"time must be positive and finite, got {t_raw!r}", row_no)
            if s_raw not in ("0", "1"):
                try:
                    s_val = float(s_raw)
                except ValueError:
                    s_val = None
                if s_val not in (0.0, 1.0):
                    raise ParseError(f"status must be 0 or 1, got {s_raw!r}", row_no)
                s_raw = str(int(s_val))
            times.append(t)
            status.append(int(s_raw))
    if header is None:
        raise ParseError("empty file, expected a time,status header", 1)
    if not times:
        raise DataError(f"{path} contains no observations")
    return CensoredSample(np.array(times), np.array(status))


def write_survival_csv(sample: CensoredSample, path: str | Path) -> None:
    """Write ``time,status`` with round-trip float formatting."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("time,status\n")
        for t, d in zip(sample.z.tolist(), sample.delta.tolist()):
            fh.write(f"{t!r},{d}\n")
