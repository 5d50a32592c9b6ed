"""Sliding-window statistical features over multi-device pollutant channels.

For every device and every pollutant the same nine operators run on the
window: min, max, avg, std, roc_raise, roc_fall, peak_c, peak_dur, long_stay.
The concatenation over devices x pollutants x operators is the feature
vector; its layout is fixed by :func:`feature_schema`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import POLLUTANTS, PollutantKind
from .errors import (
    ConfigMismatch,
    EmptyDevices,
    EmptyWindow,
    ThresholdOrder,
    TooManyMissing,
    WindowTooShort,
)

#: Operator names in vector order.
FEATURE_FNS: tuple[str, ...] = (
    "min", "max", "avg", "std",
    "roc_raise", "roc_fall",
    "peak_c", "peak_dur", "long_stay",
)

#: Default {safe, unsafe} thresholds per pollutant (WHO/ASHRAE-inspired;
#: the classifiers only need them to be consistent, all are overridable).
DEFAULT_THRESHOLDS: dict[PollutantKind, tuple[float, float]] = {
    PollutantKind.CO2: (800.0, 1200.0),
    PollutantKind.VOC: (220.0, 660.0),
    PollutantKind.PM2_5: (12.0, 35.0),
    PollutantKind.PM10: (54.0, 150.0),
    PollutantKind.TEMPERATURE: (28.0, 32.0),
    PollutantKind.HUMIDITY: (60.0, 70.0),
}


@dataclass(frozen=True)
class FeatureConfig:
    """Window length, thresholds, and gap policy for feature extraction."""

    tau: float = 600.0                  # window length, seconds
    thresholds: Mapping[PollutantKind, tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_THRESHOLDS)
    )
    min_run: float = 5.0                # peak runs shorter than this don't count, seconds
    ma_width: int = 1                   # centered moving-average width, samples; 1 = off
    missing_tolerance: float = 0.10     # max missing fraction per channel

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ConfigMismatch(f"tau must be positive, got {self.tau}")
        if self.ma_width < 1 or self.ma_width % 2 == 0:
            raise ConfigMismatch(f"ma_width must be odd and >= 1, got {self.ma_width}")
        if not 0.0 <= self.missing_tolerance < 1.0:
            raise ConfigMismatch("missing_tolerance must be in [0, 1)")
        for kind, (safe, unsafe) in self.thresholds.items():
            if safe > unsafe:
                raise ThresholdOrder(safe, unsafe)

    def threshold_pair(self, kind: PollutantKind) -> tuple[float, float]:
        return self.thresholds.get(kind, DEFAULT_THRESHOLDS[kind])


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature names ``<device>.<pollutant>.<fn>``.

    Order is devices (as given) x pollutant order x operator order, so the
    length is always ``len(devices) * 6 * 9``.
    """

    devices: tuple[str, ...]
    names: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)


#: A feature vector is a plain float array laid out per a FeatureSchema.
FeatureVector = np.ndarray


def feature_schema(devices: Sequence[str], cfg: FeatureConfig | None = None) -> FeatureSchema:
    """Deterministic schema for the given device order."""
    if not devices:
        raise EmptyDevices("need at least one device")
    names = tuple(
        f"{d}.{p.token}.{fn}" for d in devices for p in POLLUTANTS for fn in FEATURE_FNS
    )
    return FeatureSchema(devices=tuple(devices), names=names)


def basic_stats(x: np.ndarray) -> tuple[float, float, float, float]:
    """(min, max, avg, population std) of a non-empty window."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise EmptyWindow("basic_stats needs a non-empty window")
    return float(x.min()), float(x.max()), float(x.mean()), float(x.std())


def rate_of_change(x: np.ndarray, w: int = 1, step: float = 1.0) -> tuple[float, float]:
    """Extremal per-second slopes of the (optionally smoothed) window.

    A centered moving average of odd width ``w`` runs first (w=1 disables
    it), then roc_raise = max(0, max first difference / step) and
    roc_fall = min(0, min first difference / step), so
    roc_fall <= 0 <= roc_raise always.
    """
    x = np.asarray(x, dtype=float)
    if w < 1 or w % 2 == 0:
        raise ConfigMismatch(f"smoothing width must be odd and >= 1, got {w}")
    if x.size < 2:
        raise WindowTooShort(f"need >= 2 samples, got {x.size}")
    if w > 1:
        if x.size - w + 1 < 2:
            raise WindowTooShort(f"window of {x.size} too short for width-{w} smoothing")
        x = np.convolve(x, np.full(w, 1.0 / w), mode="valid")
    diffs = np.diff(x) / step
    return max(0.0, float(diffs.max())), min(0.0, float(diffs.min()))


def threshold_stats(
    x: np.ndarray,
    safe: float,
    unsafe: float,
    min_run: float = 5.0,
    step: float = 1.0,
) -> tuple[int, float, float]:
    """(peak_c, peak_dur, long_stay) for one window.

    peak_c counts maximal runs strictly above ``unsafe`` lasting at least
    ``min_run`` seconds, peak_dur sums the seconds inside counted runs, and
    long_stay is the total seconds strictly above ``safe`` with no run-length
    filter.
    """
    if safe > unsafe:
        raise ThresholdOrder(safe, unsafe)
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise EmptyWindow("threshold_stats needs a non-empty window")

    above = x > unsafe
    # Run boundaries of the `above` mask.
    padded = np.diff(np.concatenate(([0], above.view(np.int8), [0])))
    starts = np.flatnonzero(padded == 1)
    ends = np.flatnonzero(padded == -1)
    run_seconds = (ends - starts) * step
    counted = run_seconds >= min_run
    peak_c = int(counted.sum())
    peak_dur = float(run_seconds[counted].sum())
    long_stay = float((x > safe).sum() * step)
    return peak_c, peak_dur, long_stay


def _fill_missing(x: np.ndarray) -> np.ndarray:
    """Linear interpolation of NaN cells; edge gaps hold the nearest value."""
    missing = np.isnan(x)
    if not missing.any():
        return x
    idx = np.arange(x.size)
    valid = ~missing
    return np.interp(idx, idx[valid], x[valid])


def extract_features(
    window: Mapping[str, Mapping[PollutantKind, np.ndarray]],
    cfg: FeatureConfig,
    schema: FeatureSchema,
    step: float = 1.0,
) -> FeatureVector:
    """Feature vector of one window, laid out per ``schema``.

    ``window`` maps device -> pollutant -> samples covering exactly tau
    seconds (NaN marks missing cells). Channels whose missing fraction
    exceeds the tolerance raise TooManyMissing; the rest are linearly
    interpolated before the operators run.
    """
    expected = int(round(cfg.tau / step))
    if abs(cfg.tau - expected * step) > 1e-9 * max(1.0, cfg.tau):
        raise ConfigMismatch(f"tau={cfg.tau} is not a multiple of step={step}")

    out = np.empty(len(schema), dtype=float)
    pos = 0
    for device in schema.devices:
        channels = window.get(device)
        if channels is None:
            raise ConfigMismatch(f"window lacks device {device!r}")
        for kind in POLLUTANTS:
            x = channels.get(kind)
            if x is None:
                raise ConfigMismatch(f"window lacks channel {device}.{kind.token}")
            x = np.asarray(x, dtype=float)
            if x.size != expected:
                raise ConfigMismatch(
                    f"channel {device}.{kind.token} has {x.size} cells, expected {expected}"
                )
            frac = float(np.isnan(x).mean())
            if frac > cfg.missing_tolerance:
                raise TooManyMissing(device, kind.token, frac)
            if frac == 1.0:
                raise TooManyMissing(device, kind.token, frac)
            x = _fill_missing(x)

            lo, hi, avg, std = basic_stats(x)
            raise_, fall = rate_of_change(x, cfg.ma_width, step)
            safe, unsafe = cfg.threshold_pair(kind)
            peak_c, peak_dur, long_stay = threshold_stats(
                x, safe, unsafe, cfg.min_run, step
            )
            out[pos:pos + 9] = (
                lo, hi, avg, std, raise_, fall, peak_c, peak_dur, long_stay
            )
            pos += 9
    return out
