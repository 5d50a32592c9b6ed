"""Domain types shared by every module: pollutants, samples, activity labels.

All types are immutable values and safe to share between concurrent tasks.
Timestamps are unix seconds as 64-bit floats; all time arithmetic is in
seconds.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .errors import (
    EmptyReadings,
    HumidityOutOfRange,
    InvalidDeviceId,
    InvalidTimestamp,
    NegativeConcentration,
    NonFiniteReading,
    UnknownLabel,
)


class PollutantKind(Enum):
    """The six sensed channels, in the fixed order feature schemas depend on.

    The value doubles as the wire/CSV token for the channel.
    """

    CO2 = "co2"            # ppm
    VOC = "voc"            # sensor index, dimensionless
    PM2_5 = "pm25"         # ug/m^3
    PM10 = "pm10"          # ug/m^3
    TEMPERATURE = "t"      # degrees C
    HUMIDITY = "rh"        # % relative humidity

    @property
    def token(self) -> str:
        return self.value

    @classmethod
    def from_token(cls, token: str) -> "PollutantKind":
        try:
            return cls(token)
        except ValueError:
            raise KeyError(f"unknown pollutant token {token!r}") from None


#: Fixed iteration order; feature vectors and wire formats index into this.
POLLUTANTS: tuple[PollutantKind, ...] = tuple(PollutantKind)

#: Concentration channels that must be non-negative.
_NON_NEGATIVE = frozenset({PollutantKind.CO2, PollutantKind.PM2_5, PollutantKind.PM10})

_DEVICE_ID_RE = re.compile(r"^[!-~]{1,32}$")


def validate_device_id(device: str) -> str:
    """Check a device id (1-32 visible ASCII chars) and return it unchanged."""
    if not isinstance(device, str) or not _DEVICE_ID_RE.match(device):
        raise InvalidDeviceId(str(device))
    return device


class ActivityLabel(Enum):
    """The eight annotated activity classes; values are the canonical texts."""

    ENTER = "enter"
    EXIT = "exit"
    FAN_ON = "fan_on"
    FAN_OFF = "fan_off"
    AC_ON = "ac_on"
    AC_OFF = "ac_off"
    GATHERING = "gathering"
    EATING = "eating"

    @property
    def text(self) -> str:
        return self.value


#: Fixed class order used for reports and score vectors.
LABELS: tuple[ActivityLabel, ...] = tuple(ActivityLabel)


def parse_activity_label(text: str, line: int | None = None) -> ActivityLabel:
    """Parse a label text; case-insensitive, tolerates spaces and hyphens.

    Raises UnknownLabel for anything outside the eight-class set.
    """
    normalized = re.sub(r"[\s\-]+", "_", str(text).strip().lower())
    try:
        return ActivityLabel(normalized)
    except ValueError:
        raise UnknownLabel(str(text), line) from None


@dataclass(frozen=True)
class PollutantSample:
    """One timestamped multi-pollutant reading from one device.

    Readings may be partial (a sensor can drop a field) but never empty.
    """

    ts: float
    device: str
    readings: Mapping[PollutantKind, float]

    def reading(self, kind: PollutantKind) -> float | None:
        return self.readings.get(kind)


def validate_sample(sample: PollutantSample) -> PollutantSample:
    """Return the sample unchanged if every field invariant holds.

    Raises NonFiniteReading, NegativeConcentration, HumidityOutOfRange or
    EmptyReadings, each naming the offending field.
    """
    if not isinstance(sample.ts, (int, float)) or not math.isfinite(sample.ts):
        raise InvalidTimestamp(sample.ts)
    validate_device_id(sample.device)
    if not sample.readings:
        raise EmptyReadings()
    for kind, value in sample.readings.items():
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise NonFiniteReading(kind.token, value)
        if kind in _NON_NEGATIVE and value < 0:
            raise NegativeConcentration(kind.token, value)
        if kind is PollutantKind.HUMIDITY and not 0.0 <= value <= 100.0:
            raise HumidityOutOfRange(value)
    return sample


@dataclass(frozen=True, order=True)
class ActivityAnnotation:
    """A ground-truth activity event; an instant, not an interval."""

    ts: float
    label: ActivityLabel = field(compare=False)
    annotator: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not math.isfinite(self.ts):
            raise InvalidTimestamp(self.ts)
