"""Exception taxonomy shared by all airshadow modules.

The CLI maps these onto exit codes: UsageError -> 1, DataError -> 2,
anything else -> 3.
"""

from __future__ import annotations


class AirshadowError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(AirshadowError):
    """Bad command-line invocation or inconsistent options."""


class DataError(AirshadowError):
    """Malformed, out-of-range, or otherwise unusable input data."""


# --- core validation ---------------------------------------------------------

class UnknownLabel(DataError):
    def __init__(self, text: str, line: int | None = None):
        self.text = text
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"unknown activity label {text!r}{where}")


class ValidationError(DataError):
    """A sample reading violates a field invariant; names the field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(message)


class NonFiniteReading(ValidationError):
    def __init__(self, field: str, value: float):
        super().__init__(field, f"non-finite reading for {field}: {value!r}")


class NegativeConcentration(ValidationError):
    def __init__(self, field: str, value: float):
        super().__init__(field, f"negative concentration for {field}: {value!r}")


class HumidityOutOfRange(ValidationError):
    def __init__(self, value: float):
        super().__init__("rh", f"relative humidity outside [0, 100]: {value!r}")


class EmptyReadings(ValidationError):
    def __init__(self) -> None:
        super().__init__("readings", "sample carries no readings")


class InvalidDeviceId(DataError):
    def __init__(self, device: str):
        self.device = device
        super().__init__(f"invalid device id {device!r} (need 1-32 visible ASCII chars)")


class InvalidTimestamp(DataError):
    def __init__(self, value: object):
        super().__init__(f"invalid timestamp {value!r}")


# --- ingest ------------------------------------------------------------------

class MalformedRecord(DataError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class UnsupportedFormat(DataError):
    def __init__(self, fmt: str):
        super().__init__(f"unsupported format {fmt!r}")


class EmptyInput(DataError):
    pass


class UnknownDevice(DataError):
    def __init__(self, device: str):
        self.device = device
        super().__init__(f"sample from device {device!r} not in the device list")


class ConfigMismatch(DataError):
    pass


# --- features ----------------------------------------------------------------

class EmptyWindow(DataError):
    pass


class WindowTooShort(DataError):
    pass


class ThresholdOrder(DataError):
    def __init__(self, safe: float, unsafe: float):
        super().__init__(f"safe threshold {safe} exceeds unsafe threshold {unsafe}")


class TooManyMissing(DataError):
    def __init__(self, device: str, pollutant: str, fraction: float):
        self.device = device
        self.pollutant = pollutant
        self.fraction = fraction
        super().__init__(
            f"channel {device}.{pollutant}: {fraction:.1%} missing exceeds tolerance"
        )


class EmptyDevices(DataError):
    pass


# --- simulator ---------------------------------------------------------------

class NonPositiveDt(DataError):
    def __init__(self, dt: float):
        super().__init__(f"integration step must be positive, got {dt}")


class InvalidScenario(DataError):
    pass


class Infeasible(DataError):
    pass


# --- models ------------------------------------------------------------------

class EmptyDataset(DataError):
    pass


class NonFiniteFeature(DataError):
    pass


class SchemaMismatch(DataError):
    pass


class VersionMismatch(DataError):
    def __init__(self, got: str):
        super().__init__(f"unsupported model file version: {got!r}")


class CorruptModel(DataError):
    pass


# --- evaluation --------------------------------------------------------------

class ClassTooSmall(DataError):
    def __init__(self, label: str, count: int, needed: int):
        super().__init__(f"class {label!r} has {count} samples, needs >= {needed}")


class KTooLarge(DataError):
    pass


class LengthMismatch(DataError):
    pass


class UnknownClass(DataError):
    def __init__(self, label: str):
        super().__init__(f"label {label!r} not in the class list")


class EmptyMatrix(DataError):
    pass


# --- collector ---------------------------------------------------------------

class BindFailure(AirshadowError):
    pass


class StorageFailure(AirshadowError):
    pass
