"""Batch ingestion: parse logs, align device streams to a 1 Hz grid, and
join annotations into a labeled feature dataset.

File formats
------------
* sample csv: header ``ts,dev,co2,voc,pm25,pm10,t,rh``; missing fields empty.
* sample ndjson: one object per line with the same keys.
* annotation csv: header ``ts,label[,annotator]``.
* dataset csv: feature-schema names plus a final ``label`` column.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .core import (
    POLLUTANTS,
    ActivityAnnotation,
    ActivityLabel,
    PollutantKind,
    PollutantSample,
    parse_activity_label,
    validate_sample,
)
from .errors import (
    ConfigMismatch,
    DataError,
    EmptyInput,
    MalformedRecord,
    UnknownDevice,
    UnknownLabel,
    UnsupportedFormat,
)
from .features import FeatureConfig, FeatureSchema, extract_features, feature_schema

SAMPLE_CSV_HEADER = ("ts", "dev") + tuple(p.token for p in POLLUTANTS)

#: Gaps at most this many seconds are forward-filled during alignment.
MAX_FILL_SECONDS = 5.0


def _iter_text_lines(stream: IO[bytes] | IO[str] | bytes | str) -> Iterator[str]:
    if isinstance(stream, bytes):
        text = stream.decode("utf-8")
    elif isinstance(stream, str):
        text = stream
    else:
        raw = stream.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    return iter(text.splitlines())


@dataclass
class ParseResult:
    """Samples plus per-line diagnostics for records that were skipped."""

    samples: list[PollutantSample]
    issues: list[tuple[int, str]] = field(default_factory=list)

    def __iter__(self) -> Iterator[PollutantSample]:
        return iter(self.samples)

    def __len__(self) -> int:
        return len(self.samples)


def _sample_from_fields(ts_text: object, dev: object, readings_raw: dict[str, object]) -> PollutantSample:
    try:
        ts = float(ts_text)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise MalformedRecord(0, f"bad timestamp {ts_text!r}") from None
    if not math.isfinite(ts):
        raise MalformedRecord(0, f"non-finite timestamp {ts_text!r}")
    if not isinstance(dev, str) or not dev:
        raise MalformedRecord(0, f"bad device id {dev!r}")
    readings: dict[PollutantKind, float] = {}
    for token, raw in readings_raw.items():
        if raw is None or raw == "":
            continue
        try:
            kind = PollutantKind.from_token(token)
        except KeyError:
            continue  # unknown columns/fields are ignored
        try:
            value = float(raw)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            raise MalformedRecord(0, f"bad value {raw!r} for {token}") from None
        readings[kind] = value
    sample = PollutantSample(ts=ts, device=dev, readings=readings)
    try:
        validate_sample(sample)
    except DataError as exc:
        raise MalformedRecord(0, str(exc)) from None
    return sample


def parse_sample_log(
    stream: IO[bytes] | IO[str] | bytes | str,
    format: str = "csv",
    strict: bool = False,
) -> ParseResult:
    """Parse a sample log in ``csv`` or ``ndjson`` form.

    Records that fail to parse or validate are reported with their line
    number in :attr:`ParseResult.issues` and skipped; in strict mode the
    first such record aborts with MalformedRecord.
    """
    if format not in ("csv", "ndjson"):
        raise UnsupportedFormat(format)
    lines = _iter_text_lines(stream)
    result = ParseResult(samples=[])

    def record_issue(line_no: int, message: str) -> None:
        if strict:
            raise MalformedRecord(line_no, message)
        result.issues.append((line_no, message))

    if format == "csv":
        reader = csv.reader(lines)
        try:
            header = next(reader)
        except StopIteration:
            return result
        columns = [h.strip() for h in header]
        if "ts" not in columns or "dev" not in columns:
            raise MalformedRecord(1, f"sample csv header must contain ts and dev, got {columns}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            fields = dict(zip(columns, (cell.strip() for cell in row)))
            try:
                result.samples.append(
                    _sample_from_fields(fields.get("ts"), fields.get("dev"), fields)
                )
            except MalformedRecord as exc:
                record_issue(line_no, str(exc).split(": ", 1)[-1])
    else:
        for line_no, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("record is not an object")
            except ValueError as exc:
                record_issue(line_no, f"bad json: {exc}")
                continue
            try:
                result.samples.append(
                    _sample_from_fields(obj.get("ts"), obj.get("dev"), obj)
                )
            except MalformedRecord as exc:
                record_issue(line_no, str(exc).split(": ", 1)[-1])
    return result


def parse_annotations(stream: IO[bytes] | IO[str] | bytes | str) -> list[ActivityAnnotation]:
    """Parse an annotation csv (header ``ts,label[,annotator]``), sorted by ts."""
    reader = csv.reader(_iter_text_lines(stream))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        return []
    if header[:2] != ["ts", "label"]:
        raise MalformedRecord(1, f"annotation csv header must start ts,label, got {header}")
    annotations: list[ActivityAnnotation] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < 2:
            raise MalformedRecord(line_no, f"need at least ts,label, got {row}")
        try:
            ts = float(row[0])
        except ValueError:
            raise MalformedRecord(line_no, f"bad timestamp {row[0]!r}") from None
        label = parse_activity_label(row[1], line=line_no)
        annotator = row[2].strip() if len(row) > 2 and row[2].strip() else None
        annotations.append(ActivityAnnotation(ts=ts, label=label, annotator=annotator))
    annotations.sort(key=lambda a: a.ts)
    return annotations


def write_annotations(annotations: Iterable[ActivityAnnotation]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["ts", "label", "annotator"])
    for ann in annotations:
        writer.writerow([repr(float(ann.ts)), ann.label.text, ann.annotator or ""])
    return out.getvalue()


@dataclass
class AlignedSeries:
    """Multi-device readings on a common time grid; NaN marks missing cells.

    Grid timestamps are ``t0 + k * step`` for k in [0, n_cells).
    """

    devices: tuple[str, ...]
    t0: float
    step: float
    values: dict[str, dict[PollutantKind, np.ndarray]]

    @property
    def n_cells(self) -> int:
        first = self.values[self.devices[0]][POLLUTANTS[0]]
        return int(first.size)

    def timestamps(self) -> np.ndarray:
        return self.t0 + self.step * np.arange(self.n_cells)

    def window(self, start_idx: int, n: int) -> dict[str, dict[PollutantKind, np.ndarray]]:
        return {
            d: {p: self.values[d][p][start_idx:start_idx + n] for p in POLLUTANTS}
            for d in self.devices
        }

    def to_samples(self) -> list[PollutantSample]:
        """Dump back to samples; cells missing every channel are dropped."""
        ts = self.timestamps()
        samples: list[PollutantSample] = []
        for device in self.devices:
            channels = self.values[device]
            stacked = np.vstack([channels[p] for p in POLLUTANTS])
            present = ~np.isnan(stacked)
            for k in np.flatnonzero(present.any(axis=0)):
                readings = {
                    p: float(stacked[i, k])
                    for i, p in enumerate(POLLUTANTS)
                    if present[i, k]
                }
                samples.append(PollutantSample(ts=float(ts[k]), device=device, readings=readings))
        return samples


def write_sample_ndjson(samples: Iterable[PollutantSample]) -> str:
    """Serialize samples as ndjson with full-precision floats."""
    lines = []
    for s in samples:
        fields = [f'"ts":{repr(float(s.ts))}', f'"dev":{json.dumps(s.device)}']
        fields += [
            f'"{p.token}":{repr(float(s.readings[p]))}'
            for p in POLLUTANTS
            if p in s.readings
        ]
        lines.append("{" + ",".join(fields) + "}")
    return "\n".join(lines) + ("\n" if lines else "")


def _snap(offset_seconds: float, step: float) -> int:
    """Nearest grid index; exact halves snap to the earlier cell."""
    return math.ceil(offset_seconds / step - 0.5)


def align_series(
    samples: Sequence[PollutantSample],
    devices: Sequence[str],
    step: float = 1.0,
    max_fill: float = MAX_FILL_SECONDS,
) -> AlignedSeries:
    """Snap samples to a common grid spanning [min ts, max ts].

    Duplicate samples for one cell resolve last-wins in input order. Per
    channel, gap runs of at most ``max_fill`` seconds are forward-filled;
    longer runs stay missing.
    """
    if not samples:
        raise EmptyInput("no samples to align")
    if step <= 0:
        raise ConfigMismatch(f"step must be positive, got {step}")
    device_order = tuple(devices)
    known = set(device_order)
    for s in samples:
        if s.device not in known:
            raise UnknownDevice(s.device)

    t_min = min(s.ts for s in samples)
    t_max = max(s.ts for s in samples)
    n_cells = _snap(t_max - t_min, step) + 1

    values = {
        d: {p: np.full(n_cells, np.nan) for p in POLLUTANTS} for d in device_order
    }
    for s in samples:
        k = _snap(s.ts - t_min, step)
        channel = values[s.device]
        for kind, value in s.readings.items():
            channel[kind][k] = value

    max_fill_cells = int(math.floor(max_fill / step + 1e-9))
    for d in device_order:
        for p in POLLUTANTS:
            _forward_fill(values[d][p], max_fill_cells)

    return AlignedSeries(devices=device_order, t0=t_min, step=step, values=values)


def _forward_fill(x: np.ndarray, max_cells: int) -> None:
    """Fill NaN runs of length <= max_cells from the preceding value, in place."""
    if max_cells <= 0:
        return
    missing = np.isnan(x)
    if not missing.any() or missing.all():
        return
    edges = np.diff(np.concatenate(([0], missing.view(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    for start, end in zip(starts, ends):
        if start == 0:  # nothing before the run to fill from
            continue
        if end - start <= max_cells:
            x[start:end] = x[start - 1]


@dataclass(frozen=True)
class WindowConfig:
    """Where the feature window sits relative to an annotation."""

    tau: float = 600.0
    placement: str = "centered"  # or "trailing": [t - tau, t)

    def __post_init__(self) -> None:
        if self.placement not in ("centered", "trailing"):
            raise ConfigMismatch(f"unknown window placement {self.placement!r}")
        if self.tau <= 0:
            raise ConfigMismatch(f"tau must be positive, got {self.tau}")

    def start_time(self, ts: float) -> float:
        if self.placement == "centered":
            return ts - self.tau / 2.0
        return ts - self.tau


@dataclass
class LabeledDataset:
    """Feature rows with activity labels and provenance."""

    schema: FeatureSchema
    X: np.ndarray
    labels: list[ActivityLabel]
    provenance: dict = field(default_factory=dict)
    skipped_bounds: int = 0
    skipped_missing: int = 0

    def __post_init__(self) -> None:
        if self.X.shape != (len(self.labels), len(self.schema)):
            raise ConfigMismatch(
                f"dataset shape {self.X.shape} does not match "
                f"{len(self.labels)} rows x {len(self.schema)} features"
            )
        if self.X.size and not np.isfinite(self.X).all():
            raise ConfigMismatch("dataset contains non-finite feature values")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def skipped(self) -> int:
        return self.skipped_bounds + self.skipped_missing

    def label_texts(self) -> list[str]:
        return [l.text for l in self.labels]

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(list(self.schema.names) + ["label"])
        for row, label in zip(self.X, self.labels):
            writer.writerow([repr(float(v)) for v in row] + [label.text])
        return out.getvalue()

    @classmethod
    def from_csv(cls, stream: IO[bytes] | IO[str] | bytes | str) -> "LabeledDataset":
        reader = csv.reader(_iter_text_lines(stream))
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInput("dataset csv is empty") from None
        if not header or header[-1] != "label":
            raise MalformedRecord(1, "dataset csv must end with a label column")
        names = tuple(header[:-1])
        devices: list[str] = []
        for name in names:
            device = name.split(".", 1)[0]
            if device not in devices:
                devices.append(device)
        schema = FeatureSchema(devices=tuple(devices), names=names)
        rows: list[list[float]] = []
        labels: list[ActivityLabel] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names) + 1:
                raise MalformedRecord(line_no, f"expected {len(names) + 1} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row[:-1]])
            except ValueError as exc:
                raise MalformedRecord(line_no, f"bad feature value: {exc}") from None
            labels.append(parse_activity_label(row[-1], line=line_no))
        X = np.array(rows, dtype=float) if rows else np.empty((0, len(names)))
        return cls(schema=schema, X=X, labels=labels)


def config_digest(wcfg: WindowConfig, fcfg: FeatureConfig) -> str:
    """Stable short digest of the windowing + feature configuration."""
    payload = repr((
        wcfg.tau, wcfg.placement, fcfg.tau, fcfg.min_run, fcfg.ma_width,
        fcfg.missing_tolerance,
        tuple((p.token,) + tuple(fcfg.threshold_pair(p)) for p in POLLUTANTS),
    ))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def build_labeled_windows(
    aligned: AlignedSeries,
    annotations: Sequence[ActivityAnnotation],
    wcfg: WindowConfig,
    fcfg: FeatureConfig | None = None,
    source: str = "<memory>",
    seed: int | None = None,
) -> LabeledDataset:
    """Extract one labeled feature row per annotation.

    Annotations whose window leaves the series bounds, or whose window has
    too much missing data in any channel, are skipped and counted, so
    ``rows + skipped == len(annotations)``.
    """
    fcfg = fcfg or FeatureConfig(tau=wcfg.tau)
    if abs(fcfg.tau - wcfg.tau) > 1e-9:
        raise ConfigMismatch(f"window tau {wcfg.tau} != feature tau {fcfg.tau}")
    n_win = int(round(wcfg.tau / aligned.step))
    if abs(n_win * aligned.step - wcfg.tau) > 1e-9 * max(1.0, wcfg.tau):
        raise ConfigMismatch(f"tau={wcfg.tau} is not a multiple of step={aligned.step}")

    schema = feature_schema(aligned.devices, fcfg)
    rows: list[np.ndarray] = []
    labels: list[ActivityLabel] = []
    skipped_bounds = 0
    skipped_missing = 0
    for ann in annotations:
        offset = (wcfg.start_time(ann.ts) - aligned.t0) / aligned.step
        start_idx = math.ceil(offset - 1e-9)
        if start_idx < 0 or start_idx + n_win > aligned.n_cells:
            skipped_bounds += 1
            continue
        window = aligned.window(start_idx, n_win)
        try:
            rows.append(extract_features(window, fcfg, schema, aligned.step))
        except DataError:
            skipped_missing += 1
            continue
        labels.append(ann.label)

    X = np.vstack(rows) if rows else np.empty((0, len(schema)))
    provenance = {
        "source": source,
        "seed": seed,
        "config_digest": config_digest(wcfg, fcfg),
        "annotations": len(annotations),
    }
    return LabeledDataset(
        schema=schema,
        X=X,
        labels=labels,
        provenance=provenance,
        skipped_bounds=skipped_bounds,
        skipped_missing=skipped_missing,
    )
