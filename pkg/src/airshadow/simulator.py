"""Synthetic multi-device pollutant traces from activity scripts.

A single well-mixed zone evolves by explicit Euler at 1 Hz: CO2 follows a
mass balance with per-person sources and air exchange, temperature relaxes
toward the AC setpoint or ambient, VOC carries an eating source, and PM gets
resuspension impulses on movement. Per-device observations add placement
weights, per-device bias, and Gaussian sensor noise.

Between script events every channel follows the same affine Euler update,
so long runs integrate segment-at-a-time with the closed form of the Euler
recurrence (equal to stepping, verified in tests) instead of a Python loop.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .core import POLLUTANTS, ActivityAnnotation, ActivityLabel, PollutantKind
from .errors import Infeasible, InvalidScenario, NonPositiveDt
from .ingest import AlignedSeries
from .rng import substream

ACH = 1.0 / 3600.0  # air changes per hour -> 1/s


@dataclass(frozen=True)
class ZoneParams:
    """Physical constants of the zone; defaults reproduce the pilot
    classroom: 40 occupants drive CO2 from 400 to ~5000 ppm in 2 h 15 m,
    and the AC pulls 26 C down to 23 C in under 30 minutes."""

    volume: float = 200.0               # m^3
    co2_outdoor: float = 400.0          # ppm
    lambda_base: float = 0.05 * ACH     # baseline air exchange, 1/s (closed room)
    lambda_fan: float = 2.0 * ACH       # extra exchange with the fan on, 1/s
    co2_per_person: float = 3.0         # ppm*m^3/s exhaled per occupant
    ac_setpoint: float = 23.0           # deg C
    ambient_temp: float = 26.0          # deg C
    kappa_on: float = 1.2e-3            # cooling rate with AC on, 1/s
    kappa_off: float = 1.0e-4           # relaxation to ambient with AC off, 1/s
    voc_baseline: float = 150.0         # sensor index
    voc_eating_rate: float = 5.0        # index/s while an eating source is active
    voc_decay: float = 1.0 / 120.0      # intrinsic VOC sink, 1/s
    eating_duration: float = 600.0      # seconds an eating source stays active
    pm25_baseline: float = 8.0          # ug/m^3
    pm10_baseline: float = 20.0         # ug/m^3
    pm_decay: float = 1.0 / 900.0       # settling rate, 1/s
    pm25_walk: float = 5.0              # resuspension impulse per enter/exit, ug/m^3
    pm10_walk: float = 12.0
    pm25_gather: float = 12.0           # resuspension impulse per gathering, ug/m^3
    pm10_gather: float = 30.0
    pm25_fan_source: float = 0.02       # airflow resuspension while the fan runs, ug/m^3/s
    pm10_fan_source: float = 0.05
    rh_ambient: float = 55.0            # %RH
    rh_per_person: float = 2e-3         # %RH/s of exhaled moisture per occupant
    rh_relax: float = 1.0 / 600.0       # relaxation to ambient, 1/s
    gather_size: tuple[int, int] = (3, 8)          # occupancy bump, inclusive
    gather_duration: tuple[float, float] = (900.0, 2700.0)  # seconds, uniform
    # environment drift: baselines redraw every drift_period seconds with the
    # given spreads (0 = static). Gives long scenarios weather-like regimes.
    drift_period: float = 14400.0
    co2_outdoor_drift: float = 0.0
    ambient_temp_drift: float = 0.0
    rh_ambient_drift: float = 0.0
    voc_baseline_drift: float = 0.0
    pm25_baseline_drift: float = 0.0
    pm10_baseline_drift: float = 0.0

    def validate(self) -> None:
        if self.volume <= 0:
            raise InvalidScenario(f"zone volume must be positive, got {self.volume}")
        for name in ("lambda_base", "lambda_fan", "co2_per_person", "kappa_on",
                     "kappa_off", "voc_eating_rate", "voc_decay", "pm_decay",
                     "rh_per_person", "rh_relax"):
            if getattr(self, name) < 0:
                raise InvalidScenario(f"{name} must be non-negative")
        if self.ac_setpoint >= self.ambient_temp:
            raise InvalidScenario("AC setpoint must sit below ambient temperature")

    def baselines(self) -> dict[PollutantKind, float]:
        return {
            PollutantKind.CO2: self.co2_outdoor,
            PollutantKind.VOC: self.voc_baseline,
            PollutantKind.PM2_5: self.pm25_baseline,
            PollutantKind.PM10: self.pm10_baseline,
            PollutantKind.TEMPERATURE: self.ambient_temp,
            PollutantKind.HUMIDITY: self.rh_ambient,
        }


def lab_params() -> ZoneParams:
    """A small research-lab profile: four corner desks, leakier envelope,
    active adults, and drifting outdoor/ambient conditions."""
    return replace(
        ZoneParams(),
        volume=60.0,
        lambda_base=0.3 * ACH,
        co2_per_person=4.0,
        co2_outdoor_drift=25.0,
        ambient_temp_drift=1.2,
        rh_ambient_drift=5.0,
        voc_baseline_drift=20.0,
        pm25_baseline_drift=1.5,
        pm10_baseline_drift=3.5,
    )


@dataclass(frozen=True)
class ZoneState:
    """Zone state at one instant; immutable, advanced by :func:`step_zone`."""

    t: float = 0.0
    occupancy: int = 0
    fan: bool = False
    ac: bool = False
    co2: float = 400.0
    voc: float = 150.0
    pm25: float = 8.0
    pm10: float = 20.0
    temp: float = 26.0
    rh: float = 55.0
    voc_source_until: float = -math.inf  # eating source active while t < this

    def concentrations(self) -> dict[PollutantKind, float]:
        return {
            PollutantKind.CO2: self.co2,
            PollutantKind.VOC: self.voc,
            PollutantKind.PM2_5: self.pm25,
            PollutantKind.PM10: self.pm10,
            PollutantKind.TEMPERATURE: self.temp,
            PollutantKind.HUMIDITY: self.rh,
        }


def initial_state(params: ZoneParams, **overrides) -> ZoneState:
    """A ZoneState resting at the parameter baselines."""
    state = ZoneState(
        co2=params.co2_outdoor,
        voc=params.voc_baseline,
        pm25=params.pm25_baseline,
        pm10=params.pm10_baseline,
        temp=params.ambient_temp,
        rh=params.rh_ambient,
    )
    return replace(state, **overrides) if overrides else state


def _static_bases(p: ZoneParams) -> np.ndarray:
    """[co2_outdoor, voc, pm25, pm10, ambient_temp, rh_ambient]."""
    return np.array([
        p.co2_outdoor, p.voc_baseline, p.pm25_baseline,
        p.pm10_baseline, p.ambient_temp, p.rh_ambient,
    ])


def _channel_coeffs(
    occupancy: int, fan: bool, ac: bool, eating: bool, p: ZoneParams,
    bases: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel (rate, forcing) of dx/dt = forcing - rate * x.

    Channel order follows POLLUTANTS. The forcing term folds source and
    baseline pull together: dx/dt = src - rate * (x - base) = (src +
    rate*base) - rate*x. ``bases`` overrides the static baselines when the
    environment has drifted.
    """
    if bases is None:
        bases = _static_bases(p)
    lam = p.lambda_base + (p.lambda_fan if fan else 0.0)
    kappa = p.kappa_on if ac else p.kappa_off
    rates = np.array([
        lam,
        p.voc_decay + lam,
        p.pm_decay + lam,
        p.pm_decay + lam,
        kappa,
        p.rh_relax,
    ])
    sources = np.array([
        p.co2_per_person * occupancy / p.volume,
        p.voc_eating_rate if eating else 0.0,
        p.pm25_fan_source if fan else 0.0,
        p.pm10_fan_source if fan else 0.0,
        0.0,
        p.rh_per_person * occupancy,
    ])
    targets = bases.copy()
    if ac:
        targets[4] = p.ac_setpoint
    return rates, sources + rates * targets


def step_zone(state: ZoneState, params: ZoneParams, dt: float = 1.0) -> ZoneState:
    """One explicit-Euler step of the zone dynamics."""
    if dt <= 0:
        raise NonPositiveDt(dt)
    eating = state.t < state.voc_source_until
    rates, forcing = _channel_coeffs(state.occupancy, state.fan, state.ac, eating, params)
    x = np.array([state.co2, state.voc, state.pm25, state.pm10, state.temp, state.rh])
    x = x + dt * (forcing - rates * x)
    return replace(
        state,
        t=state.t + dt,
        co2=float(x[0]),
        voc=float(x[1]),
        pm25=float(x[2]),
        pm10=float(x[3]),
        temp=float(x[4]),
        rh=float(min(100.0, max(0.0, x[5]))),
    )


def closed_form_co2(
    params: ZoneParams, occupancy: int, t: float, c0: float | None = None,
    fan: bool = False,
) -> float:
    """Analytic CO2 trajectory under constant occupancy and fan state."""
    lam = params.lambda_base + (params.lambda_fan if fan else 0.0)
    c0 = params.co2_outdoor if c0 is None else c0
    src = params.co2_per_person * occupancy / params.volume
    if lam == 0:
        return c0 + src * t
    eq = params.co2_outdoor + src / lam
    return eq + (c0 - eq) * math.exp(-lam * t)


def calibrate_co2_rate(
    params: ZoneParams, occupants: int = 40, peak: float = 5000.0,
    horizon: float = 8100.0,
) -> float:
    """Per-person CO2 rate that hits ``peak`` ppm after ``horizon`` seconds
    of constant occupancy in a closed room, from the analytic solution."""
    lam = params.lambda_base
    if lam == 0:
        return (peak - params.co2_outdoor) * params.volume / (occupants * horizon)
    growth = 1.0 - math.exp(-lam * horizon)
    excess = peak - params.co2_outdoor
    return excess * lam * params.volume / (occupants * growth)


@dataclass(frozen=True)
class SensorNoise:
    """Per-pollutant observation noise: per-sample sigma and the spread of
    the per-device constant bias (both in channel units)."""

    sigma: Mapping[PollutantKind, float] = field(
        default_factory=lambda: {
            PollutantKind.CO2: 2.0,
            PollutantKind.VOC: 3.0,
            PollutantKind.PM2_5: 0.8,
            PollutantKind.PM10: 1.5,
            PollutantKind.TEMPERATURE: 0.05,
            PollutantKind.HUMIDITY: 0.3,
        }
    )
    bias_sigma: Mapping[PollutantKind, float] = field(
        default_factory=lambda: {
            PollutantKind.CO2: 25.0,
            PollutantKind.VOC: 10.0,
            PollutantKind.PM2_5: 2.0,
            PollutantKind.PM10: 4.0,
            PollutantKind.TEMPERATURE: 0.2,
            PollutantKind.HUMIDITY: 1.5,
        }
    )

    def validate(self) -> None:
        for mapping in (self.sigma, self.bias_sigma):
            for kind, value in mapping.items():
                if value < 0:
                    raise InvalidScenario(f"noise sigma for {kind.token} must be >= 0")


def no_noise() -> SensorNoise:
    zero = {p: 0.0 for p in POLLUTANTS}
    return SensorNoise(sigma=zero, bias_sigma=dict(zero))


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one synthetic deployment."""

    duration: float
    params: ZoneParams = field(default_factory=ZoneParams)
    initial: ZoneState | None = None
    script: tuple[tuple[float, ActivityLabel], ...] = ()
    devices: Mapping[str, float] = field(default_factory=lambda: {"d1": 1.0})
    noise: SensorNoise = field(default_factory=SensorNoise)
    t0: float = 1_700_000_000.0
    seed: int | None = None

    def validate(self) -> None:
        if self.duration <= 0:
            raise InvalidScenario("duration must be positive")
        self.params.validate()
        self.noise.validate()
        if not self.devices:
            raise InvalidScenario("scenario needs at least one device")
        for device, weight in self.devices.items():
            if not 0.0 < weight <= 1.0:
                raise InvalidScenario(
                    f"device {device!r} placement weight {weight} outside (0, 1]"
                )
        for ts, label in self.script:
            if not 0.0 <= ts < self.duration:
                raise InvalidScenario(f"event {label.text} at {ts} outside [0, duration)")
        if any(self.script[i][0] > self.script[i + 1][0] for i in range(len(self.script) - 1)):
            raise InvalidScenario("script events must be time-ordered")


def _affine_block(x0: np.ndarray, rates: np.ndarray, forcing: np.ndarray,
                  dt: float, n_steps: int) -> np.ndarray:
    """Euler iterates 1..n_steps of x' = r*x + c per channel, vectorized.

    x_{k+1} = r*x_k + c with r = 1 - rate*dt and c = forcing*dt has the
    closed form x_k = r^k x_0 + c (1-r^k)/(1-r), which matches sequential
    stepping to within accumulated rounding.
    """
    r = 1.0 - rates * dt
    c = forcing * dt
    ks = np.arange(1, n_steps + 1)
    out = np.empty((x0.size, n_steps))
    for i in range(x0.size):
        if rates[i] == 0.0:
            out[i] = x0[i] + c[i] * ks
        else:
            rk = np.power(r[i], ks)
            out[i] = rk * x0[i] + c[i] * (1.0 - rk) / (1.0 - r[i])
    return out


_PM_IMPULSE_LABELS = {
    ActivityLabel.ENTER: "walk",
    ActivityLabel.EXIT: "walk",
    ActivityLabel.GATHERING: "gather",
}


def simulate_zone(
    scenario: Scenario, seed: int | None = None, dt: float = 1.0,
) -> tuple[np.ndarray, list[ActivityAnnotation]]:
    """Integrate the true zone series at ``dt`` resolution.

    Returns (series, annotations): ``series`` has shape (6, n) in POLLUTANTS
    order with sample k at scenario-relative time k*dt; annotations carry
    the script events at absolute time t0 + ts.
    """
    scenario.validate()
    if dt <= 0:
        raise NonPositiveDt(dt)
    seed = _resolve_seed(scenario, seed)
    rng = substream(seed, "events")
    p = scenario.params
    state = scenario.initial or initial_state(p)
    n_samples = int(round(scenario.duration / dt))

    # Event queue: (sample index, sequence, action, payload). Gathering
    # releases and eating-source expiries are pushed as internal events so
    # segments never straddle a dynamics change.
    queue: list[tuple[int, int, str, float]] = []
    seq = 0
    if math.isfinite(state.voc_source_until):
        # an eating source already active at t=0 needs its expiry boundary
        heapq.heappush(queue, (math.ceil(state.voc_source_until / dt), seq, "voc_off", 0.0))
        seq += 1
    for ts, label in scenario.script:
        heapq.heappush(queue, (math.ceil(ts / dt), seq, label.text, 0.0))
        seq += 1

    series = np.empty((len(POLLUTANTS), n_samples))
    x = np.array([state.co2, state.voc, state.pm25, state.pm10, state.temp, state.rh])
    occupancy = state.occupancy
    fan, ac = state.fan, state.ac
    voc_until = state.voc_source_until

    def apply(action: str, payload: float, now: float) -> None:
        nonlocal occupancy, fan, ac, voc_until, seq
        if action == "enter":
            occupancy += 1
        elif action == "exit":
            occupancy = max(0, occupancy - 1)
        elif action == "fan_on":
            fan = True
        elif action == "fan_off":
            fan = False
        elif action == "ac_on":
            ac = True
        elif action == "ac_off":
            ac = False
        elif action == "gathering":
            size = int(rng.integers(p.gather_size[0], p.gather_size[1] + 1))
            length = float(rng.uniform(*p.gather_duration))
            occupancy += size
            heapq.heappush(queue, (math.ceil((now + length) / dt), seq, "gather_end", float(size)))
            seq += 1
        elif action == "gather_end":
            occupancy = max(0, occupancy - int(payload))
        elif action == "eating":
            voc_until = max(voc_until, now + p.eating_duration)
            heapq.heappush(queue, (math.ceil(voc_until / dt), seq, "voc_off", 0.0))
            seq += 1
        elif action == "voc_off":
            pass  # segment boundary only; activity is derived from voc_until
        kind = _PM_IMPULSE_LABELS.get(_label_or_none(action))
        if kind == "walk":
            x[2] += p.pm25_walk
            x[3] += p.pm10_walk
        elif kind == "gather":
            x[2] += p.pm25_gather
            x[3] += p.pm10_gather

    # Events scheduled at or before sample 0 apply before it is emitted.
    pos = 0
    while queue and queue[0][0] <= 0:
        _, _, action, payload = heapq.heappop(queue)
        apply(action, payload, 0.0)
    series[:, 0] = x

    while queue:
        ke, _, action, payload = heapq.heappop(queue)
        if ke >= n_samples:
            break
        if ke > pos:
            eating = (pos * dt) < voc_until
            rates, forcing = _channel_coeffs(occupancy, fan, ac, eating, p)
            series[:, pos + 1:ke + 1] = _affine_block(x, rates, forcing, dt, ke - pos)
            x = series[:, ke].copy()
            pos = ke
        apply(action, payload, ke * dt)
        series[:, ke] = x
    if pos < n_samples - 1:
        eating = (pos * dt) < voc_until
        rates, forcing = _channel_coeffs(occupancy, fan, ac, eating, p)
        series[:, pos + 1:] = _affine_block(x, rates, forcing, dt, n_samples - 1 - pos)

    np.clip(series[5], 0.0, 100.0, out=series[5])  # humidity guard rail
    annotations = [
        ActivityAnnotation(ts=scenario.t0 + ts, label=label)
        for ts, label in scenario.script
    ]
    return series, annotations


def _label_or_none(action: str) -> ActivityLabel | None:
    try:
        return ActivityLabel(action)
    except ValueError:
        return None


def _resolve_seed(scenario: Scenario, seed: int | None) -> int:
    if seed is not None:
        return seed
    if scenario.seed is not None:
        return scenario.seed
    return 0


def apply_sensor_model(
    true_series: np.ndarray,
    params: ZoneParams,
    noise: SensorNoise,
    weights: Mapping[str, float],
    seed: int,
    t0: float,
    step: float = 1.0,
) -> AlignedSeries:
    """Per-device observed series from the true zone series.

    observed = baseline + weight_d * (true - baseline) + bias_dp + N(0, sigma_p)
    with bias_dp drawn once per device and channel; humidity is clamped to
    [0, 100]. Fully reproducible from the seed.
    """
    n = true_series.shape[1]
    values: dict[str, dict[PollutantKind, np.ndarray]] = {}
    for device, weight in weights.items():
        bias_rng = substream(seed, "bias", device)
        channels: dict[PollutantKind, np.ndarray] = {}
        for i, kind in enumerate(POLLUTANTS):
            base = params.baselines()[kind]
            bias = float(bias_rng.normal(0.0, noise.bias_sigma.get(kind, 0.0)))
            sigma = noise.sigma.get(kind, 0.0)
            observed = base + weight * (true_series[i] - base) + bias
            if sigma > 0:
                observed = observed + substream(seed, "noise", device, kind.token).normal(
                    0.0, sigma, size=n
                )
            else:
                observed = observed.copy()
            if kind is PollutantKind.HUMIDITY:
                np.clip(observed, 0.0, 100.0, out=observed)
            channels[kind] = observed
        values[device] = channels
    return AlignedSeries(devices=tuple(weights), t0=t0, step=step, values=values)


def simulate_scenario(
    scenario: Scenario, seed: int | None = None,
) -> tuple[AlignedSeries, list[ActivityAnnotation]]:
    """Run a scenario end to end: true dynamics plus per-device observation."""
    seed = _resolve_seed(scenario, seed)
    true_series, annotations = simulate_zone(scenario, seed)
    observed = apply_sensor_model(
        true_series, scenario.params, scenario.noise, scenario.devices,
        seed, scenario.t0,
    )
    return observed, annotations


# --- scenario generation ------------------------------------------------------

#: Class mix mirroring the recorded distribution: enter/exit dominate,
#: fan on/off follow, AC events are sparser, gathering and eating are rare.
CLASS_PROPORTIONS: dict[ActivityLabel, float] = {
    ActivityLabel.ENTER: 0.27,
    ActivityLabel.EXIT: 0.27,
    ActivityLabel.FAN_ON: 0.135,
    ActivityLabel.FAN_OFF: 0.135,
    ActivityLabel.AC_ON: 0.06,
    ActivityLabel.AC_OFF: 0.06,
    ActivityLabel.GATHERING: 0.04,
    ActivityLabel.EATING: 0.03,
}


def reference_class_counts(total: int = 705) -> dict[ActivityLabel, int]:
    """Apportion ``total`` events to the reference class proportions
    (largest-remainder rounding, ties resolved in label order)."""
    raw = {label: CLASS_PROPORTIONS[label] * total for label in ActivityLabel}
    counts = {label: int(math.floor(value)) for label, value in raw.items()}
    shortfall = total - sum(counts.values())
    by_remainder = sorted(
        ActivityLabel, key=lambda l: (-(raw[l] - counts[l]), list(ActivityLabel).index(l))
    )
    for label in by_remainder[:shortfall]:
        counts[label] += 1
    return counts


def generate_scenario(
    class_counts: Mapping[ActivityLabel, int],
    duration: float,
    seed: int,
    spacing: float = 1200.0,
    margin: float = 600.0,
    params: ZoneParams | None = None,
    devices: Sequence[str] | Mapping[str, float] | None = None,
    noise: SensorNoise | None = None,
    t0: float = 1_700_000_000.0,
) -> Scenario:
    """Place the requested events on a feasible, consistent timeline.

    Events keep at least ``spacing`` seconds apart and ``margin`` seconds
    from both ends. The label order is shuffled, then repaired so exits
    never drop occupancy below zero and fan/AC events alternate with the
    running state where the multiset allows it. Deterministic per seed.
    """
    for label, count in class_counts.items():
        if count < 0:
            raise InvalidScenario(f"negative count for {label.text}")
    params = params or lab_params()
    rng = substream(seed, "scenario")

    n_total = int(sum(class_counts.values()))
    labels: list[ActivityLabel] = []
    if n_total:
        span = duration - 2.0 * margin
        needed = (n_total - 1) * spacing
        if span < 0 or needed > span:
            raise Infeasible(
                f"{n_total} events need {needed:.0f}s of span, "
                f"have {span:.0f}s (duration {duration:.0f}s, margin {margin:.0f}s)"
            )
        slack = span - needed
        offsets = np.sort(rng.uniform(0.0, slack, size=n_total))
        times = margin + offsets + spacing * np.arange(n_total)
        times = np.round(times)

        for label in ActivityLabel:
            labels.extend([label] * int(class_counts.get(label, 0)))
        order = rng.permutation(n_total)
        labels = [labels[i] for i in order]
        labels = _repair_sequence(labels)
        script = tuple((float(t), label) for t, label in zip(times, labels))
    else:
        script = ()

    if devices is None:
        device_names: Sequence[str] = ("d1", "d2", "d3", "d4")
        weights = {d: float(w) for d, w in zip(device_names, rng.uniform(0.5, 1.0, 4))}
    elif isinstance(devices, Mapping):
        weights = {d: float(w) for d, w in devices.items()}
    else:
        drawn = rng.uniform(0.5, 1.0, len(devices))
        weights = {d: float(w) for d, w in zip(devices, drawn)}

    scenario = Scenario(
        duration=float(duration),
        params=params,
        initial=initial_state(params),
        script=script,
        devices=weights,
        noise=noise or SensorNoise(),
        t0=t0,
        seed=seed,
    )
    scenario.validate()
    return scenario


def _repair_sequence(labels: list[ActivityLabel]) -> list[ActivityLabel]:
    """Reorder in place so each event is consistent with the running state.

    An inconsistent event (exit at zero occupancy, fan_on with the fan
    already on, ...) swaps with the nearest later event that is currently
    consistent; if none exists it stays put as a no-op annotation.
    """
    occupancy = 0
    fan = False
    ac = False

    def consistent(label: ActivityLabel) -> bool:
        if label is ActivityLabel.EXIT:
            return occupancy > 0
        if label is ActivityLabel.FAN_ON:
            return not fan
        if label is ActivityLabel.FAN_OFF:
            return fan
        if label is ActivityLabel.AC_ON:
            return not ac
        if label is ActivityLabel.AC_OFF:
            return ac
        return True

    out = list(labels)
    for i in range(len(out)):
        if not consistent(out[i]):
            for j in range(i + 1, len(out)):
                if consistent(out[j]):
                    out[i], out[j] = out[j], out[i]
                    break
        label = out[i]
        if label is ActivityLabel.ENTER:
            occupancy += 1
        elif label is ActivityLabel.EXIT and occupancy > 0:
            occupancy -= 1
        elif label is ActivityLabel.FAN_ON:
            fan = True
        elif label is ActivityLabel.FAN_OFF:
            fan = False
        elif label is ActivityLabel.AC_ON:
            ac = True
        elif label is ActivityLabel.AC_OFF:
            ac = False
    return out


# --- presets ------------------------------------------------------------------

def exam_scenario(devices: Mapping[str, float] | None = None) -> Scenario:
    """The pilot classroom: 40 students for 2 h 15 m in a closed room."""
    params = ZoneParams()
    script = [(60.0 + i, ActivityLabel.ENTER) for i in range(40)]
    script += [(8160.0 + i, ActivityLabel.EXIT) for i in range(40)]
    return Scenario(
        duration=14400.0,
        params=params,
        initial=replace(initial_state(params), ac=True),
        script=tuple(script),
        devices=devices or {"d1": 1.0, "d2": 0.85, "d3": 0.7, "d4": 0.55},
        seed=0,
    )


def ac_cycle_scenario() -> Scenario:
    """AC switched on at 10 min and off at 70 min; temperature 26 -> 23 -> 26."""
    params = ZoneParams()
    script = ((600.0, ActivityLabel.AC_ON), (4200.0, ActivityLabel.AC_OFF))
    return Scenario(
        duration=7200.0,
        params=params,
        initial=initial_state(params, occupancy=1),
        script=script,
        devices={"d1": 1.0},
        seed=0,
    )


def eating_scenario() -> Scenario:
    """A single eating event 10 minutes in; VOC spikes then normalizes."""
    params = ZoneParams()
    script = ((600.0, ActivityLabel.EATING),)
    return Scenario(
        duration=3600.0,
        params=params,
        initial=initial_state(params, occupancy=1),
        script=script,
        devices={"d1": 1.0},
        seed=0,
    )


PRESETS = {
    "exam": exam_scenario,
    "ac_cycle": ac_cycle_scenario,
    "eating": eating_scenario,
}
