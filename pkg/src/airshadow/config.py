"""YAML config files shared by the CLI subcommands: scenarios, the
feature/window pipeline, and model spec lists."""

from __future__ import annotations

from dataclasses import asdict, replace
from pathlib import Path
from typing import Mapping

import yaml

from .core import ActivityLabel, PollutantKind, parse_activity_label
from .errors import DataError
from .features import FeatureConfig
from .ingest import WindowConfig
from .models import ModelSpec
from .simulator import Scenario, SensorNoise, ZoneParams, ZoneState, initial_state


def _require_mapping(obj, what: str) -> dict:
    if not isinstance(obj, dict):
        raise DataError(f"{what} must be a mapping, got {type(obj).__name__}")
    return obj


# --- scenario files -------------------------------------------------------------

def scenario_to_dict(sc: Scenario) -> dict:
    d: dict = {
        "duration": sc.duration,
        "t0": sc.t0,
        "zone": asdict(sc.params),
        "script": [{"t": ts, "label": label.text} for ts, label in sc.script],
        "devices": dict(sc.devices),
        "noise": {
            "sigma": {p.token: float(v) for p, v in sc.noise.sigma.items()},
            "bias_sigma": {p.token: float(v) for p, v in sc.noise.bias_sigma.items()},
        },
    }
    if sc.seed is not None:
        d["seed"] = sc.seed
    if sc.initial is not None:
        ini = sc.initial
        d["initial"] = {
            "occupancy": ini.occupancy, "fan": ini.fan, "ac": ini.ac,
            "co2": ini.co2, "voc": ini.voc, "pm25": ini.pm25,
            "pm10": ini.pm10, "temp": ini.temp, "rh": ini.rh,
        }
    d["zone"]["gather_size"] = list(sc.params.gather_size)
    d["zone"]["gather_duration"] = list(sc.params.gather_duration)
    return d


def scenario_from_dict(d: Mapping) -> Scenario:
    d = _require_mapping(dict(d), "scenario")
    if "duration" not in d:
        raise DataError("scenario needs a duration")
    params = ZoneParams()
    if "zone" in d:
        zone = _require_mapping(d["zone"], "zone")
        known = set(asdict(params))
        unknown = set(zone) - known
        if unknown:
            raise DataError(f"unknown zone parameters: {sorted(unknown)}")
        fixed = dict(zone)
        if "gather_size" in fixed:
            fixed["gather_size"] = tuple(int(v) for v in fixed["gather_size"])
        if "gather_duration" in fixed:
            fixed["gather_duration"] = tuple(float(v) for v in fixed["gather_duration"])
        params = replace(params, **fixed)

    initial: ZoneState | None = None
    if "initial" in d:
        ini = _require_mapping(d["initial"], "initial state")
        initial = initial_state(params, **ini)

    script = []
    for i, event in enumerate(d.get("script", []) or []):
        event = _require_mapping(event, f"script event {i}")
        script.append((float(event["t"]), parse_activity_label(event["label"])))

    noise = SensorNoise()
    if "noise" in d:
        nd = _require_mapping(d["noise"], "noise")
        sigma = {PollutantKind.from_token(k): float(v)
                 for k, v in (nd.get("sigma") or {}).items()}
        bias = {PollutantKind.from_token(k): float(v)
                for k, v in (nd.get("bias_sigma") or {}).items()}
        defaults = SensorNoise()
        noise = SensorNoise(
            sigma={**dict(defaults.sigma), **sigma},
            bias_sigma={**dict(defaults.bias_sigma), **bias},
        )

    scenario = Scenario(
        duration=float(d["duration"]),
        params=params,
        initial=initial,
        script=tuple(script),
        devices={str(k): float(v) for k, v in (d.get("devices") or {"d1": 1.0}).items()},
        noise=noise,
        t0=float(d.get("t0", 1_700_000_000.0)),
        seed=int(d["seed"]) if "seed" in d and d["seed"] is not None else None,
    )
    scenario.validate()
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(yaml.safe_load(Path(path).read_text()))


def save_scenario(sc: Scenario, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario_to_dict(sc), sort_keys=False))


# --- pipeline (window + feature) config ------------------------------------------

def pipeline_from_dict(d: Mapping | None) -> tuple[WindowConfig, FeatureConfig]:
    d = dict(d or {})
    wcfg = WindowConfig(
        tau=float(d.get("tau", 600.0)),
        placement=str(d.get("placement", "centered")),
    )
    thresholds = dict(FeatureConfig().thresholds)
    for token, pair in (d.get("thresholds") or {}).items():
        kind = PollutantKind.from_token(token)
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise DataError(f"threshold for {token} must be [safe, unsafe]")
        thresholds[kind] = (float(pair[0]), float(pair[1]))
    fcfg = FeatureConfig(
        tau=wcfg.tau,
        thresholds=thresholds,
        min_run=float(d.get("min_run", 5.0)),
        ma_width=int(d.get("ma_width", 1)),
        missing_tolerance=float(d.get("missing_tolerance", 0.10)),
    )
    return wcfg, fcfg


def load_pipeline(path: str | Path | None) -> tuple[WindowConfig, FeatureConfig]:
    if path is None:
        return pipeline_from_dict(None)
    return pipeline_from_dict(yaml.safe_load(Path(path).read_text()) or {})


# --- model spec lists -------------------------------------------------------------

def spec_from_dict(d: Mapping, seed: int = 0) -> ModelSpec:
    d = dict(_require_mapping(d, "model spec"))
    if "family" not in d:
        raise DataError("model spec needs a family")
    if "hidden" in d and d["hidden"] is not None:
        d["hidden"] = tuple(int(h) for h in d["hidden"])
    d.setdefault("seed", seed)
    try:
        return ModelSpec(**d)
    except TypeError as exc:
        raise DataError(f"bad model spec: {exc}") from None


def load_specs(path: str | Path, seed: int = 0) -> list[ModelSpec]:
    payload = yaml.safe_load(Path(path).read_text())
    if isinstance(payload, dict) and "specs" in payload:
        payload = payload["specs"]
    if not isinstance(payload, list):
        raise DataError("spec file must hold a list of model specs")
    return [spec_from_dict(item, seed=seed) for item in payload]
