"""Scenario documents: transducer, PMU overrides, and an input/load schedule.

A scenario is a JSON object::

    {
      "name": "figure16_like",
      "duration_s": 0.06, "dt_s": 1e-5, "trace_every_s": 1e-4,
      "freq_hz": 350000,
      "transducer": {"preset": "trilayer"} | {"path": "model.json"} | {<model json keys>},
      "pmu": {<PmuConfig overrides>},
      "initial": {"v_sto": 0.5, "v_reg": 0.0, "v_hv": 0.0, "cr_sto_index": 4, ...},
      "schedule": [
        {"t_start_s": 0.0, "v_s_amp_v": 2.14, "load_current_a": 1e-4},
        {"t_start_s": 0.02, "v_s_amp_v": 1.66, "ramp_s": 0.0},
        {"t_start_s": 0.05, "power_off": true, "hv_trigger": 12.0}
      ],
      "metrics_window_s": [0.04, 0.06]
    }

Schedule entries inherit unspecified fields from the previous entry.
``hv_trigger`` is a target voltage (starts a charging task) or ``false``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import ConfigError, InputError
from ..transducer import BILAYER, TRILAYER, BvdModel, load_model_json, model_from_dict
from .config import PmuConfig

__all__ = ["Segment", "Scenario", "load_scenario", "scenario_from_dict", "bundled_scenarios",
           "load_bundled"]

_PRESETS = {"trilayer": TRILAYER, "bilayer": BILAYER}
_TOP_KEYS = {"name", "description", "duration_s", "dt_s", "trace_every_s", "freq_hz", "transducer",
             "pmu", "initial", "schedule", "metrics_window_s"}
_SEG_KEYS = {"t_start_s", "v_s_amp_v", "power_off", "load_current_a", "hv_trigger", "ramp_s"}
_INITIAL_KEYS = {"v_sto", "v_reg", "v_hv", "cr_sto_index", "cr_reg_index", "duty_filtered"}


@dataclass(frozen=True)
class Segment:
    t_start: float
    v_s_amp: float
    load_current: float = 0.0
    hv_target: float | None = None
    ramp_s: float = 0.0


@dataclass(frozen=True)
class Scenario:
    name: str
    model: BvdModel
    freq_hz: float
    duration: float
    schedule: tuple[Segment, ...]
    dt: float = 1e-5
    trace_every: float | None = None
    pmu: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    metrics_window: tuple[float, float] | None = None
    description: str = ""

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.freq_hz

    def config(self) -> PmuConfig:
        return PmuConfig.from_dict(self.pmu)

    def segment_at(self, t: float) -> tuple[Segment, float]:
        """Active segment at ``t`` and the source amplitude there (ramps interpolated)."""
        idx = 0
        for i, s in enumerate(self.schedule):
            if s.t_start <= t:
                idx = i
            else:
                break
        seg = self.schedule[idx]
        v = seg.v_s_amp
        if seg.ramp_s > 0.0 and t < seg.t_start + seg.ramp_s:
            prev = self.schedule[idx - 1].v_s_amp if idx > 0 else 0.0
            v = prev + (seg.v_s_amp - prev) * (t - seg.t_start) / seg.ramp_s
        return seg, v

    def with_changes(self, **kw) -> "Scenario":
        import dataclasses

        return dataclasses.replace(self, **kw)


def _num(d, key, path, default=None, positive=False, nonneg=False):
    if key not in d:
        if default is None:
            raise InputError(f"missing required key '{key}'", path=path)
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise InputError(f"'{key}' must be a finite number", path=path)
    if positive and v <= 0:
        raise InputError(f"'{key}' must be positive", path=path)
    if nonneg and v < 0:
        raise InputError(f"'{key}' must be non-negative", path=path)
    return float(v)


def _transducer(spec, base: Path | None, path: str) -> BvdModel:
    if spec is None:
        return TRILAYER
    if not isinstance(spec, dict):
        raise InputError("'transducer' must be an object", path=path)
    if "preset" in spec:
        try:
            m = _PRESETS[spec["preset"]]
        except KeyError:
            raise InputError(f"unknown preset {spec['preset']!r}", path=f"{path}.preset") from None
        if "v_s_amp_v" in spec:
            m = m.with_source(float(spec["v_s_amp_v"]))
        return m
    if "path" in spec:
        p = Path(spec["path"])
        if base is not None and not p.is_absolute():
            p = base / p
        return load_model_json(p)
    return model_from_dict(spec)


def scenario_from_dict(doc: dict, base: Path | None = None) -> Scenario:
    """Validate a scenario mapping.  Schema violations raise InputError naming the path."""
    if not isinstance(doc, dict):
        raise InputError("scenario must be a JSON object", path="$")
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise InputError(f"unknown keys {unknown}", path="$")
    duration = _num(doc, "duration_s", "$.duration_s", positive=True)
    dt = _num(doc, "dt_s", "$.dt_s", default=1e-5, positive=True)
    if dt > duration:
        raise InputError("dt_s exceeds duration_s", path="$.dt_s")
    trace_every = doc.get("trace_every_s")
    if trace_every is not None:
        trace_every = _num(doc, "trace_every_s", "$.trace_every_s", positive=True)
    freq = _num(doc, "freq_hz", "$.freq_hz", default=350e3, positive=True)
    model = _transducer(doc.get("transducer"), base, "$.transducer")

    pmu = doc.get("pmu", {})
    if not isinstance(pmu, dict):
        raise InputError("'pmu' must be an object", path="$.pmu")
    try:
        PmuConfig.from_dict(pmu)
    except ConfigError as exc:
        raise InputError(str(exc), path="$.pmu") from None

    initial = doc.get("initial", {})
    if not isinstance(initial, dict) or set(initial) - _INITIAL_KEYS:
        raise InputError(f"'initial' accepts only {sorted(_INITIAL_KEYS)}", path="$.initial")

    sched = doc.get("schedule")
    if not isinstance(sched, list) or not sched:
        raise InputError("'schedule' must be a non-empty list", path="$.schedule")
    segs = []
    prev = {"v_s_amp_v": 0.0, "load_current_a": 0.0, "hv_trigger": False}
    last_t = -math.inf
    for i, entry in enumerate(sched):
        p = f"$.schedule[{i}]"
        if not isinstance(entry, dict):
            raise InputError("entry must be an object", path=p)
        bad = sorted(set(entry) - _SEG_KEYS)
        if bad:
            raise InputError(f"unknown keys {bad}", path=p)
        t0 = _num(entry, "t_start_s", f"{p}.t_start_s", nonneg=True) if "t_start_s" in entry else None
        if t0 is None:
            raise InputError("missing required key 't_start_s'", path=p)
        if t0 <= last_t:
            raise InputError("t_start_s must be strictly increasing", path=f"{p}.t_start_s")
        if i == 0 and t0 != 0.0:
            raise InputError("first entry must start at 0", path=f"{p}.t_start_s")
        last_t = t0
        cur = dict(prev)
        cur.update({k: v for k, v in entry.items() if k not in ("power_off", "ramp_s")})
        if entry.get("power_off"):
            cur["v_s_amp_v"] = 0.0
        v_s = _num(cur, "v_s_amp_v", f"{p}.v_s_amp_v", nonneg=True)
        load = _num(cur, "load_current_a", f"{p}.load_current_a", nonneg=True)
        hv = cur.get("hv_trigger", False)
        if hv is False or hv is None:
            hv_target = None
        elif isinstance(hv, (int, float)) and not isinstance(hv, bool) and 0 < hv <= 12:
            hv_target = float(hv)
        else:
            raise InputError("hv_trigger must be false or a target voltage in (0, 12]", path=f"{p}.hv_trigger")
        ramp = _num(entry, "ramp_s", f"{p}.ramp_s", default=0.0, nonneg=True) if "ramp_s" in entry else 0.0
        segs.append(Segment(t0, v_s, load, hv_target, ramp))
        prev = cur

    window = doc.get("metrics_window_s")
    if window is not None:
        if (not isinstance(window, list) or len(window) != 2
                or not all(isinstance(x, (int, float)) for x in window) or not window[0] < window[1]):
            raise InputError("metrics_window_s must be [start, end] with start < end", path="$.metrics_window_s")
        window = (float(window[0]), float(window[1]))

    return Scenario(
        name=str(doc.get("name", "scenario")), model=model, freq_hz=freq, duration=duration,
        schedule=tuple(segs), dt=dt, trace_every=trace_every, pmu=dict(pmu), initial=dict(initial),
        metrics_window=window, description=str(doc.get("description", "")),
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc.msg}", line=exc.lineno, path=path) from None
    return scenario_from_dict(doc, base=path.parent)


def bundled_scenarios() -> list[str]:
    root = resources.files("mewpt.pmu") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_bundled(name: str) -> Scenario:
    root = resources.files("mewpt.pmu") / "scenarios"
    res = root / f"{name}.json"
    if not res.is_file():
        raise InputError(f"no bundled scenario named {name!r}; available: {bundled_scenarios()}")
    return scenario_from_dict(json.loads(res.read_text()))
