"""Sectioned key-value experiment configs with unit-checked values.

Format (read with :mod:`configparser`)::

    [experiment]
    name = gate2q

    [gate]
    delta = 10 meV
    V_ex = 2 µeV

Numbers may carry a unit after a space; if present it must be the unit the
key is declared in.  Sweep configs may give up to two keys as ranges,
``linspace(0.2, 1.0, 5) µm`` or ``[0.2, 0.5] µm``.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigurationError

EXPERIMENTS = ("trapspec", "lattice", "gate2q", "gate1q", "qnd", "sweep", "verify")
REQUIRED = object()

UNIT_ALIASES = {
    "meV": {"meV"},
    "µeV": {"µeV", "ueV", "μeV"},
    "ps": {"ps"},
    "µm": {"µm", "um", "μm"},
    "µm^3": {"µm^3", "um^3", "μm^3"},
    "T": {"T"},
    "W": {"W"},
    "m0": {"m0"},
    "ps^-1/2": {"ps^-1/2", "1/sqrt(ps)"},
    "1/ps": {"1/ps", "ps^-1"},
    "rad": {"rad"},
}


@dataclass(frozen=True)
class Field:
    unit: str | None = None
    default: Any = REQUIRED
    kind: type = float
    lo: float | None = None
    hi: float | None = None
    choices: tuple | None = None
    lo_open: bool = False

    @property
    def required(self) -> bool:
        return self.default is REQUIRED


def _f(unit=None, default=REQUIRED, **kw) -> Field:
    return Field(unit, default, **kw)


POS = dict(lo=0.0, lo_open=True)
NONNEG = dict(lo=0.0)

OUTPUT = {"format": _f(None, "csv", kind=str, choices=("csv", "json"))}

SCHEMA: dict[str, dict[str, dict[str, Field]]] = {
    "trapspec": {
        "trap": {
            "R": _f("µm", **POS), "D": _f("µm", **NONNEG), "depth": _f("meV", **POS),
            "m_eff": _f("m0", 4e-5, **POS), "dx": _f("µm", 0.02, **POS),
            "padding": _f("µm", 2.0, **POS), "levels": _f(None, 2, kind=int, lo=2),
        },
        "output": OUTPUT,
    },
    "lattice": {
        "lattice": {
            "nx": _f(None, kind=int, lo=1), "ny": _f(None, kind=int, lo=1),
            "U": _f("meV", **NONNEG), "delta": _f("meV"), "gamma": _f("meV", **POS),
            "gamma_t": _f("meV", **NONNEG), "F_T": _f("ps^-1/2", **NONNEG),
            "tau": _f("ps", **POS), "tau_r": _f("ps", **POS),
            "t_start": _f("ps"), "t_stop": _f("ps"),
            "window_start": _f("ps"), "window_stop": _f("ps"),
            "compensate": _f(None, True, kind=bool),
        },
        "numerics": {"dt": _f("ps", 0.01, **POS), "store_every": _f(None, 100, kind=int, lo=1)},
        "output": OUTPUT,
    },
    "gate2q": {
        "gate": {
            "strategy": _f(None, kind=str, choices=("single_pulse", "geometric_two_pulse")),
            "delta": _f("meV", **POS), "delta2": _f("meV", 0.0, **NONNEG),
            "V_ex": _f("µeV"), "U": _f("meV", 0.5, **NONNEG), "g": _f("meV", 0.04, **NONNEG),
            "gamma": _f("meV", **POS), "gamma_t": _f("meV", **NONNEG),
            "Q": _f(None, **POS), "mode_volume": _f("µm^3", 0.5, **POS),
            "power": _f("W", **POS), "wavelength": _f("µm", 0.910, **POS),
            "trion_offset": _f("meV", 20.0),
        },
        "numerics": {
            "dt": _f("ps", 0.005, **POS), "coarse_dt": _f("ps", 0.25, **POS),
            "window": _f(None, 3.0, **POS), "tol": _f("rad", 1e-4, **POS),
            "tau_min": _f("ps", 50.0, **POS), "tau_max": _f("ps", 4e5, **POS),
        },
        "output": OUTPUT,
    },
    "gate1q": {
        "rotation": {
            "E_z": _f("meV", **POS), "V_ex": _f("µeV", **NONNEG), "N_target": _f(None, **NONNEG),
            "tau": _f("ps", **POS), "tau_r": _f("ps", **POS), "gamma": _f("meV", **POS),
            "gamma_t": _f("meV", **NONNEG), "delta": _f("meV", **POS),
            "g_factor": _f(None, 2.0, **POS), "t_pi": _f("ps", **POS),
            "extra_dephasing": _f("1/ps", 0.0, **NONNEG),
        },
        "numerics": {"dt": _f("ps", 0.002, **POS), "store_every": _f(None, 250, kind=int, lo=1)},
        "output": OUTPUT,
    },
    "qnd": {
        "readout": {
            "sidedness": _f(None, kind=str, choices=("single_sided", "symmetric_two_sided")),
            "delta": _f("meV"), "V": _f("meV", 0.05), "V_s": _f("meV", 0.0, **NONNEG),
            "V_ex": _f("µeV"), "anisotropic": _f(None, True, kind=bool),
            "rabi_splitting": _f("meV", 3.0, **POS),
            "gamma": _f("meV", **POS), "F_T": _f("ps^-1/2", **NONNEG),
            "eta": _f(None, 1.0, lo=0.0, hi=1.0, lo_open=True),
            "measurement": _f(None, "phase", kind=str, choices=("phase", "intensity")),
            "U": _f("meV", 0.5, **NONNEG), "ramp": _f("ps", 50.0, **POS),
            "model_constant": _f(None, 1.0, **POS),
            "target_P_e": _f(None, 1e-3, lo=0.0, hi=0.5, lo_open=True),
        },
        "numerics": {
            "dt": _f("ps", 0.02, **POS), "tau_start": _f("ps", 10.0, **POS),
            "tau_ratio": _f(None, 1.05, lo=1.0, lo_open=True), "tau_cap": _f("ps", 1e7, **POS),
        },
        "output": OUTPUT,
    },
    "verify": {"output": OUTPUT},
}
SWEEP_SECTION = {
    "experiment": _f(None, kind=str, choices=("trapspec", "lattice", "gate2q", "gate1q", "qnd")),
    "metrics": _f(None, kind=str),
}

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_RANGE_LIN = re.compile(rf"^linspace\(\s*({_NUM})\s*,\s*({_NUM})\s*,\s*(\d+)\s*\)\s*(.*)$")
_RANGE_LIST = re.compile(r"^\[(.*)\]\s*(.*)$")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated config: ``values[section][key]`` in canonical units."""

    experiment: str
    values: dict = field(default_factory=dict)
    ranges: dict = field(default_factory=dict)  # (section, key) -> tuple of values
    sweep_target: str | None = None
    metrics: tuple[str, ...] = ()
    source: str = ""

    def section(self, name: str) -> dict:
        return dict(self.values.get(name, {}))

    @property
    def format(self) -> str:
        return self.values.get("output", {}).get("format", "csv")

    def resolved(self) -> dict:
        """Plain-data view for manifests."""
        out = {"experiment": self.experiment, "values": self.values}
        if self.ranges:
            out["ranges"] = {f"{s}.{k}": list(v) for (s, k), v in self.ranges.items()}
            out["sweep_target"] = self.sweep_target
            out["metrics"] = list(self.metrics)
        return out


def _split_unit(text: str, key: str, fld: Field) -> tuple[str, str | None]:
    text = text.strip()
    if fld.kind is not float:
        return text, None
    m = re.match(rf"^({_NUM})\s*(.*)$", text)
    if not m:
        raise ConfigurationError(f"{key}: expected a number, got {text!r}", key=key)
    return m.group(1), (m.group(2).strip() or None)


def _check_unit(unit: str | None, key: str, fld: Field) -> None:
    if unit is None:
        return
    if fld.unit is None:
        raise ConfigurationError(f"{key}: dimensionless value given unit {unit!r}", key=key)
    if unit not in UNIT_ALIASES[fld.unit]:
        raise ConfigurationError(f"{key}: unit {unit!r} not accepted, expected {fld.unit}", key=key)


def _check_range(value, key: str, fld: Field) -> None:
    if fld.choices is not None and value not in fld.choices:
        raise ConfigurationError(f"{key}: {value!r} not one of {fld.choices}", key=key)
    if fld.kind in (float, int) and not isinstance(value, bool):
        if not np.isfinite(value):
            raise ConfigurationError(f"{key}: value must be finite", key=key)
        if fld.lo is not None and (value < fld.lo or (fld.lo_open and value == fld.lo)):
            raise ConfigurationError(f"{key}={value} below allowed minimum {fld.lo}", key=key)
        if fld.hi is not None and value > fld.hi:
            raise ConfigurationError(f"{key}={value} above allowed maximum {fld.hi}", key=key)


def _parse_scalar(text: str, key: str, fld: Field):
    if fld.kind is bool:
        t = text.strip().lower()
        if t in ("true", "yes", "1", "on"):
            return True
        if t in ("false", "no", "0", "off"):
            return False
        raise ConfigurationError(f"{key}: expected a boolean, got {text!r}", key=key)
    if fld.kind is str:
        value = text.strip()
    elif fld.kind is int:
        try:
            value = int(text.strip())
        except ValueError as exc:
            raise ConfigurationError(f"{key}: expected an integer, got {text!r}", key=key) from exc
    else:
        num, unit = _split_unit(text, key, fld)
        _check_unit(unit, key, fld)
        value = float(num)
    _check_range(value, key, fld)
    return value


def _parse_range(text: str, key: str, fld: Field):
    """Return a tuple of values if ``text`` is a range literal, else None."""
    m = _RANGE_LIN.match(text.strip())
    if m:
        if fld.kind is not float:
            raise ConfigurationError(f"{key}: ranges need a numeric key", key=key)
        _check_unit(m.group(4).strip() or None, key, fld)
        vals = np.linspace(float(m.group(1)), float(m.group(2)), int(m.group(3)))
    else:
        m = _RANGE_LIST.match(text.strip())
        if not m:
            return None
        items = [s for s in (x.strip() for x in m.group(1).split(",")) if s]
        if fld.kind is float:
            _check_unit(m.group(2).strip() or None, key, fld)
        vals = [_parse_scalar(s, key, fld) for s in items]
    out = tuple(v.item() if hasattr(v, "item") else v for v in vals)
    for v in out:
        _check_range(v, key, fld)
    return out


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case-sensitive (E_z, V_ex)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigurationError(f"unreadable config: {exc}", key="") from exc
    if not parser.has_option("experiment", "name"):
        raise ConfigurationError("missing required key experiment.name", key="experiment.name")
    name = parser.get("experiment", "name").strip()
    if name not in EXPERIMENTS:
        raise ConfigurationError(f"unknown experiment {name!r}", key="experiment.name")
    extra = set(parser.options("experiment")) - {"name"}
    if extra:
        key = sorted(extra)[0]
        raise ConfigurationError(f"unknown key experiment.{key}", key=f"experiment.{key}")

    sweep_target, metrics = None, ()
    target = name
    if name == "sweep":
        if not parser.has_section("sweep"):
            raise ConfigurationError("sweep config needs a [sweep] section", key="sweep")
        for k in parser.options("sweep"):
            if k not in SWEEP_SECTION:
                raise ConfigurationError(f"unknown key sweep.{k}", key=f"sweep.{k}")
        for k in SWEEP_SECTION:
            if not parser.has_option("sweep", k):
                raise ConfigurationError(f"missing required key sweep.{k}", key=f"sweep.{k}")
        sweep_target = _parse_scalar(parser.get("sweep", "experiment"), "sweep.experiment",
                                     SWEEP_SECTION["experiment"])
        metrics = tuple(m.strip() for m in parser.get("sweep", "metrics").split(",") if m.strip())
        target = sweep_target

    schema = SCHEMA[target]
    allowed_sections = set(schema) | {"experiment"} | ({"sweep"} if name == "sweep" else set())
    for sec in parser.sections():
        if sec not in allowed_sections:
            raise ConfigurationError(f"unknown section [{sec}] for {target}", key=sec)

    values: dict = {}
    ranges: dict = {}
    for sec, fields in schema.items():
        got = parser.options(sec) if parser.has_section(sec) else []
        for k in got:
            if k not in fields:
                raise ConfigurationError(f"unknown key {sec}.{k}", key=f"{sec}.{k}")
        vals = {}
        for k, fld in fields.items():
            full = f"{sec}.{k}"
            if k not in got:
                if fld.required:
                    raise ConfigurationError(f"missing required key {full}", key=full)
                vals[k] = fld.default
                continue
            raw = parser.get(sec, k)
            rng = _parse_range(raw, full, fld) if name == "sweep" else None
            if rng is not None:
                ranges[(sec, k)] = rng
                vals[k] = rng[0] if rng else (None if fld.required else fld.default)
            else:
                vals[k] = _parse_scalar(raw, full, fld)
        values[sec] = vals
    if name == "sweep" and len(ranges) > 2:
        raise ConfigurationError(f"at most 2 ranged parameters, got {len(ranges)}",
                                 key=",".join(f"{s}.{k}" for s, k in ranges))
    cfg = ExperimentConfig(name, values, ranges, sweep_target, metrics, source)
    _cross_check(target, values)
    return cfg


def _cross_check(target: str, values: dict) -> None:
    """Range checks that involve more than one key."""
    if target == "lattice":
        lat = values["lattice"]
        if lat["gamma_t"] > lat["gamma"]:
            raise ConfigurationError("lattice.gamma_t exceeds lattice.gamma", key="lattice.gamma_t")
        if lat["t_stop"] <= lat["t_start"]:
            raise ConfigurationError("lattice.t_stop must exceed t_start", key="lattice.t_stop")
    if target == "gate2q":
        g = values["gate"]
        if g["gamma_t"] > g["gamma"]:
            raise ConfigurationError("gate.gamma_t exceeds gate.gamma", key="gate.gamma_t")
        if g["strategy"] == "geometric_two_pulse" and g["delta2"] <= 0:
            raise ConfigurationError("geometric_two_pulse needs gate.delta2 > 0", key="gate.delta2")
    if target == "gate1q":
        r = values["rotation"]
        if r["gamma_t"] > r["gamma"]:
            raise ConfigurationError("rotation.gamma_t exceeds rotation.gamma", key="rotation.gamma_t")
        if r["E_z"] <= r["V_ex"] * 1e-3 * r["N_target"]:
            raise ConfigurationError("rotation.E_z must exceed V_ex·N_target", key="rotation.E_z")
    if target == "trapspec":
        t = values["trap"]
        if t["dx"] > t["R"] / 10:
            raise ConfigurationError("trap.dx coarser than R/10", key="trap.dx")
        if t["padding"] < 2 * t["R"]:
            raise ConfigurationError("trap.padding must be at least 2R", key="trap.padding")


def load_config(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {p}: {exc}", key="--config") from exc
    return parse_config(text, str(p))


def preset_names() -> list[str]:
    root = resources.files("polariton_qubits") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def preset_text(name: str) -> str:
    root = resources.files("polariton_qubits") / "presets"
    f = root / f"{name}.ini"
    if not f.is_file():
        raise ConfigurationError(f"unknown preset {name!r}; available: {preset_names()}",
                                 key="--preset")
    return f.read_text(encoding="utf-8")


def load_preset(name: str) -> ExperimentConfig:
    return parse_config(preset_text(name), f"preset:{name}")
