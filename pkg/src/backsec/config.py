"""Flat key-value config documents, sweep specifications, and CSV emission.

Config syntax: one `key = value` per line, `#` comments, blank lines ignored.
Values may carry a unit suffix: dB (converted as 10^(x/10)), m, uW, W.  Bare
numbers are linear / SI base units.  The circuit draw `p_c` has no default on
purpose: the bundled harvester constants are internally inconsistent without
an explicit choice, so every config must state it.
"""

from __future__ import annotations

import importlib.resources
import math
import re
from dataclasses import dataclass, replace

from .channel import NakagamiLink
from .ehmodel import EhParams
from .errors import ConfigParseError, ValidationError
from .montecarlo import McConfig, PROTOCOL_ORDER
from .system import ProtocolKind, SystemParams

__all__ = ["SweepSpec", "load_config", "loads_config", "preset_names", "preset_text"]

AXES = ("gamma_t_db", "d_d", "d_e", "rate", "m_all")
METHODS = ("exact", "asymptotic", "mc")

_DB = "db"
_POWER = "power"      # W / uW suffixes
_DISTANCE = "dist"    # m suffix
_PLAIN = "plain"
_INT = "int"
_WORDS = "words"
_FLOATS = "floats"

# key -> (kind, default); _REQUIRED means the config must set it explicitly.
_REQUIRED = object()
_KEYS = {
    "metric": (_WORDS, "sop"),
    "methods": (_WORDS, "exact, asymptotic, mc"),
    "protocols": (_WORDS, "sots, mets, ots, rts"),
    "axis": (_WORDS, "gamma_t_db"),
    "axis_values": (_FLOATS, "0, 5, 10, 15, 20, 25, 30, 35, 40"),
    "gamma_t": (_DB, 1000.0),
    "p_tx": (_POWER, 1.0),
    "gamma_p": (_DB, 10 ** 0.5),
    "zeta": (_PLAIN, 2.2),
    "n_tags": (_INT, 3),
    "rate": (_PLAIN, 0.5),
    "m_sk": (_INT, 2),
    "m_kd": (_INT, 2),
    "m_ke": (_INT, 2),
    "lambda_sk": (_DB, 10 ** 0.2),
    "lambda_kd": (_DB, 10 ** 0.3),
    "lambda_ke": (_DB, 10 ** 0.5),
    "d_s": (_DISTANCE, 1.0),
    "d_d": (_DISTANCE, 2.0),
    "d_e": (_DISTANCE, 4.0),
    "u_s": (_PLAIN, 2.0),
    "u_d": (_PLAIN, 2.0),
    "u_e": (_PLAIN, 2.0),
    "p_max": (_POWER, 200e-6),
    "xi0": (_POWER, 5e-6),
    "xi1": (_PLAIN, 5000.0),
    "xi2": (_PLAIN, 2e-4),
    "p_c": (_POWER, _REQUIRED),
    "trials": (_INT, 1_000_000),
    "seed": (_INT, 1),
    "batch_size": (_INT, 65536),
    "workers": (_INT, 1),
}

_NUM_UNIT = re.compile(r"^\s*([-+]?[0-9.]+(?:[eE][-+]?[0-9]+)?)\s*([A-Za-z]*)\s*$")


def _parse_scalar(key: str, kind: str, raw: str, line_no: int) -> float:
    m = _NUM_UNIT.match(raw)
    if not m:
        raise ConfigParseError(f"cannot parse value {raw!r} for key {key!r}", line_no)
    try:
        value = float(m.group(1))
    except ValueError:
        raise ConfigParseError(f"bad number {m.group(1)!r} for key {key!r}", line_no) from None
    unit = m.group(2)
    if unit == "":
        return value
    if unit == "dB":
        if kind != _DB:
            raise ConfigParseError(f"key {key!r} does not accept dB values", line_no)
        return 10.0 ** (value / 10.0)
    if unit == "m":
        if kind != _DISTANCE:
            raise ConfigParseError(f"key {key!r} does not accept a distance unit", line_no)
        return value
    if unit in ("W", "uW"):
        if kind != _POWER:
            raise ConfigParseError(f"key {key!r} does not accept a power unit", line_no)
        return value * (1e-6 if unit == "uW" else 1.0)
    raise ConfigParseError(f"unknown unit {unit!r} (use dB, m, uW or W)", line_no)


@dataclass(frozen=True)
class SweepSpec:
    """A fully resolved sweep: which metric/methods/protocols to evaluate,
    the axis to walk, the base scenario, and the simulation budget."""

    metric: str
    methods: tuple
    protocols: tuple
    axis: str
    axis_values: tuple
    base: SystemParams
    mc: McConfig

    def to_text(self) -> str:
        """Emit the resolved configuration (all linear units); reloading the
        result reproduces this spec exactly."""
        b = self.base
        link_s = b.links_of("s")[0]
        link_d = b.links_of("d")[0]
        link_e = b.links_of("e")[0]
        b.require_homogeneous()
        lines = [
            "# resolved configuration (linear units)",
            f"metric = {self.metric}",
            "methods = " + ", ".join(self.methods),
            "protocols = " + ", ".join(p.value for p in self.protocols),
            f"axis = {self.axis}",
            "axis_values = " + ", ".join(repr(v) for v in self.axis_values),
            f"gamma_t = {b.gamma_t!r}",
            f"p_tx = {b.p_tx!r}",
            f"gamma_p = {b.gamma_p!r}",
            f"zeta = {b.zeta!r}",
            f"n_tags = {b.n_tags}",
            f"rate = {b.rate_threshold!r}",
            f"m_sk = {link_s.m}",
            f"m_kd = {link_d.m}",
            f"m_ke = {link_e.m}",
            f"lambda_sk = {link_s.lambda_tilde!r}",
            f"lambda_kd = {link_d.lambda_tilde!r}",
            f"lambda_ke = {link_e.lambda_tilde!r}",
            f"d_s = {link_s.distance!r}",
            f"d_d = {link_d.distance!r}",
            f"d_e = {link_e.distance!r}",
            f"u_s = {link_s.pathloss_exp!r}",
            f"u_d = {link_d.pathloss_exp!r}",
            f"u_e = {link_e.pathloss_exp!r}",
            f"p_max = {b.eh.p_max!r}",
            f"xi0 = {b.eh.xi0!r}",
            f"xi1 = {b.eh.xi1!r}",
            f"xi2 = {b.eh.xi2!r}",
            f"p_c = {b.eh.p_c!r}",
            f"trials = {self.mc.trials}",
            f"seed = {self.mc.seed}",
            f"batch_size = {self.mc.batch_size}",
            f"workers = {self.mc.workers}",
        ]
        return "\n".join(lines) + "\n"


def _parse_lines(text: str) -> dict:
    parsed = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {raw_line.strip()!r}", line_no)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in _KEYS:
            raise ConfigParseError(f"unknown key {key!r}", line_no)
        if not value:
            raise ConfigParseError(f"empty value for key {key!r}", line_no)
        parsed[key] = (value, line_no)
    return parsed


def loads_config(text: str) -> SweepSpec:
    """Parse and validate a config document from a string."""
    parsed = _parse_lines(text)

    def get(key: str):
        kind, default = _KEYS[key]
        if key in parsed:
            value, line_no = parsed[key]
        else:
            if default is _REQUIRED:
                raise ValidationError(
                    f"config must set {key!r} explicitly (e.g. 'p_c = 100 uW'); "
                    "the stock harvester constants leave it ambiguous"
                )
            if kind in (_WORDS, _FLOATS):
                value, line_no = default, 0
            else:
                return default
        if kind == _WORDS:
            return tuple(w.strip().lower() for w in value.split(",") if w.strip())
        if kind == _FLOATS:
            out = []
            for tok in value.split(","):
                tok = tok.strip()
                if not tok:
                    continue
                try:
                    out.append(float(tok))
                except ValueError:
                    raise ConfigParseError(f"bad number {tok!r} in {key}", line_no) from None
            return tuple(out)
        scalar = _parse_scalar(key, kind, value, line_no)
        if kind == _INT:
            if scalar != int(scalar):
                raise ConfigParseError(f"key {key!r} must be an integer", line_no)
            return int(scalar)
        return scalar

    metric_words = get("metric")
    if len(metric_words) != 1 or metric_words[0] not in ("sop", "ip"):
        raise ValidationError(f"metric must be 'sop' or 'ip', got {metric_words}")
    metric = metric_words[0]

    methods = get("methods")
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise ValidationError(f"methods must be a subset of {METHODS}, got {methods}")
    methods = tuple(m for m in METHODS if m in methods)

    proto_words = get("protocols")
    try:
        chosen = tuple(ProtocolKind(w) for w in proto_words)
    except ValueError:
        raise ValidationError(f"protocols must be among sots/mets/ots/rts, got {proto_words}") from None
    if not chosen:
        raise ValidationError("protocols must not be empty")
    protocols = tuple(p for p in PROTOCOL_ORDER if p in chosen)

    axis_words = get("axis")
    if len(axis_words) != 1 or axis_words[0] not in AXES:
        raise ValidationError(f"axis must be one of {AXES}, got {axis_words}")
    axis = axis_words[0]

    axis_values = get("axis_values")
    if not axis_values:
        raise ValidationError("axis_values must not be empty")
    if any(b <= a for a, b in zip(axis_values, axis_values[1:])):
        raise ValidationError(f"axis_values must be strictly increasing, got {axis_values}")
    if axis == "m_all":
        if any(v != int(v) or v < 1 for v in axis_values):
            raise ValidationError(f"m_all axis values must be positive integers, got {axis_values}")
    elif axis in ("d_d", "d_e") and axis_values[0] <= 0:
        raise ValidationError(f"{axis} axis values must be positive, got {axis_values}")
    elif axis == "rate" and axis_values[0] < 0:
        raise ValidationError(f"rate axis values must be non-negative, got {axis_values}")

    eh = EhParams(p_max=get("p_max"), xi0=get("xi0"), xi1=get("xi1"),
                  xi2=get("xi2"), p_c=get("p_c"))
    base = SystemParams(
        p_tx=get("p_tx"),
        gamma_t=get("gamma_t"),
        gamma_p=get("gamma_p"),
        zeta=get("zeta"),
        n_tags=get("n_tags"),
        rate_threshold=get("rate"),
        link_s=NakagamiLink.from_lambda_tilde(get("m_sk"), get("lambda_sk"), get("d_s"), get("u_s")),
        link_d=NakagamiLink.from_lambda_tilde(get("m_kd"), get("lambda_kd"), get("d_d"), get("u_d")),
        link_e=NakagamiLink.from_lambda_tilde(get("m_ke"), get("lambda_ke"), get("d_e"), get("u_e")),
        eh=eh,
    )
    mc = McConfig(trials=get("trials"), seed=get("seed"),
                  batch_size=get("batch_size"), workers=get("workers"))
    return SweepSpec(metric=metric, methods=methods, protocols=protocols,
                     axis=axis, axis_values=axis_values, base=base, mc=mc)


def load_config(path) -> SweepSpec:
    """Parse and validate a config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return loads_config(fh.read())


def apply_axis(base: SystemParams, axis: str, value: float) -> SystemParams:
    """Scenario at one sweep point.  gamma_t_db rescales transmit power at
    fixed noise; m_all changes the shapes keeping each lambda_tilde fixed."""
    if axis == "gamma_t_db":
        return base.with_transmit_snr(10.0 ** (value / 10.0))
    if axis == "d_d":
        link = base.links_of("d")[0]
        return replace(base, link_d=replace(link, distance=value))
    if axis == "d_e":
        link = base.links_of("e")[0]
        return replace(base, link_e=replace(link, distance=value))
    if axis == "rate":
        return replace(base, rate_threshold=value)
    if axis == "m_all":
        m = int(value)
        new = {}
        for field, fam in (("link_s", "s"), ("link_d", "d"), ("link_e", "e")):
            link = base.links_of(fam)[0]
            new[field] = NakagamiLink.from_lambda_tilde(
                m, link.lambda_tilde, link.distance, link.pathloss_exp)
        return replace(base, **new)
    raise ValidationError(f"unknown axis {axis!r}")


def preset_names() -> tuple:
    root = importlib.resources.files("backsec") / "presets"
    return tuple(sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg")))


def preset_text(name: str) -> str:
    resource = importlib.resources.files("backsec") / "presets" / f"{name}.cfg"
    try:
        return resource.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValidationError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        ) from None
