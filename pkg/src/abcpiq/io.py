"""Scenario config files and CSV emission/ingestion.

Config grammar: one ``key = value`` per line, ``#`` starts a comment,
blank lines ignored. Keys are the seven rates (``lambda gamma d0 eta mu
sigma h``), the initial state ``P0 I0 Q0``, and the optional ``theta``,
``b_norm``, ``t_end``, ``steps``, ``order``, ``source_every_term``.
"""

from __future__ import annotations

import csv
import io as _io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError, ParseError, RangeError, UnknownKeyError
from .model import PARAM_NAMES, ModelParams, State

__all__ = [
    "ScenarioConfig",
    "REQUIRED_KEYS",
    "DEFAULTS",
    "parse_config",
    "render_config",
    "load_config",
    "scenario_path",
    "format_number",
    "write_csv",
    "parse_cases",
    "load_cases",
]

REQUIRED_KEYS = PARAM_NAMES + ("P0", "I0", "Q0")
DEFAULTS = {
    "theta": 1.0,
    "b_norm": 1.0,
    "t_end": 100.0,
    "steps": 10000,
    "order": 15,
    "source_every_term": False,
}
_INT_KEYS = {"steps", "order"}
_BOOL_KEYS = {"source_every_term"}
_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


@dataclass(frozen=True)
class ScenarioConfig:
    params: ModelParams
    init: State
    theta: float = 1.0
    b_norm: float = 1.0
    t_end: float = 100.0
    steps: int = 10000
    order: int = 15
    source_every_term: bool = False

    def values(self):
        """Flat key -> value mapping in canonical key order."""
        out = dict(self.params.as_dict())
        out.update(P0=self.init.p, I0=self.init.i, Q0=self.init.q)
        for key in DEFAULTS:
            out[key] = getattr(self, key)
        return out

    def replace(self, **changes):
        vals = self.values()
        vals.update(changes)
        return _build(vals)


def _convert(key, raw, lineno):
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ParseError(f"{key} expects true/false, got {raw!r}", lineno)
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ParseError(f"{key} expects an integer, got {raw!r}", lineno) from None
    try:
        val = float(raw)
    except ValueError:
        raise ParseError(f"{key} expects a number, got {raw!r}", lineno) from None
    if not math.isfinite(val):
        raise RangeError(f"{key} must be finite, got {raw!r}")
    return val


def _build(vals):
    for name in PARAM_NAMES:
        if vals[name] < 0.0:
            raise RangeError(f"rate {name} must be >= 0, got {vals[name]!r}")
    if not 0.0 < vals["theta"] <= 1.0:
        raise RangeError(f"theta must lie in (0, 1], got {vals['theta']!r}")
    if not vals["b_norm"] > 0.0:
        raise RangeError(f"b_norm must be > 0, got {vals['b_norm']!r}")
    if not vals["t_end"] > 0.0:
        raise RangeError(f"t_end must be > 0, got {vals['t_end']!r}")
    if vals["steps"] < 1:
        raise RangeError(f"steps must be >= 1, got {vals['steps']!r}")
    if vals["order"] < 0:
        raise RangeError(f"order must be >= 0, got {vals['order']!r}")
    return ScenarioConfig(
        params=ModelParams.from_dict(vals),
        init=State(vals["P0"], vals["I0"], vals["Q0"]),
        **{k: vals[k] for k in DEFAULTS},
    )


def parse_config(text: str) -> ScenarioConfig:
    """Parse ``key = value`` text into a validated :class:`ScenarioConfig`."""
    allowed = set(REQUIRED_KEYS) | set(DEFAULTS)
    vals = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(f"expected 'key = value', got {body!r}", lineno)
        key, raw = (part.strip() for part in body.split("=", 1))
        if not key or not raw:
            raise ParseError(f"expected 'key = value', got {body!r}", lineno)
        if key not in allowed:
            raise UnknownKeyError(f"line {lineno}: unknown key {key!r}")
        if key in vals:
            raise ParseError(f"duplicate key {key!r}", lineno)
        vals[key] = _convert(key, raw, lineno)
    missing = [k for k in REQUIRED_KEYS if k not in vals]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    for key, default in DEFAULTS.items():
        vals.setdefault(key, default)
    return _build(vals)


def format_number(x) -> str:
    """17 significant digits: parses back to the identical double."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.17g}"


def render_config(cfg: ScenarioConfig, header: str | None = None) -> str:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    lines += [f"{k} = {format_number(v)}" for k, v in cfg.values().items()]
    return "\n".join(lines) + "\n"


def scenario_path(name: str):
    """Path of a shipped scenario file (``table2.cfg`` or ``table3.cfg``)."""
    return resources.files("abcpiq") / "scenarios" / name


def load_config(path) -> ScenarioConfig:
    """Read a config file; bare names of shipped scenarios resolve to the package copy."""
    p = Path(path)
    if not p.exists() and p.name == str(path):
        shipped = scenario_path(p.name)
        if shipped.is_file():
            return parse_config(shipped.read_text(encoding="utf-8"))
    return parse_config(p.read_text(encoding="utf-8"))


def write_csv(stream, header, rows):
    """CSV with a single header row, '.' decimals and '\\n' line endings.

    Floats use the shortest repr that round-trips.
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if not isinstance(v, str) else v for v in row])


def parse_cases(text: str, label: str = ""):
    """Parse a ``t,cases`` CSV into a CaseSeries."""
    from .calibrate import CaseSeries

    reader = csv.reader(_io.StringIO(text))
    rows = [r for r in reader if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ParseError("empty case file")
    header = [c.strip() for c in rows[0]]
    if header != ["t", "cases"]:
        raise ParseError(f"case file header must be 't,cases', got {','.join(header)!r}", 1)
    obs = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ParseError("expected two columns", lineno)
        try:
            obs.append((float(row[0]), float(row[1])))
        except ValueError:
            raise ParseError(f"non-numeric entry {row!r}", lineno) from None
    return CaseSeries(obs, label)


def load_cases(path):
    p = Path(path)
    return parse_cases(p.read_text(encoding="utf-8"), label=p.stem)
