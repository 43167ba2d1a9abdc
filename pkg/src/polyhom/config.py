"""Keyed-text run configuration.

A config file is flat ``key = value`` text with one level of ``[section]``
nesting.  Top-level keys come before the first section:

    version = 1
    command = iterate

    [problem]
    kind = hemisphere
    n = 3
    K = 12

Every key is checked against a fixed schema; unknown sections or keys,
missing ``version`` and nonpositive tolerances are configuration errors.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError
from .problems import ProblemSpec
from .tangential import TangentialPoly

COMMANDS = ("expand", "iterate", "match", "validate", "ln-coeffs", "friedman")
KINDS = ("hemisphere", "minimal_graph", "ln_halfspace", "ln_ball", "linear")
SUPPORTED_VERSIONS = (1,)
ROOT = "__root__"

SCHEMA: dict[str, dict[str, str]] = {
    ROOT: {"version": "int", "command": "str"},
    "problem": {
        "kind": "str", "n": "int", "K": "int", "tangential_degree": "int", "R": "rational",
        "phi": "poly", "datum": "poly", "m_low": "int", "m_high": "int",
        "forcing": "forcing", "quadratic": "rational",
    },
    "output": {"dir": "str", "series": "str", "majorant": "str", "grid": "str", "slopes": "str",
               "report": "str", "grid_every": "int"},
    "majorant": {"s0": "float", "a0": "float", "theta": "float", "lattice": "int", "burn_in": "int"},
    "tolerances": {"decay_ratio": "tol", "slope": "tol", "grid_error": "tol", "residual": "tol",
                   "growth_low": "tol", "growth_high": "tol"},
    "validate": {"r": "float", "t_min": "float", "start_points": "int", "window_low": "float",
                 "window_high": "float", "grid_window_low": "float", "grid_window_high": "float"},
    "curvature": {"n": "int", "H": "rational", "K": "rational", "lap_H": "rational"},
    "friedman": {"A0": "rational", "A1": "rational", "A2": "rational", "B0": "rational",
                 "p": "int", "a_max_index": "int"},
}

DEFAULT_TOLERANCES = {
    "decay_ratio": 0.6,
    "slope": 0.2,
    "grid_error": 1e-8,
    "residual": 1e-10,
    "growth_low": 0.8,
    "growth_high": 1.25,
}


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a rational number: {text!r}") from exc


def parse_poly(text: str, dim: int | None = None):
    """A rational, or terms ``e1,...,ed: c`` separated by ``;`` (exponent tuple, coefficient)."""
    text = text.strip()
    if ":" not in text:
        return parse_rational(text)
    terms: dict[tuple[int, ...], Fraction] = {}
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        exps, _, coeff = chunk.partition(":")
        try:
            key = tuple(int(e) for e in exps.split(",")) if exps.strip() else ()
        except ValueError as exc:
            raise ConfigError(f"bad exponent tuple {exps!r}") from exc
        if any(e < 0 for e in key):
            raise ConfigError(f"negative exponent in {exps!r}")
        if dim is not None and len(key) != dim:
            raise ConfigError(f"term {chunk!r} needs {dim} exponents")
        terms[key] = terms.get(key, Fraction(0)) + parse_rational(coeff)
    dims = {len(k) for k in terms}
    if len(dims) != 1:
        raise ConfigError(f"inconsistent exponent lengths in {text!r}")
    return TangentialPoly(dims.pop(), terms)


def parse_forcing(text: str) -> dict[int, Fraction]:
    """``k: c; k: c`` giving the forcing sum of c t^k."""
    out: dict[int, Fraction] = {}
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        k, sep, c = chunk.partition(":")
        if not sep:
            raise ConfigError(f"forcing term {chunk!r} must read 'power: coefficient'")
        try:
            power = int(k)
        except ValueError as exc:
            raise ConfigError(f"bad forcing power {k!r}") from exc
        out[power] = out.get(power, Fraction(0)) + parse_rational(c)
    return out


def _convert(section: str, key: str, kind: str, raw: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "tol":
            value = float(raw)
            if not value > 0:
                raise ConfigError(f"[{section}] {key} must be positive, got {raw}")
            return value
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot read {raw!r} as {kind}") from exc
    if kind == "rational":
        return parse_rational(raw)
    if kind == "poly":
        return parse_poly(raw)
    if kind == "forcing":
        return parse_forcing(raw)
    return raw.strip()


@dataclass
class RunConfig:
    version: int
    command: str | None
    problem: ProblemSpec | None
    output_dir: Path
    outputs: dict[str, str] = field(default_factory=dict)
    majorant: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    validate: dict = field(default_factory=dict)
    curvature: dict = field(default_factory=dict)
    friedman: dict = field(default_factory=dict)
    source: Path | None = None

    def output_path(self, name: str, default: str) -> Path:
        return self.output_dir / self.outputs.get(name, default)


def parse_config(text: str, source: Path | None = None) -> RunConfig:
    parser = configparser.ConfigParser(
        interpolation=None, default_section="__defaults_unused__", inline_comment_prefixes=("#", ";;"),
        comment_prefixes=("#",), strict=True,
    )
    parser.optionxform = str  # keys are case sensitive (K vs k)
    try:
        parser.read_string(f"[{ROOT}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from exc

    values: dict[str, dict] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        allowed = SCHEMA[section]
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in allowed:
                where = "top level" if section == ROOT else f"[{section}]"
                raise ConfigError(f"unknown key {key!r} at {where}")
            values[section][key] = _convert(section, key, allowed[key], raw)

    root = values.get(ROOT, {})
    if "version" not in root:
        raise ConfigError("missing mandatory key 'version'")
    if root["version"] not in SUPPORTED_VERSIONS:
        raise ConfigError(f"unsupported config version {root['version']}")
    command = root.get("command")
    if command is not None and command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")

    problem = None
    if "problem" in values:
        problem = _problem_spec(values["problem"])

    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(values.get("tolerances", {}))
    if tolerances["growth_low"] >= tolerances["growth_high"]:
        raise ConfigError("growth_low must be below growth_high")

    out = dict(values.get("output", {}))
    out_dir = Path(out.pop("dir", "out"))
    if source is not None and not out_dir.is_absolute():
        out_dir = source.parent / out_dir
    return RunConfig(
        version=root["version"],
        command=command,
        problem=problem,
        output_dir=out_dir,
        outputs=out,
        majorant=values.get("majorant", {}),
        tolerances=tolerances,
        validate=values.get("validate", {}),
        curvature=values.get("curvature", {}),
        friedman=values.get("friedman", {}),
        source=source,
    )


def _problem_spec(p: dict) -> ProblemSpec:
    for key in ("kind", "n", "K"):
        if key not in p:
            raise ConfigError(f"[problem] needs {key!r}")
    if p["kind"] not in KINDS:
        raise ConfigError(f"unknown problem kind {p['kind']!r}; expected one of {', '.join(KINDS)}")
    if p["K"] < 1:
        raise ConfigError("K must be at least 1")
    if p.get("tangential_degree", 0) < 0:
        raise ConfigError("tangential_degree must be nonnegative")
    if p["kind"] != "linear" and any(k in p for k in ("m_low", "m_high", "forcing", "quadratic")):
        raise ConfigError("m_low, m_high, forcing and quadratic belong to the linear kind only")
    if p["kind"] != "minimal_graph" and "phi" in p:
        raise ConfigError("phi is only read for kind = minimal_graph")
    return ProblemSpec(
        kind=p["kind"],
        n=p["n"],
        K=p["K"],
        tangential_degree=p.get("tangential_degree", 0),
        R=p.get("R", Fraction(1)),
        phi=p.get("phi"),
        datum=p.get("datum"),
        m_low=p.get("m_low"),
        m_high=p.get("m_high"),
        forcing=p.get("forcing", {}),
        quadratic=p.get("quadratic", Fraction(0)),
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=path)
