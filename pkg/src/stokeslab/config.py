"""Declarative experiment configuration (INI-style).

A config file selects one experiment kind, the domain and discretization
parameters, a source preset, and output paths.  Parsing is strict: unknown
sections or keys are rejected, and all semantic violations are reported in
one error.
"""

import configparser
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geometry import DomainSpec, HoleShape, build_perforated

__all__ = [
    "CONFIG_SCHEMA_VERSION",
    "ExperimentConfig",
    "parse_config",
    "load_config",
]

#: bump when the accepted sections/keys change
CONFIG_SCHEMA_VERSION = "1"

KINDS = ("mesh", "solve", "sweep", "restrict", "bogovskii")
SWEEPS = ("uniform", "blowup", "dual-blowup", "rescaling", "enlarging")
SOURCES = ("x1_I", "offset_bump", "dipole", "zero")

#: section -> {key: parser}; every accepted key appears here
_SCHEMA = {
    "experiment": {"kind": str, "sweep": str, "seed": int},
    "domain": {
        "outer": str,
        "l": float,
        "epsilon": float,
        "hole": str,
        "hole_size": float,
        "hole_orientation": float,
    },
    "perforation": {
        "side": float,
        "n": int,
        "alpha": float,
        "b1": float,
        "delta": float,
        "hole_size": float,
    },
    "discretization": {
        "h_far": float,
        "n_hole": int,
        "quad_degree": int,
        "pressure_space": str,
        "refine": bool,
    },
    "source": {"preset": str, "center": str, "width": float},
    "sweep": {"p": float, "epsilons": str, "certify": bool},
    "thresholds": {
        "band": float,
        "slope": float,
        "residual": float,
        "discrepancy": float,
    },
    "output": {"csv": str, "json": str, "svg": str},
}

_DEFAULTS = {
    ("experiment", "seed"): 0,
    ("domain", "outer"): "square",
    ("domain", "l"): 2.0,
    ("domain", "epsilon"): 0.5,
    ("domain", "hole"): "disk",
    ("domain", "hole_size"): 0.25,
    ("domain", "hole_orientation"): 0.0,
    ("perforation", "side"): 1.0,
    ("perforation", "n"): 4,
    ("perforation", "alpha"): 1.0,
    ("perforation", "b1"): 0.375,
    ("perforation", "delta"): 0.0625,
    ("perforation", "hole_size"): 0.25,
    ("discretization", "h_far"): 0.4,
    ("discretization", "n_hole"): 32,
    ("discretization", "quad_degree"): 4,
    ("discretization", "pressure_space"): "p1",
    ("discretization", "refine"): False,
    ("source", "preset"): "x1_I",
    ("source", "center"): "0.5 0.3",
    ("source", "width"): 0.5,
    ("sweep", "p"): 2.0,
    ("sweep", "epsilons"): "0.5 0.25 0.125",
    ("sweep", "certify"): True,
    ("thresholds", "band"): 1.2,
    ("thresholds", "slope"): 0.05,
    ("thresholds", "residual"): 1e-8,
    ("thresholds", "discrepancy"): 1e-8,
}


def _parse_bool(raw):
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


@dataclass
class ExperimentConfig:
    """Validated experiment description; see the README for the format."""

    kind: str
    sweep: str | None
    seed: int
    values: dict = field(repr=False, default_factory=dict)
    sections: tuple = ()  # sections spelled out in the file

    def get(self, section, key):
        return self.values[(section, key)]

    # -- derived objects -------------------------------------------------

    def hole_shape(self):
        return HoleShape(
            kind=self.get("domain", "hole"),
            size=self.get("domain", "hole_size"),
            orientation=self.get("domain", "hole_orientation"),
        )

    def domain_spec(self, epsilon=None):
        return DomainSpec(
            outer=self.get("domain", "outer"),
            L=self.get("domain", "l"),
            hole=self.hole_shape(),
            epsilon=self.get("domain", "epsilon") if epsilon is None else epsilon,
        )

    def perforated_domain(self, epsilon=None, alpha=None):
        n = self.get("perforation", "n")
        side = self.get("perforation", "side")
        if epsilon is not None:
            side = n * epsilon
        return build_perforated(
            side=side,
            n=n,
            alpha=self.get("perforation", "alpha") if alpha is None else alpha,
            hole=HoleShape(kind="disk", size=self.get("perforation", "hole_size")),
            b1=self.get("perforation", "b1"),
            delta=self.get("perforation", "delta"),
            seed=self.seed if self.seed != 0 else None,
        )

    def source_field(self):
        from . import experiments as ex
        from .fields import constant_field

        preset = self.get("source", "preset")
        if preset == "x1_I":
            return ex.default_source()
        if preset == "offset_bump":
            return ex.offset_bump_source(
                center=self.get("source", "center"),
                width=self.get("source", "width"),
            )
        if preset == "dipole":
            return ex.dipole_force()
        return constant_field(np.zeros((2, 2)))

    def epsilons(self):
        return self.get("sweep", "epsilons")

    def p(self):
        return self.get("sweep", "p")

    def thresholds(self):
        return {
            key: self.get("thresholds", key) for key in _SCHEMA["thresholds"]
        }

    def output(self, which):
        return self.values.get(("output", which))


def _convert(section, key, raw, errors):
    want = _SCHEMA[section][key]
    try:
        if want is bool:
            return _parse_bool(raw)
        if want is int:
            return int(raw)
        if want is float:
            return float(raw)
        return raw.strip()
    except ValueError:
        errors.append(f"[{section}] {key}: cannot parse {raw!r} as {want.__name__}")
        return None


def _parse_floats(raw):
    return [float(tok) for tok in raw.replace(",", " ").split()]


def parse_config(text):
    """Parse and validate the INI-style experiment description."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    errors = []
    values = dict(_DEFAULTS)
    for section in parser.sections():
        if section not in _SCHEMA:
            errors.append(f"unknown section [{section}]")
            continue
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                errors.append(f"unknown key {key!r} in section [{section}]")
                continue
            value = _convert(section, key, raw, errors)
            if value is not None:
                values[(section, key)] = value

    kind = values.get(("experiment", "kind"))
    if kind is None:
        errors.append("[experiment] kind is required")
    elif kind not in KINDS:
        errors.append(f"[experiment] kind must be one of {KINDS}, got {kind!r}")

    sweep = values.get(("experiment", "sweep"))
    if kind == "sweep":
        if sweep is None:
            errors.append("[experiment] sweep is required when kind = sweep")
        elif sweep not in SWEEPS:
            errors.append(
                f"[experiment] sweep must be one of {SWEEPS}, got {sweep!r}"
            )

    # typed list fields
    try:
        eps = _parse_floats(values[("sweep", "epsilons")])
        values[("sweep", "epsilons")] = eps
        if not eps:
            errors.append("[sweep] epsilons must be nonempty")
        elif any(not 0.0 < e < 1.0 for e in eps):
            errors.append("[sweep] epsilons must lie in (0, 1)")
        elif any(b >= a for a, b in zip(eps, eps[1:])):
            errors.append("[sweep] epsilons must be strictly decreasing")
    except ValueError:
        errors.append("[sweep] epsilons: not a list of numbers")

    try:
        center = _parse_floats(values[("source", "center")])
        if len(center) != 2:
            errors.append("[source] center needs exactly two coordinates")
        else:
            values[("source", "center")] = tuple(center)
    except ValueError:
        errors.append("[source] center: not a pair of numbers")

    if ("sweep", "p") in values and not values[("sweep", "p")] > 1.0:
        errors.append("[sweep] p must exceed 1")
    if values[("source", "preset")] not in SOURCES:
        errors.append(
            f"[source] preset must be one of {SOURCES}, "
            f"got {values[('source', 'preset')]!r}"
        )
    if values[("discretization", "pressure_space")] not in ("p1", "dp1"):
        errors.append("[discretization] pressure_space must be p1 or dp1")

    if errors:
        raise ConfigError(
            "invalid configuration:\n  " + "\n  ".join(errors)
        )
    return ExperimentConfig(
        kind=kind, sweep=sweep, seed=values[("experiment", "seed")],
        values=values, sections=tuple(parser.sections()),
    )


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())
