"""Run configuration: a versioned JSON document validated strictly.

Unknown keys are errors, not warnings. :func:`parse` and :func:`emit` are
inverse to each other: ``parse(emit(cfg)) == cfg``.
"""
from __future__ import annotations

import dataclasses
import json
import math
import re
from dataclasses import dataclass, field
from typing import Optional, Tuple

import jsonschema

from .diagnostics import DEFAULT_NEG_ORDERS, LN_FACTOR
from .errors import ConfigError
from .initial import DEFAULT_KMAX, IC_KINDS
from .integrator import SCHEMES, StepControls
from .model import ModelParams
from .spectral import Grid

SCHEMA_VERSION = 1
EXPERIMENTS = ("run", "energy-check", "smallness", "decay-study", "ineq-suite")


@dataclass(frozen=True)
class ICSpec:
    kind: str = "random-divfree"
    amplitude: float = 1e-2
    seed: int = 0
    width: Optional[float] = None
    k_max: float = DEFAULT_KMAX

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "amplitude", float(self.amplitude))
        if self.kind not in IC_KINDS:
            raise ValueError(f"kind must be one of {IC_KINDS}, got {self.kind!r}")
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if self.width is not None and not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")
        if not self.k_max > 0:
            raise ValueError(f"k_max must be positive, got {self.k_max}")


@dataclass(frozen=True)
class OutputSpec:
    csv: Optional[str] = "diagnostics.csv"
    json: Optional[str] = "report.json"
    checkpoint_stride: int = 0
    record_stride: int = 1

    def __post_init__(self):
        object.__setattr__(self, "checkpoint_stride", int(self.checkpoint_stride))
        object.__setattr__(self, "record_stride", int(self.record_stride))
        if self.checkpoint_stride < 0:
            raise ValueError("checkpoint_stride must be >= 0")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


@dataclass(frozen=True)
class EnergyCheckOptions:
    levels: int = 3

    def __post_init__(self):
        object.__setattr__(self, "levels", int(self.levels))
        if self.levels < 2:
            raise ValueError("levels must be >= 2")


@dataclass(frozen=True)
class SmallnessOptions:
    amplitudes: Tuple[float, ...] = (1e-3, 3e-3, 1e-2, 3e-2, 1e-1)
    growth_tol: float = 0.05
    neg_orders: Tuple[float, ...] = DEFAULT_NEG_ORDERS

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "neg_orders", tuple(float(a) for a in self.neg_orders))
        if any(not a > 0 for a in self.amplitudes):
            raise ValueError("amplitudes must be positive")
        if self.growth_tol < 0:
            raise ValueError("growth_tol must be >= 0")


@dataclass(frozen=True)
class DecayOptions:
    p: float = 1.5
    orders: Tuple[int, ...] = (0, 1, 2)
    fit_start: float = 5.0
    ln_factor: float = LN_FACTOR
    diffusivity: float = 2.0
    linearized: bool = True
    nonlinear: bool = True

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(k) for k in self.orders))
        if any(k < 0 for k in self.orders):
            raise ValueError("orders must be >= 0")
        if self.fit_start < 0:
            raise ValueError("fit_start must be >= 0")
        if not (self.ln_factor > 0 and self.diffusivity > 0):
            raise ValueError("ln_factor and diffusivity must be positive")
        if not (self.linearized or self.nonlinear):
            raise ValueError("linearized or nonlinear must be enabled")


@dataclass(frozen=True)
class IneqOptions:
    trials: int = 200
    interpolation_trials: int = 10_000
    refine: bool = True

    def __post_init__(self):
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "interpolation_trials", int(self.interpolation_trials))
        if self.trials < 0 or self.interpolation_trials < 0:
            raise ValueError("trials must be >= 0")


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    grid: Grid
    params: ModelParams = field(default_factory=ModelParams)
    controls: StepControls = field(default_factory=lambda: StepControls(1e-2, 0.0))
    ic: ICSpec = field(default_factory=ICSpec)
    outputs: OutputSpec = field(default_factory=OutputSpec)
    energy_check: EnergyCheckOptions = field(default_factory=EnergyCheckOptions)
    smallness: SmallnessOptions = field(default_factory=SmallnessOptions)
    decay_study: DecayOptions = field(default_factory=DecayOptions)
    inequalities: IneqOptions = field(default_factory=IneqOptions)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------

_NUM = {"type": "number"}
_INT = {"type": "integer"}
_BOOL = {"type": "boolean"}


def _obj(props, required=()):
    return {
        "type": "object",
        "properties": props,
        "required": list(required),
        "additionalProperties": False,
    }


SCHEMA = _obj(
    {
        "schema_version": {"const": SCHEMA_VERSION},
        "experiment": {"enum": list(EXPERIMENTS)},
        "grid": _obj({"dim": _INT, "n": _INT, "box_length": _NUM}, ["dim", "n"]),
        "params": _obj(
            {
                **{k: _NUM for k in ("omega0", "kappa", "nu", "mobility", "capillarity", "eps", "zeta")},
                "linearized": _BOOL,
                "paper_mode": _BOOL,
            }
        ),
        "controls": _obj(
            {
                "dt": _NUM,
                "t_end": _NUM,
                "cfl_safety": _NUM,
                "scheme": {"enum": list(SCHEMES)},
                "adaptive": _BOOL,
            },
            ["dt", "t_end"],
        ),
        "ic": _obj(
            {
                "kind": {"enum": list(IC_KINDS)},
                "amplitude": _NUM,
                "seed": _INT,
                "width": {"type": ["number", "null"]},
                "k_max": _NUM,
            },
            ["kind", "amplitude"],
        ),
        "outputs": _obj(
            {
                "csv": {"type": ["string", "null"]},
                "json": {"type": ["string", "null"]},
                "checkpoint_stride": _INT,
                "record_stride": _INT,
            }
        ),
        "energy_check": _obj({"levels": _INT}),
        "smallness": _obj(
            {
                "amplitudes": {"type": "array", "items": _NUM},
                "growth_tol": _NUM,
                "neg_orders": {"type": "array", "items": _NUM},
            }
        ),
        "decay_study": _obj(
            {
                "p": _NUM,
                "orders": {"type": "array", "items": _INT},
                "fit_start": _NUM,
                "ln_factor": _NUM,
                "diffusivity": _NUM,
                "linearized": _BOOL,
                "nonlinear": _BOOL,
            }
        ),
        "inequalities": _obj({"trials": _INT, "interpolation_trials": _INT, "refine": _BOOL}),
    },
    ["schema_version", "experiment", "grid"],
)

_SECTIONS = {
    "grid": Grid,
    "params": ModelParams,
    "controls": StepControls,
    "ic": ICSpec,
    "outputs": OutputSpec,
    "energy_check": EnergyCheckOptions,
    "smallness": SmallnessOptions,
    "decay_study": DecayOptions,
    "inequalities": IneqOptions,
}


# ---------------------------------------------------------------------------
# Parse / emit
# ---------------------------------------------------------------------------


def _locate(text, key):
    """Line and column of the first ``"key"`` in ``text`` (1-based)."""
    if text is None or key is None:
        return None, None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if not m:
        return None, None
    line = text.count("\n", 0, m.start()) + 1
    return line, m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1


def _schema_error(err, text):
    path = [str(p) for p in err.absolute_path]
    if err.validator == "additionalProperties":
        allowed = err.schema.get("properties", {})
        extra = sorted(k for k in err.instance if k not in allowed)
        path.append(extra[0])
        message = f"unknown field {extra[0]!r}"
    elif err.validator == "required":
        # point at the enclosing object, the missing key has no position
        key = path[-1] if path else None
        missing = re.findall(r"'([^']+)' is a required property", err.message)
        if missing:
            path.append(missing[0])
        line, col = _locate(text, key)
        return ConfigError("required field missing", ".".join(path) or None, line, col)
    else:
        message = err.message
    key = next((p for p in reversed(path) if not p.isdigit()), None)
    line, col = _locate(text, key)
    return ConfigError(message, ".".join(path) or None, line, col)


def _build(cls, data, section, text):
    names = {f.name for f in dataclasses.fields(cls)}
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        msg = str(exc)
        head = msg.split()[0].strip("():,") if msg else ""
        fld = f"{section}.{head}" if head in names else section
        line, col = _locate(text, head if head in names else section)
        raise ConfigError(msg, fld, line, col) from None


def from_dict(data, text=None) -> RunConfig:
    """Validate a decoded JSON document and build a :class:`RunConfig`."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    err = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if err is not None:
        raise _schema_error(err, text)
    kwargs = {"experiment": data["experiment"], "schema_version": data["schema_version"]}
    for name, cls in _SECTIONS.items():
        if name in data:
            kwargs[name] = _build(cls, data[name], name, text)
    return RunConfig(**kwargs)


def parse(text: str) -> RunConfig:
    """Parse JSON text; errors carry the field path and line/column."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, None, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object", None, 1, 1)
    return from_dict(data, text)


def load(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", "config") from None
    return parse(text)


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError("non-finite value cannot be emitted")
    return value


def to_dict(cfg: RunConfig):
    out = {"schema_version": cfg.schema_version, "experiment": cfg.experiment}
    for name in _SECTIONS:
        section = getattr(cfg, name)
        out[name] = {f.name: _plain(getattr(section, f.name)) for f in dataclasses.fields(section)}
    return out


def emit(cfg: RunConfig) -> str:
    """JSON text for ``cfg`` with every field spelled out."""
    return json.dumps(to_dict(cfg), indent=2) + "\n"


def default_config(experiment: str) -> RunConfig:
    """Built-in configuration for each experiment (used when no file is given)."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}", "experiment")
    if experiment == "energy-check":
        return RunConfig(
            experiment,
            Grid(3, 32),
            controls=StepControls(1e-3, 0.1),
            ic=ICSpec("random-divfree", 1e-2, k_max=1.0),
        )
    if experiment == "smallness":
        return RunConfig(
            experiment,
            Grid(3, 32),
            controls=StepControls(1e-2, 5.0),
            outputs=OutputSpec(record_stride=10),
        )
    if experiment == "decay-study":
        return RunConfig(
            experiment,
            Grid(3, 64, 32 * math.pi),
            controls=StepControls(0.25, 34.5),
            ic=ICSpec("gaussian-blob", 1e-2),
            outputs=OutputSpec(record_stride=2),
        )
    if experiment == "ineq-suite":
        return RunConfig(experiment, Grid(3, 16))
    return RunConfig(experiment, Grid(3, 16), controls=StepControls(1e-2, 0.1))
