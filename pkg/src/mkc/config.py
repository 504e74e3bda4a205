"""Validated run configuration for the command-line front end.

Flat sectioned key = value text with four sections: [model] picks the
Hamiltonian and its parameters, [lattice] the finite geometry, [task] the
computation plus its knobs, [output] where results go.  Unknown keys are
rejected by name, every default is filled in explicitly so the effective
configuration can be echoed verbatim, and a parsed configuration
serializes back to text that reparses equal.
"""

import configparser
import io
import os
from dataclasses import dataclass, field

from .errors import ConfigError
from .models import PARALLEL, PERPENDICULAR, ChildSpec, ParentParams

MODEL_KINDS = ("parent", "mkc-parallel", "mkc-perpendicular")
TASKS = (
    "spectrum",
    "sweep-mu",
    "sweep-length",
    "wannier",
    "winding",
    "majorana-points",
    "quantization",
    "density",
    "disorder",
    "classify",
    "symmetry-check",
    "dirac",
)

_REQUIRED = object()


def _default_threads():
    return os.cpu_count() or 1


@dataclass(frozen=True)
class _Key:
    parse: object
    default: object = _REQUIRED
    choices: tuple = None
    kinds: tuple = None  # restrict to model kinds; None means all

    def convert(self, section, name, raw):
        try:
            value = self.parse(raw)
        except (TypeError, ValueError):
            raise ConfigError(
                f"[{section}] {name}: cannot read {raw!r} as {self.parse.__name__}"
            )
        if self.choices is not None and value not in self.choices:
            raise ConfigError(
                f"[{section}] {name}: must be one of {', '.join(map(str, self.choices))}, got {raw!r}"
            )
        return value


def _int(raw):
    if isinstance(raw, int):
        return raw
    text = raw.strip()
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"{text!r} is not an integer")


def _float(raw):
    if isinstance(raw, float):
        return raw
    return float(raw.strip())


def _str(raw):
    return raw.strip()


def _opt(parse):
    def inner(raw):
        if isinstance(raw, str) and raw.strip() == "":
            return None
        return parse(raw)

    inner.__name__ = parse.__name__
    return inner


_MODEL_KEYS = {
    "kind": _Key(_str, choices=MODEL_KINDS),
    "t1": _Key(_float),
    "delta1": _Key(_float),
    "mu1": _Key(_float),
    "t2": _Key(_float, kinds=("mkc-parallel", "mkc-perpendicular")),
    "delta2": _Key(_float, kinds=("mkc-parallel", "mkc-perpendicular")),
    "mu2": _Key(_float, kinds=("mkc-parallel", "mkc-perpendicular")),
}

_CHAIN_KEYS = {
    "l": _Key(_int),
    "bc": _Key(_str, default="open", choices=("open", "periodic")),
}
_SLAB_KEYS = {
    "lx": _Key(_int),
    "ly": _Key(_int),
    "bcx": _Key(_str, default="open", choices=("open", "periodic")),
    "bcy": _Key(_str, default="open", choices=("open", "periodic")),
}

# tasks whose lattice section is required (chain kinds use L/bc, the
# perpendicular kind uses Lx/Ly/bcx/bcy)
_NEEDS_LATTICE = {
    "spectrum",
    "sweep-mu",
    "majorana-points",
    "quantization",
    "density",
    "disorder",
    "classify",
}

_TASK_KEYS = {
    "spectrum": {},
    "sweep-mu": {
        "mu-min": _Key(_float),
        "mu-max": _Key(_float),
        "mu-points": _Key(_int),
        "link": _Key(_str, default="equal", choices=("equal", "opposite", "fixed")),
        "n-modes": _Key(_opt(_int), default=None),
    },
    "sweep-length": {
        "l-min": _Key(_int),
        "l-max": _Key(_int),
        "l-step": _Key(_int, default=1),
        "n-modes": _Key(_int, default=6),
        "bc": _Key(_str, default="open", choices=("open", "periodic")),
    },
    "wannier": {
        "loop-points": _Key(_int, default=1001),
        "fixed-momentum": _Key(_float, default=0.0),
    },
    "winding": {"samples": _Key(_int, default=4096)},
    "majorana-points": {},
    "quantization": {
        "grid-points": _Key(_int, default=2001),
        "mu-min": _Key(_opt(_float), default=None),
        "mu-max": _Key(_opt(_float), default=None),
    },
    "density": {"zero-tol": _Key(_float, default=1e-8)},
    "disorder": {
        "channel": _Key(_opt(_str), default=None),
        "amplitude": _Key(_float, default=0.2),
        "realizations": _Key(_int, default=50),
        "seed": _Key(_int, default=42),
        "zero-tol": _Key(_float, default=1e-8),
        "mu-min": _Key(_opt(_float), default=None),
        "mu-max": _Key(_opt(_float), default=None),
        "mu-points": _Key(_opt(_int), default=None),
    },
    "classify": {"zero-tol": _Key(_opt(_float), default=1e-8)},
    "symmetry-check": {"k-points": _Key(_int, default=64)},
    "dirac": {
        "kx": _Key(_float, default=0.01),
        "ky": _Key(_float, default=0.01),
    },
}

# tasks that only make sense for some model kinds
_TASK_KINDS = {
    "sweep-mu": ("parent", "mkc-parallel"),
    "sweep-length": ("parent", "mkc-parallel"),
    "quantization": ("mkc-parallel",),
    "classify": ("mkc-parallel", "mkc-perpendicular"),
    "symmetry-check": ("mkc-parallel", "mkc-perpendicular"),
    "dirac": ("mkc-parallel", "mkc-perpendicular"),
}


@dataclass
class RunConfig:
    """Effective configuration: every default resolved and recorded."""

    kind: str
    model: object
    lattice_values: dict
    task: str
    options: dict
    output_path: str
    output_format: str
    threads: int

    def echo(self, include_execution=False):
        """Effective key = value map per section, suitable for re-parsing.

        The default view covers only the keys that determine the numbers
        (model, lattice, task options); thread count and output routing are
        execution detail and must not alter emitted bytes, so they join
        only when include_execution is set.
        """
        model = {"kind": self.kind, **{
            k: _format_value(v) for k, v in self._model_values().items()
        }}
        task = {"name": self.task}
        if include_execution:
            task["threads"] = _format_value(self.threads)
        task.update({k: _format_value(v) for k, v in sorted(self.options.items())})
        out = {"model": model}
        if self.lattice_values:
            out["lattice"] = {
                k: _format_value(v) for k, v in sorted(self.lattice_values.items())
            }
        out["task"] = task
        if include_execution:
            out["output"] = {"path": self.output_path, "format": self.output_format}
        return out

    def _model_values(self):
        if self.kind == "parent":
            return {"t1": self.model.t, "delta1": self.model.delta, "mu1": self.model.mu}
        return {
            "t1": self.model.p1.t,
            "delta1": self.model.p1.delta,
            "mu1": self.model.p1.mu,
            "t2": self.model.p2.t,
            "delta2": self.model.p2.delta,
            "mu2": self.model.p2.mu,
        }


def _format_value(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _read_sections(text):
    parser = configparser.ConfigParser(
        interpolation=None, delimiters=("=",), strict=True
    )
    parser.optionxform = lambda name: name.strip().lower()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}")
    return {s: dict(parser.items(s)) for s in parser.sections()}


def _take(section_name, raw, schema, kind=None):
    out = {}
    for key, spec in schema.items():
        if key in raw:
            if spec.kinds is not None and kind is not None and kind not in spec.kinds:
                raise ConfigError(
                    f"[{section_name}] {key}: not a {kind} parameter"
                )
            out[key] = spec.convert(section_name, key, raw.pop(key))
        elif spec.default is _REQUIRED:
            if spec.kinds is None or kind is None or kind in spec.kinds:
                raise ConfigError(f"[{section_name}] missing required key {key}")
        else:
            out[key] = spec.default
    for key in sorted(raw):
        raise ConfigError(f"[{section_name}] unknown key {key}")
    return out


def parse_config(text, cli_task=None):
    """Validate config text into a RunConfig with all defaults resolved."""
    sections = _read_sections(text)
    known = {"model", "lattice", "task", "output"}
    for name in sections:
        if name not in known:
            raise ConfigError(f"unknown section [{name}]")
    if "model" not in sections:
        raise ConfigError("missing section [model]")

    model_raw = dict(sections["model"])
    if "kind" not in model_raw:
        raise ConfigError("[model] missing required key kind")
    kind = _MODEL_KEYS["kind"].convert("model", "kind", model_raw["kind"])
    model_vals = _take("model", model_raw, _MODEL_KEYS, kind=kind)
    p1 = ParentParams(t=model_vals["t1"], delta=model_vals["delta1"], mu=model_vals["mu1"])
    if kind == "parent":
        model = p1
    else:
        p2 = ParentParams(t=model_vals["t2"], delta=model_vals["delta2"], mu=model_vals["mu2"])
        orientation = PARALLEL if kind == "mkc-parallel" else PERPENDICULAR
        model = ChildSpec(p1=p1, p2=p2, orientation=orientation)

    task_raw = dict(sections.get("task", {}))
    task = task_raw.pop("name", None)
    if task is not None:
        task = task.strip()
    if cli_task is not None:
        if task is not None and task != cli_task:
            raise ConfigError(
                f"[task] name: config says {task!r} but the command line says {cli_task!r}"
            )
        task = cli_task
    if task is None:
        raise ConfigError("[task] missing required key name")
    if task not in TASKS:
        raise ConfigError(f"[task] name: unknown task {task!r}")
    if task in _TASK_KINDS and kind not in _TASK_KINDS[task]:
        raise ConfigError(f"task {task} does not apply to a {kind} model")
    threads_raw = task_raw.pop("threads", None)
    threads = (
        _default_threads()
        if threads_raw is None
        else _Key(_int).convert("task", "threads", threads_raw)
    )
    if threads < 1:
        raise ConfigError(f"[task] threads: must be >= 1, got {threads}")
    options = _take("task", task_raw, _TASK_KEYS[task])

    lattice_values = {}
    needs_lattice = task in _NEEDS_LATTICE or (
        task == "winding" and kind == "mkc-perpendicular"
    )
    if needs_lattice or "lattice" in sections:
        if "lattice" not in sections:
            raise ConfigError(f"task {task} needs a [lattice] section")
        schema = _SLAB_KEYS if kind == "mkc-perpendicular" else _CHAIN_KEYS
        lattice_values = _take("lattice", dict(sections["lattice"]), schema)

    out_raw = dict(sections.get("output", {}))
    out_schema = {
        "path": _Key(_str, default="-"),
        "format": _Key(_str, default="csv", choices=("csv", "json")),
    }
    out_vals = _take("output", out_raw, out_schema)

    return RunConfig(
        kind=kind,
        model=model,
        lattice_values=lattice_values,
        task=task,
        options=options,
        output_path=out_vals["path"],
        output_format=out_vals["format"],
        threads=threads,
    )


def serialize_config(cfg):
    """Canonical text for a RunConfig; parse_config round-trips it."""
    lines = []
    for section, values in cfg.echo(include_execution=True).items():
        lines.append(f"[{section}]")
        for key, value in values.items():
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)
