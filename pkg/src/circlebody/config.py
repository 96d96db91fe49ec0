"""Run configuration files.

A run is described by one TOML file::

    [model]
    kind = "many_body"        # many_body | two_body | sutherland | goldfish_circle
                              # | isochronous_tan | goldfish_tan
    mu = [1.0, 1.5]           # many_body, two_body
    eta = [0.3, -0.2]         # many_body, two_body
    # g = 1.0                 # sutherland, isochronous_tan
    # g0 = 0.1, g1, g2, g3    # goldfish_circle

    [run]
    n_particles = 2
    t_end = 5.0
    n_samples = 101           # samples on [0, t_end], endpoints included
    form = "angle"            # angle | circle

    [initial]                 # either explicit lists ...
    theta = [0.0, 2.0]
    theta_dot = [0.5, -0.3]

    [initial.random]          # ... or a seeded draw (not both)
    seed = 7
    angular_spread = 6.283185307179586
    velocity_spread = 1.0
    min_separation = 0.2

    [integrator]              # all optional
    rel_tol = 1e-10
    abs_tol = 1e-12
    max_step = 0.1
    max_steps = 1000000
    projection = "off"        # off | renormalize

    [output]                  # all optional
    directory = "out"
    prefix = "run"
    files = ["trajectory_csv", "invariants_csv", "summary_json"]

Unknown keys are rejected so that typos do not silently fall back to
defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .geometry import AngleState
from .integrator import IntegratorConfig, Projection
from .models import ModelKind, ModelSpec

OUTPUT_FILES = ("trajectory_csv", "invariants_csv", "summary_json")
FORMS = ("angle", "circle")


@dataclass(frozen=True)
class RandomInitial:
    seed: int
    angular_spread: float = 2 * math.pi
    velocity_spread: float = 1.0
    min_separation: float = 0.1


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    n_particles: int
    initial: AngleState | RandomInitial
    t_end: float
    n_samples: int
    integrator: IntegratorConfig = IntegratorConfig()
    outputs: tuple = OUTPUT_FILES
    form: str = "angle"
    output_dir: Path = Path("out")
    prefix: str = "run"
    model_params: dict = field(default_factory=dict)

    @property
    def t_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_samples)


# --- field readers ------------------------------------------------------------


def _check_keys(table, allowed, where):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}: unknown key (allowed: {', '.join(sorted(allowed))})")


def _table(doc, name, required=True):
    if name not in doc:
        if required:
            raise ConfigError(f"[{name}]: missing section")
        return {}
    val = doc[name]
    if not isinstance(val, dict):
        raise ConfigError(f"{name}: expected a section")
    return val


def _real(table, key, where, default=None, positive=False, finite=True):
    if key not in table:
        if default is None:
            raise ConfigError(f"{where}.{key}: missing")
        return default
    val = table[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {val!r}")
    val = float(val)
    if finite and not math.isfinite(val):
        raise ConfigError(f"{where}.{key}: must be finite")
    if positive and not val > 0:
        raise ConfigError(f"{where}.{key}: must be positive, got {val!r}")
    return val


def _int(table, key, where, default=None, minimum=None):
    if key not in table:
        if default is None:
            raise ConfigError(f"{where}.{key}: missing")
        return default
    val = table[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{where}.{key}: expected an integer, got {val!r}")
    if minimum is not None and val < minimum:
        raise ConfigError(f"{where}.{key}: must be >= {minimum}, got {val}")
    return val


def _vector(table, key, where, n):
    if key not in table:
        raise ConfigError(f"{where}.{key}: missing")
    val = table[key]
    if not isinstance(val, list):
        raise ConfigError(f"{where}.{key}: expected a list of numbers")
    if len(val) != n:
        raise ConfigError(f"{where}.{key}: expected {n} entries (run.n_particles), got {len(val)}")
    for i, x in enumerate(val):
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ConfigError(f"{where}.{key}[{i}]: expected a finite number, got {x!r}")
    return np.array(val, dtype=float)


def _choice(table, key, where, choices, default):
    val = table.get(key, default)
    if val not in choices:
        raise ConfigError(f"{where}.{key}: expected one of {', '.join(choices)}, got {val!r}")
    return val


# --- sections -------------------------------------------------------------------

_MODEL_PARAMS = {
    ModelKind.MANY_BODY: ("mu", "eta"),
    ModelKind.TWO_BODY: ("mu", "eta"),
    ModelKind.SUTHERLAND: ("g",),
    ModelKind.ISOCHRONOUS_TAN: ("g",),
    ModelKind.GOLDFISH_CIRCLE: ("g0", "g1", "g2", "g3"),
    ModelKind.GOLDFISH_TAN: (),
}


def _parse_model(table, n):
    kinds = [k.value for k in _MODEL_PARAMS]
    kind = ModelKind(_choice(table, "kind", "model", kinds, None))
    names = _MODEL_PARAMS[kind]
    _check_keys(table, {"kind", *names}, "model")
    if kind in (ModelKind.MANY_BODY, ModelKind.TWO_BODY):
        mu = _vector(table, "mu", "model", n)
        eta = _vector(table, "eta", "model", n)
        zero = np.flatnonzero(mu == 0.0)
        if zero.size:
            raise ConfigError(f"model.mu[{zero[0]}]: mass parameter must be nonzero")
        return ModelSpec(kind, mu=mu, eta=eta), {"mu": mu.tolist(), "eta": eta.tolist()}
    params = {name: _real(table, name, "model") for name in names}
    return ModelSpec(kind, **params), params


def _parse_initial(table, n):
    if "random" in table:
        _check_keys(table, {"random"}, "initial")
        rnd = table["random"]
        if not isinstance(rnd, dict):
            raise ConfigError("initial.random: expected a section")
        where = "initial.random"
        _check_keys(rnd, {"seed", "angular_spread", "velocity_spread", "min_separation"}, where)
        out = RandomInitial(
            seed=_int(rnd, "seed", where, minimum=0),
            angular_spread=_real(rnd, "angular_spread", where, 2 * math.pi, positive=True),
            velocity_spread=_real(rnd, "velocity_spread", where, 1.0),
            min_separation=_real(rnd, "min_separation", where, 0.1),
        )
        if not out.min_separation > 0:
            raise ConfigError(f"{where}.min_separation: must be > 0, got {out.min_separation!r}")
        if out.velocity_spread < 0:
            raise ConfigError(f"{where}.velocity_spread: must be >= 0")
        return out
    _check_keys(table, {"theta", "theta_dot"}, "initial")
    return AngleState(_vector(table, "theta", "initial", n), _vector(table, "theta_dot", "initial", n))


def _parse_integrator(table):
    where = "integrator"
    _check_keys(table, {"rel_tol", "abs_tol", "max_step", "max_steps", "projection"}, where)
    return IntegratorConfig(
        rel_tol=_real(table, "rel_tol", where, 1e-10, positive=True),
        abs_tol=_real(table, "abs_tol", where, 1e-12, positive=True),
        max_step=_real(table, "max_step", where, math.inf, positive=True, finite=False),
        max_steps=_int(table, "max_steps", where, 1_000_000, minimum=1),
        projection=Projection(_choice(table, "projection", where, [p.value for p in Projection], "off")),
    )


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse and validate a run configuration.

    Raises
    ------
    ConfigError
        With ``source:line:column`` for syntax errors and the dotted field
        name for semantic ones.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    try:
        _check_keys(doc, {"model", "run", "initial", "integrator", "output"}, "<root>")
        run = _table(doc, "run")
        _check_keys(run, {"n_particles", "t_end", "n_samples", "form"}, "run")
        n = _int(run, "n_particles", "run", minimum=1)
        t_end = _real(run, "t_end", "run", positive=True)
        n_samples = _int(run, "n_samples", "run", minimum=2)
        form = _choice(run, "form", "run", FORMS, "angle")
        model, params = _parse_model(_table(doc, "model"), n)
        initial = _parse_initial(_table(doc, "initial"), n)
        integrator = _parse_integrator(_table(doc, "integrator", required=False))
        out = _table(doc, "output", required=False)
        _check_keys(out, {"directory", "prefix", "files"}, "output")
        directory = out.get("directory", "out")
        prefix = out.get("prefix", "run")
        if not isinstance(directory, str) or not directory:
            raise ConfigError("output.directory: expected a non-empty string")
        if not isinstance(prefix, str) or not prefix or "/" in prefix:
            raise ConfigError("output.prefix: expected a non-empty file-name prefix")
        files = out.get("files", list(OUTPUT_FILES))
        if not isinstance(files, list):
            raise ConfigError("output.files: expected a list")
        for i, f in enumerate(files):
            if f not in OUTPUT_FILES:
                raise ConfigError(f"output.files[{i}]: expected one of {', '.join(OUTPUT_FILES)}, got {f!r}")
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return RunConfig(
        model=model,
        n_particles=n,
        initial=initial,
        t_end=t_end,
        n_samples=n_samples,
        integrator=integrator,
        outputs=tuple(dict.fromkeys(files)),
        form=form,
        output_dir=Path(directory),
        prefix=prefix,
        model_params=params,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    return parse_config(text, str(path))
