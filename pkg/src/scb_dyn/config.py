"""Experiment configuration files.

Flat UTF-8 text, one ``key = value`` per line, ``#`` starts a comment and
dotted prefixes group related keys::

    kind = decay-compare
    model.N = 4
    decay.n_bar1 = 2
    noise.gamma = 1
    noise.delta = 1

Sweep axes may be listed as ``sweep.<key> = start:stop:count[:log]``.
"""

import re
from dataclasses import dataclass, field

import numpy as np

from .fock import ChargeParams, TwoModeParams
from .lindblad import CompletePositivityError, NoiseParams
from .meanfield import EXACT_MAX_N, OrderParameter
from .ode import TOL_RANGE
from .unitary import TimeGrid

KINDS = (
    "qubit-oscillation",
    "gp-oscillation",
    "gp-vs-exact",
    "master-evolution",
    "decay-compare",
    "decay-sweep",
)
ANALYTIC_KINDS = ("decay-compare", "decay-sweep")

_KEY_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")
REQUIRED = object()


class ConfigError(ValueError):
    """Invalid configuration; ``key`` and ``line`` locate the problem."""

    def __init__(self, message, key=None, line=None, column=None):
        self.key = key
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}" + (f", column {column}" if column is not None else ""))
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{'; '.join(where)}: " if where else ""
        super().__init__(prefix + message)


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text):
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _complex(text):
    return complex(text.replace(" ", ""))


def _finite(text):
    value = float(text)
    if not np.isfinite(value):
        raise ValueError(f"not a finite number: {text!r}")
    return value


def _pair(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated complex numbers, got {text!r}")
    return tuple(_complex(p) for p in parts)


_TIME = {
    "time.t_start": (_finite, 0.0),
    "time.t_end": (_finite, REQUIRED),
    "time.n_samples": (_int, REQUIRED),
    "tol": (_finite, 1e-10),
}
_COMMON = {
    "kind": (str, REQUIRED),
    "seed": (_int, 0),
    "output.dir": (str, "out"),
}
_MODEL = {
    "model.E": (_finite, REQUIRED),
    "model.U1": (_finite, 0.0),
    "model.U2": (_finite, 0.0),
    "model.K": (_finite, REQUIRED),
    "model.N": (_int, REQUIRED),
}
_NOISE = {
    "noise.gamma": (_finite, REQUIRED),
    "noise.delta": (_finite, REQUIRED),
    "noise.beta_re": (_finite, 0.0),
    "noise.beta_im": (_finite, 0.0),
}
_SQRT_HALF = str(np.sqrt(0.5))
_INITIAL_PSI = {
    "initial.psi1": (_complex, complex(_SQRT_HALF)),
    "initial.psi2": (_complex, complex(_SQRT_HALF)),
}
_DECAY = {
    **_NOISE,
    "model.N": (_int, None),
    "decay.n_bar1": (_int, REQUIRED),
    "decay.fill_ratio": (_finite, None),
    "decay.theta": (_finite, 0.0),
    "decay.numeric_max_N": (_int, 1_000_000),
}

SCHEMAS = {
    "qubit-oscillation": {
        **_COMMON, **_TIME,
        "charge.E_C": (_finite, REQUIRED),
        "charge.E_J": (_finite, REQUIRED),
        "charge.n_g": (_finite, REQUIRED),
        "charge.n_bar1": (_int, 0),
        "charge.check_regime": (_bool, False),
        "initial.phi0": (_pair, (1 + 0j, 0j)),
    },
    "gp-oscillation": {
        **_COMMON, **_TIME,
        "phase.E": (_finite, None),
        "phase.E_C": (_finite, None),
        "phase.E_J": (_finite, REQUIRED),
        "phase.n0": (_finite, 0.0),
        "phase.theta0": (_finite, 0.01),
    },
    "gp-vs-exact": {
        **_COMMON, **_TIME, **_MODEL, **_INITIAL_PSI,
        "exact.method": (str, "rk"),
    },
    "master-evolution": {
        **_COMMON, **_TIME, **_MODEL, **_NOISE, **_INITIAL_PSI,
        "initial.state": (str, "fock"),
        "initial.n1": (_int, None),
    },
    "decay-compare": {**_COMMON, **_DECAY},
    "decay-sweep": {**_COMMON, **_DECAY},
}


@dataclass
class Axis:
    key: str
    values: list

    def __len__(self):
        return len(self.values)


@dataclass
class ExperimentConfig:
    kind: str
    raw: dict  # key -> value text, as written
    values: dict  # key -> typed value, defaults filled
    lines: dict = field(default_factory=dict)
    axes: list = field(default_factory=list)
    two_mode: TwoModeParams = None
    charge: ChargeParams = None
    noise: NoiseParams = None
    grid: TimeGrid = None

    @property
    def tol(self):
        return self.values.get("tol", 1e-10)

    @property
    def seed(self):
        return self.values["seed"]

    @property
    def out_dir(self):
        return self.values["output.dir"]

    def echo(self):
        """Canonical key -> text mapping of the explicitly given keys."""
        return {k: self.raw[k] for k in sorted(self.raw)}

    def with_overrides(self, overrides):
        raw = dict(self.raw)
        raw.update(overrides)
        return build_config(raw, self.lines, with_axes=False)


def parse_lines(text):
    """Split config text into ``{key: (value_text, line_number)}``."""
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise ConfigError("expected 'key = value'", line=lineno, column=col)
        key_part, value_part = body.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        if not key or not _KEY_RE.match(key):
            raise ConfigError(f"invalid key {key!r}", line=lineno, column=key_col)
        value = value_part.strip()
        if not value:
            raise ConfigError("missing value", key=key, line=lineno, column=len(key_part) + 2)
        if key in entries:
            first = entries[key][1]
            raise ConfigError(f"duplicate key (lines {first} and {lineno})", key=key, line=lineno)
        entries[key] = (value, lineno)
    return entries


def parse_axis(text, schema=None):
    """Parse ``key=start:stop:count[:log]`` into an :class:`Axis`."""
    if "=" not in text:
        raise ConfigError(f"axis must look like key=start:stop:count[:log], got {text!r}")
    key, rng = (s.strip() for s in text.split("=", 1))
    return _axis(key, rng, schema)


def _axis(key, rng, schema=None, line=None):
    parts = [p.strip() for p in rng.split(":")]
    log = False
    if len(parts) == 4:
        if parts[3] != "log":
            raise ConfigError(f"axis scale must be 'log', got {parts[3]!r}", key=key, line=line)
        log = True
        parts = parts[:3]
    if len(parts) != 3:
        raise ConfigError(f"axis range must be start:stop:count[:log], got {rng!r}", key=key, line=line)
    try:
        start, stop, count = float(parts[0]), float(parts[1]), _int(parts[2])
    except ValueError as exc:
        raise ConfigError(str(exc), key=key, line=line) from None
    if count < 1:
        raise ConfigError("axis count must be >= 1", key=key, line=line)
    if log:
        if start <= 0 or stop <= 0:
            raise ConfigError("log axis needs positive endpoints", key=key, line=line)
        values = np.geomspace(start, stop, count)
    else:
        values = np.linspace(start, stop, count)
    if schema is not None:
        if key not in schema or key == "kind":
            raise ConfigError("invalid axis key: not a numeric key of this experiment", key=key, line=line)
        conv = schema[key][0]
        if conv not in (_finite, _int):
            raise ConfigError("invalid axis key: not numeric", key=key, line=line)
        if conv is _int:
            rounded = np.round(values)
            if np.any(np.abs(values - rounded) > 1e-6 * np.maximum(1, np.abs(values))):
                raise ConfigError("axis produces non-integer values for an integer key", key=key, line=line)
            return Axis(key, [int(v) for v in rounded])
    return Axis(key, [float(v) for v in values])


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return loads(text)


def loads(text):
    entries = parse_lines(text)
    raw = {k: v for k, (v, _) in entries.items()}
    lines = {k: ln for k, (_, ln) in entries.items()}
    return build_config(raw, lines)


def build_config(raw, lines=None, with_axes=True):
    """Type-check, fill defaults and validate a raw key -> text mapping."""
    lines = lines or {}
    if "kind" not in raw:
        raise ConfigError("missing required key", key="kind")
    kind = raw["kind"]
    if kind not in SCHEMAS:
        raise ConfigError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}",
                          key="kind", line=lines.get("kind"))
    schema = SCHEMAS[kind]

    values = {}
    axes = []
    for key, text in raw.items():
        if key.startswith("sweep."):
            if with_axes:
                axes.append(_axis(key[len("sweep."):], text, schema, lines.get(key)))
            continue
        if key not in schema:
            raise ConfigError(f"unknown key for kind {kind!r}", key=key, line=lines.get(key))
        conv = schema[key][0]
        try:
            values[key] = conv(text)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value {text!r}: {exc}", key=key, line=lines.get(key)) from None
    for key, (_, default) in schema.items():
        if key not in values:
            if default is REQUIRED:
                raise ConfigError("missing required key", key=key)
            values[key] = default

    cfg = ExperimentConfig(kind=kind, raw=dict(raw), values=values, lines=dict(lines), axes=axes)
    try:
        _validate(cfg, lines)
    except CompletePositivityError as exc:
        raise ConfigError(str(exc), key="noise.beta_re", line=lines.get("noise.beta_re")) from None
    return cfg


def _fail(message, key, lines):
    raise ConfigError(message, key=key, line=lines.get(key))


def _validate(cfg, lines):
    v = cfg.values
    if "tol" in v:
        lo, hi = TOL_RANGE
        if not lo <= v["tol"] <= hi:
            _fail(f"tol must lie in [{lo:g}, {hi:g}]", "tol", lines)
    if "time.t_end" in v:
        try:
            cfg.grid = TimeGrid(v["time.t_start"], v["time.t_end"], v["time.n_samples"])
        except ValueError as exc:
            key = "time.n_samples" if "n_samples" in str(exc) else "time.t_end"
            _fail(str(exc), key, lines)
    if "model.E" in v:
        try:
            cfg.two_mode = TwoModeParams(v["model.E"], v["model.U1"], v["model.U2"], v["model.K"], v["model.N"])
        except ValueError as exc:
            _fail(str(exc), "model.N", lines)
    if "noise.gamma" in v:
        for key in ("noise.gamma", "noise.delta"):
            if v[key] < 0:
                _fail("must be nonnegative", key, lines)
        cfg.noise = NoiseParams(v["noise.gamma"], v["noise.delta"], complex(v["noise.beta_re"], v["noise.beta_im"]))

    kind = cfg.kind
    if kind == "qubit-oscillation":
        try:
            cfg.charge = ChargeParams(v["charge.E_C"], v["charge.E_J"], v["charge.n_g"], v["charge.n_bar1"])
        except ValueError as exc:
            _fail(str(exc), "charge.n_bar1", lines)
        if v["charge.check_regime"] and not cfg.charge.in_qubit_regime:
            _fail("not in the charge-qubit regime (need E_C >= 10 E_J)", "charge.E_J", lines)
        phi = np.array(v["initial.phi0"])
        if abs(np.linalg.norm(phi) - 1) > 1e-10:
            _fail("initial.phi0 must be normalized", "initial.phi0", lines)
    elif kind == "gp-oscillation":
        has_E, has_EC = v["phase.E"] is not None, v["phase.E_C"] is not None
        if has_E == has_EC:
            _fail("give exactly one of phase.E and phase.E_C", "phase.E", lines)
        if not has_E:
            v["phase.E"] = 4.0 * v["phase.E_C"]
    elif kind == "gp-vs-exact":
        if cfg.two_mode.N > EXACT_MAX_N:
            _fail(f"exact evolution limited to N <= {EXACT_MAX_N}", "model.N", lines)
        if v["exact.method"] not in ("rk", "eig"):
            _fail("exact.method must be 'rk' or 'eig'", "exact.method", lines)
        _check_psi(v, lines)
    elif kind == "master-evolution":
        state = v["initial.state"]
        if state not in ("fock", "condensate", "random"):
            _fail("initial.state must be fock, condensate or random", "initial.state", lines)
        N = cfg.two_mode.N
        if v["initial.n1"] is None:
            v["initial.n1"] = N // 2
        if not 0 <= v["initial.n1"] <= N:
            _fail(f"must lie in [0, {N}]", "initial.n1", lines)
        if state == "condensate":
            _check_psi(v, lines)
    else:
        has_N, has_ratio = v["model.N"] is not None, v["decay.fill_ratio"] is not None
        if has_N == has_ratio:
            _fail("give exactly one of model.N and decay.fill_ratio", "model.N", lines)
        if has_ratio:
            ratio = v["decay.fill_ratio"]
            if not 0 < ratio < 1:
                _fail("must lie in (0, 1)", "decay.fill_ratio", lines)
            v["model.N"] = int(round(v["decay.n_bar1"] / ratio))
        if not 0 < v["decay.n_bar1"] < v["model.N"]:
            _fail(f"must satisfy 0 < n_bar1 < N = {v['model.N']}", "decay.n_bar1", lines)


def _check_psi(v, lines):
    psi = OrderParameter(v["initial.psi1"], v["initial.psi2"])
    if abs(psi.norm2 - 1) > 1e-6:
        _fail("|psi1|^2 + |psi2|^2 must equal 1", "initial.psi1", lines)
