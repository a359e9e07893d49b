"""JSON experiment configuration.

A configuration names one model, either by inline matrices or by a pair of
named builders, together with grids and output settings::

    {
      "model": {"builder": {"system":    {"name": "two_level", "params": {...}},
                            "reservoir": {"name": "spin_chain_reservoir", "params": {...}}}},
      "beta": 1.0,
      "lambda": [0.1],
      "time_grid": [0, 1, 5, 20],
      "scan": [{"axis": "lambda"}, {"axis": "size", "values": [2, 3, 4]}],
      "output_dir": "out",
      "seed": 0
    }

Inline matrices are lists of rows whose entries are ``[re, im]`` pairs.
"""

import copy
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .builders import NamedBuilder, build_named_model
from .errors import ValidationError
from .model import build_model

SCAN_AXES = ("lambda", "size", "time")
SCAN_LIMITS = ("cesaro", "idealized")
INLINE_KEYS = ("H_S", "rho_S", "H_R", "V")
TOP_KEYS = ("model", "beta", "lambda", "time_grid", "scan", "output_dir", "seed", "gammas")


class ConfigError(ValidationError):
    """Invalid configuration; ``field`` names the offending entry, ``line`` the JSON line."""

    def __init__(self, message, field=None, line=None):
        self.line = line
        super().__init__(message, field)

    def __str__(self):
        where = f"line {self.line}: " if self.line is not None else ""
        what = f"{self.field}: " if self.field is not None else ""
        return f"{where}{what}{self.reason}"

    def at_line(self, line):
        return ConfigError(self.reason, self.field, line)


def _line_of(text, key):
    if text is None:
        return None
    needle = f'"{key}"'
    for i, row in enumerate(text.splitlines(), start=1):
        if needle in row:
            return i
    return None


def encode_matrix(a):
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def decode_matrix(rows, name):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError("expected a non-empty list of rows", name)
    n = len(rows)
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ConfigError(f"row {i} has {len(row)} entries, expected {n}", name)
        for j, z in enumerate(row):
            if isinstance(z, (int, float)) and not isinstance(z, bool):
                out[i, j] = z
            elif isinstance(z, list) and len(z) == 2 and all(isinstance(c, (int, float)) for c in z):
                out[i, j] = complex(z[0], z[1])
            else:
                raise ConfigError(f"entry ({i},{j}) must be [re, im], got {z!r}", name)
    return out


def _float_list(value, name, allow_empty=False):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or (not value and not allow_empty):
        raise ConfigError("expected a number or a list of numbers", name)
    try:
        out = [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError("expected numbers", name) from None
    if not all(np.isfinite(out)):
        raise ConfigError("values must be finite", name)
    return out


@dataclass
class ExperimentConfig:
    model: dict
    beta: float
    lambdas: list
    time_grid: list = field(default_factory=lambda: [0.0, 1.0, 5.0])
    scan: list = field(default_factory=list)
    output_dir: str = "."
    seed: int = 0
    gammas: list = None

    # -- parsing ------------------------------------------------------------

    @classmethod
    def from_dict(cls, data, text=None):
        if not isinstance(data, dict):
            raise ConfigError("top level must be a JSON object")
        unknown = sorted(set(data) - set(TOP_KEYS))
        if unknown:
            raise ConfigError(f"unknown key {unknown[0]!r}", unknown[0], _line_of(text, unknown[0]))

        def need(key):
            if key not in data:
                raise ConfigError("missing required key", key)
            return data[key]

        def wrap(key, fn):
            try:
                return fn()
            except ConfigError as exc:
                if exc.line is None:
                    raise exc.at_line(_line_of(text, key)) from None
                raise

        model = wrap("model", lambda: _check_model(need("model")))
        beta = wrap("beta", lambda: _float_list(need("beta"), "beta"))
        if len(beta) != 1 or beta[0] <= 0:
            raise ConfigError("beta must be one positive number", "beta", _line_of(text, "beta"))
        lambdas = wrap("lambda", lambda: _float_list(data.get("lambda", 0.0), "lambda"))
        time_grid = wrap("time_grid", lambda: _float_list(data.get("time_grid", [0.0, 1.0, 5.0]), "time_grid"))
        seed = data.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed must be an unsigned integer", "seed", _line_of(text, "seed"))
        output_dir = data.get("output_dir", ".")
        if not isinstance(output_dir, str):
            raise ConfigError("output_dir must be a string", "output_dir", _line_of(text, "output_dir"))
        scan = wrap("scan", lambda: _check_scan(data.get("scan", []), model))
        gammas = data.get("gammas")
        if gammas is not None:
            gammas = wrap("gammas", lambda: _float_list(gammas, "gammas"))
        cfg = cls(model, beta[0], lambdas, time_grid, scan, output_dir, seed, gammas)
        wrap("model", cfg.build)  # dimension consistency and builder parameters
        return cfg

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc.msg} (column {exc.colno})", None, exc.lineno) from None
        return cls.from_dict(data, text)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        out = {
            "model": copy.deepcopy(self.model),
            "beta": self.beta,
            "lambda": list(self.lambdas),
            "time_grid": list(self.time_grid),
            "scan": copy.deepcopy(self.scan),
            "output_dir": self.output_dir,
            "seed": self.seed,
        }
        if self.gammas is not None:
            out["gammas"] = list(self.gammas)
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def content_hash(self):
        """Hash of everything that determines results (the output location excluded)."""
        d = self.to_dict()
        d.pop("output_dir")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:20]

    def __eq__(self, other):
        return isinstance(other, ExperimentConfig) and self.to_dict() == other.to_dict()

    # -- models -------------------------------------------------------------

    @property
    def lam(self):
        """Coupling used by single-model commands (the first listed)."""
        return self.lambdas[0]

    def build(self, lam=None, reservoir_overrides=None):
        lam = self.lam if lam is None else lam
        if "inline" in self.model:
            mats = {k: decode_matrix(self.model["inline"][k], f"model.inline.{k}") for k in INLINE_KEYS}
            d_s, d_r = mats["H_S"].shape[0], mats["H_R"].shape[0]
            if mats["rho_S"].shape[0] != d_s:
                raise ConfigError(f"rho_S has dimension {mats['rho_S'].shape[0]}, H_S has {d_s}", "model.inline.rho_S")
            if mats["V"].shape[0] != d_s * d_r:
                raise ConfigError(f"V has dimension {mats['V'].shape[0]}, expected {d_s * d_r}", "model.inline.V")
            try:
                return build_model(mats["H_S"], mats["rho_S"], mats["H_R"], mats["V"], lam, self.beta)
            except ValidationError as exc:
                raise ConfigError(exc.reason, f"model.inline.{exc.field}" if exc.field else "model.inline") from None
        spec = self.model["builder"]
        reservoir = NamedBuilder.coerce(spec["reservoir"])
        if reservoir_overrides:
            reservoir = NamedBuilder(reservoir.name, {**reservoir.params, **reservoir_overrides})
        try:
            return build_named_model(spec["system"], reservoir, self.beta, lam)
        except ValidationError as exc:
            raise ConfigError(exc.reason, f"model.builder.{exc.field}" if exc.field else "model.builder") from None


def _check_model(model):
    if not isinstance(model, dict):
        raise ConfigError("model must be an object", "model")
    kinds = [k for k in ("inline", "builder") if k in model]
    if len(kinds) != 1 or len(model) != 1:
        raise ConfigError("model needs exactly one of 'inline' or 'builder'", "model")
    if kinds[0] == "inline":
        inline = model["inline"]
        missing = [k for k in INLINE_KEYS if k not in (inline or {})]
        if missing:
            raise ConfigError(f"missing matrix {missing[0]}", f"model.inline.{missing[0]}")
        for k in INLINE_KEYS:
            decode_matrix(inline[k], f"model.inline.{k}")
        return {"inline": {k: inline[k] for k in INLINE_KEYS}}
    spec = model["builder"]
    if not isinstance(spec, dict) or set(spec) != {"system", "reservoir"}:
        raise ConfigError("builder needs 'system' and 'reservoir'", "model.builder")
    out = {}
    for part in ("system", "reservoir"):
        try:
            out[part] = NamedBuilder.coerce(spec[part]).to_dict()
        except ValidationError as exc:
            raise ConfigError(exc.reason, f"model.builder.{part}") from None
    return {"builder": out}


def _check_scan(scan, model):
    if isinstance(scan, dict):
        scan = [scan]
    if not isinstance(scan, list):
        raise ConfigError("scan must be an object or a list of objects", "scan")
    out = []
    for i, ax in enumerate(scan):
        name = f"scan[{i}]"
        if not isinstance(ax, dict) or ax.get("axis") not in SCAN_AXES:
            raise ConfigError(f"axis must be one of {SCAN_AXES}", f"{name}.axis")
        entry = {"axis": ax["axis"], "limit": ax.get("limit", "cesaro"), "workers": int(ax.get("workers", 1))}
        if entry["limit"] not in SCAN_LIMITS:
            raise ConfigError(f"limit must be one of {SCAN_LIMITS}", f"{name}.limit")
        if "values" in ax:
            entry["values"] = _float_list(ax["values"], f"{name}.values")
        if ax["axis"] == "size":
            if "builder" not in model:
                raise ConfigError("a size axis needs a builder model", f"{name}.axis")
            if "values" not in entry:
                raise ConfigError("a size axis needs 'values'", f"{name}.values")
            entry["param"] = ax.get("param", "n")
            if "lambda" in ax:
                entry["lambda"] = float(ax["lambda"])
        extra = set(ax) - {"axis", "limit", "workers", "values", "param", "lambda"}
        if extra:
            raise ConfigError(f"unknown key {sorted(extra)[0]!r}", name)
        out.append(entry)
    return out
