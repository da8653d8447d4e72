"""YAML run configuration for the command-line tool.

All keys are optional; command-line flags override file values.  Example::

    seed: 7
    trials: 1000
    p_err: 0.0
    output: reports.jsonl
    compensate: true
    fiber: {length_a: 10000, length_b: 10000, velocity: 2.0e8,
            omega1: 1.2151e15, omega2: 1.2152e15}
    noise_a: random                  # or identity, or {alpha: [re, im], beta: [re, im]}
    noise_b: {alpha: 0.6, beta: [0, 0.8]}
    n: 4                             # run-ghz only
    noises: random                   # run-ghz: random, identity, or a list of n pairs
    experimental_odd_n: false
    circuit: my_wiring.json          # run-two-qubit only; defaults to the bundled wiring
    sweep: {variable: homodyne_err, grid: [0, 0.1, 0.25, 0.5]}
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml

from .elements import FiberConfig, NoiseParams
from .errors import ParameterError

NOISE_CHOICES = ("random", "identity")


class ConfigError(ValueError):
    """Invalid configuration; the message names the file position and field."""


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    trials: int = 1
    p_err: float = 0.0
    output: str | None = None
    compensate: bool = True
    fiber: FiberConfig = field(default_factory=FiberConfig)
    noise_a: NoiseParams | str = "random"
    noise_b: NoiseParams | str = "random"
    n: int = 4
    noises: tuple[NoiseParams, ...] | str = "random"
    experimental_odd_n: bool = False
    circuit: str | None = None
    sweep_variable: str | None = None
    sweep_grid: tuple[float, ...] = ()


_TOP_KEYS = {f.name for f in fields(RunConfig)} - {"sweep_variable", "sweep_grid"} | {"sweep"}


def _key_lines(node, prefix: str = "", out: dict | None = None) -> dict[str, int]:
    """Map dotted field paths to 1-based line numbers in the YAML source."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}{k.value}"
            out[path] = k.start_mark.line + 1
            _key_lines(v, path + ".", out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            path = f"{prefix[:-1]}[{i}]"
            out[path] = v.start_mark.line + 1
            _key_lines(v, path + ".", out)
    return out


class _Ctx:
    def __init__(self, source: str, lines: dict[str, int]):
        self.source, self.lines = source, lines

    def fail(self, path: str, msg: str):
        line = self.lines.get(path)
        where = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{where}: field '{path}': {msg}")


def _number(ctx: _Ctx, path: str, v: Any, *, integer=False, positive=False, minimum=None,
            maximum=None):
    if isinstance(v, str):
        # YAML 1.1 reads exponents without a sign (2.0e8) as strings
        try:
            v = float(v)
        except ValueError:
            ctx.fail(path, f"expected a number, got {v!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        ctx.fail(path, f"expected a number, got {v!r}")
    if integer and (not float(v).is_integer()):
        ctx.fail(path, f"expected an integer, got {v!r}")
    if not math.isfinite(v):
        ctx.fail(path, "must be finite")
    if positive and v <= 0:
        ctx.fail(path, f"must be positive, got {v!r}")
    if minimum is not None and v < minimum:
        ctx.fail(path, f"must be >= {minimum}, got {v!r}")
    if maximum is not None and v > maximum:
        ctx.fail(path, f"must be <= {maximum}, got {v!r}")
    return int(v) if integer else float(v)


def _complex(ctx: _Ctx, path: str, v: Any) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        re_, im_ = (_number(ctx, f"{path}[{i}]", x) for i, x in enumerate(v))
        return complex(re_, im_)
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", ""))
        except ValueError:
            ctx.fail(path, f"cannot parse complex number {v!r}")
    return complex(_number(ctx, path, v))


def _noise(ctx: _Ctx, path: str, v: Any) -> NoiseParams | str:
    if isinstance(v, str):
        if v not in NOISE_CHOICES:
            ctx.fail(path, f"expected one of {NOISE_CHOICES} or an alpha/beta mapping, got {v!r}")
        return v
    if not isinstance(v, dict) or set(v) != {"alpha", "beta"}:
        ctx.fail(path, "expected a mapping with exactly the keys alpha and beta")
    try:
        return NoiseParams(_complex(ctx, f"{path}.alpha", v["alpha"]),
                           _complex(ctx, f"{path}.beta", v["beta"]))
    except ParameterError as exc:
        ctx.fail(path, str(exc))


def _bool(ctx: _Ctx, path: str, v: Any) -> bool:
    if not isinstance(v, bool):
        ctx.fail(path, f"expected true or false, got {v!r}")
    return v


def parse_config(data: Any, source: str = "<config>", lines: dict[str, int] | None = None) -> RunConfig:
    ctx = _Ctx(source, lines or {})
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    for key in data:
        if key not in _TOP_KEYS:
            ctx.fail(str(key), f"unknown field (known: {', '.join(sorted(_TOP_KEYS))})")
    kw: dict[str, Any] = {}
    if "seed" in data:
        kw["seed"] = _number(ctx, "seed", data["seed"], integer=True, minimum=0)
    if "trials" in data:
        kw["trials"] = _number(ctx, "trials", data["trials"], integer=True, minimum=1)
    if "p_err" in data:
        kw["p_err"] = _number(ctx, "p_err", data["p_err"], minimum=0.0, maximum=0.5)
    for key in ("output", "circuit"):
        if key in data:
            if not isinstance(data[key], str) or not data[key]:
                ctx.fail(key, "expected a nonempty path")
            kw[key] = data[key]
    for key in ("compensate", "experimental_odd_n"):
        if key in data:
            kw[key] = _bool(ctx, key, data[key])
    if "fiber" in data:
        raw = data["fiber"]
        if not isinstance(raw, dict):
            ctx.fail("fiber", "expected a mapping")
        allowed = {f.name for f in fields(FiberConfig)}
        fkw = {}
        for k, v in raw.items():
            if k not in allowed:
                ctx.fail(f"fiber.{k}", f"unknown field (known: {', '.join(sorted(allowed))})")
            fkw[k] = _number(ctx, f"fiber.{k}", v, positive=True)
        try:
            kw["fiber"] = FiberConfig(**fkw)
        except ParameterError as exc:
            ctx.fail("fiber", str(exc))
    for key in ("noise_a", "noise_b"):
        if key in data:
            kw[key] = _noise(ctx, key, data[key])
    if "n" in data:
        kw["n"] = _number(ctx, "n", data["n"], integer=True, minimum=2)
    if "noises" in data:
        raw = data["noises"]
        if isinstance(raw, list):
            kw["noises"] = tuple(_noise(ctx, f"noises[{i}]", v) for i, v in enumerate(raw))
            if any(isinstance(x, str) for x in kw["noises"]):
                ctx.fail("noises", "list entries must be alpha/beta mappings")
        else:
            kw["noises"] = _noise(ctx, "noises", raw)
    if "sweep" in data:
        raw = data["sweep"]
        if not isinstance(raw, dict):
            ctx.fail("sweep", "expected a mapping with variable and grid")
        extra = set(raw) - {"variable", "grid"}
        if extra:
            ctx.fail(f"sweep.{sorted(extra)[0]}", "unknown field (known: grid, variable)")
        if "variable" in raw:
            kw["sweep_variable"] = str(raw["variable"])
        if "grid" in raw:
            if not isinstance(raw["grid"], list):
                ctx.fail("sweep.grid", "expected a list of numbers")
            kw["sweep_grid"] = tuple(
                _number(ctx, f"sweep.grid[{i}]", v) for i, v in enumerate(raw["grid"])
            )
    cfg = RunConfig(**kw)
    if isinstance(cfg.noises, tuple) and len(cfg.noises) != cfg.n:
        ctx.fail("noises", f"expected {cfg.n} entries to match n, got {len(cfg.noises)}")
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}" if mark else str(path)
        raise ConfigError(f"{where}: {getattr(exc, 'problem', exc)}") from None
    return parse_config(data, str(path), _key_lines(node) if node is not None else {})


def override(cfg: RunConfig, **flags) -> RunConfig:
    """Apply command-line values that were actually given (``None`` means absent)."""
    ctx = _Ctx("command line", {})
    given = {k: v for k, v in flags.items() if v is not None}
    if "seed" in given:
        given["seed"] = _number(ctx, "--seed", given["seed"], integer=True, minimum=0)
    if "trials" in given:
        given["trials"] = _number(ctx, "--trials", given["trials"], integer=True, minimum=1)
    if "p_err" in given:
        given["p_err"] = _number(ctx, "--p-err", given["p_err"], minimum=0.0, maximum=0.5)
    if "n" in given:
        given["n"] = _number(ctx, "--n", given["n"], integer=True, minimum=2)
    if "experimental_odd_n" in given and not given["experimental_odd_n"]:
        del given["experimental_odd_n"]
    cfg = replace(cfg, **given)
    if isinstance(cfg.noises, tuple) and len(cfg.noises) != cfg.n:
        ctx.fail("--n", f"config lists {len(cfg.noises)} noise pairs but n={cfg.n}")
    return cfg
