"""Problem and sweep configuration: flat key/value text files or JSON.

Text grammar (see README for the full description):

* ``key = value`` pairs, one per line; ``#`` starts a comment.
* Market and evaluation keys live at the top of the file; solver tolerances
  and Monte Carlo settings live under ``[solver]`` and ``[mc]`` sections.
* Vector values (``mu``, ``sigma``, ``grid``) are whitespace- or
  comma-separated; ``sigma`` is row-major. ``grid`` also accepts the range
  shorthand ``start:stop:step``.
* A file whose first non-blank character is ``{`` is parsed as JSON with the
  same keys (``solver``/``mc``/``sweep`` as nested objects).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .market import EvaluationSpec, MarketModel


@dataclass(frozen=True)
class ProblemConfig:
    utility: str
    mu: tuple[float, ...]
    sigma: tuple[float, ...]  # row-major, length n*n
    r: float
    tau: float
    gamma: float
    delta: float
    x0: float
    alpha: float | None = None
    tol_root: float = 1e-10
    tol_fixed_point: float = 1e-10
    quad_order: int = 64
    n_paths: int = 100_000
    n_periods: int | None = None
    seed: int = 12345
    antithetic: bool = False

    def __post_init__(self):
        if self.utility not in ("power", "log"):
            raise ConfigError(f"utility must be 'power' or 'log', got {self.utility!r}")
        n = len(self.mu)
        if n < 1:
            raise ConfigError("mu must have at least one entry")
        if len(self.sigma) != n * n:
            raise ConfigError(
                f"sigma must have n*n={n * n} row-major entries, got {len(self.sigma)}"
            )
        if self.utility == "power" and self.alpha is None:
            raise ConfigError("power utility requires alpha")
        if self.utility == "log" and self.alpha is not None:
            raise ConfigError("log utility takes no alpha")

    @property
    def n(self) -> int:
        return len(self.mu)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    grid: tuple[float, ...]
    outputs: tuple[str, ...]

    def __post_init__(self):
        if len(self.grid) < 1:
            raise ConfigError("sweep grid is empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("sweep grid must be strictly increasing")
        if not self.outputs:
            raise ConfigError("sweep outputs are empty")


def to_market(cfg: ProblemConfig) -> MarketModel:
    sigma = np.asarray(cfg.sigma, dtype=float).reshape(cfg.n, cfg.n)
    return MarketModel(mu=np.asarray(cfg.mu, dtype=float), sigma=sigma, r=cfg.r)


def to_evaluation(cfg: ProblemConfig) -> EvaluationSpec:
    return EvaluationSpec(tau=cfg.tau, gamma=cfg.gamma, delta=cfg.delta)


_SWEEP_SCALARS = ("alpha", "gamma", "tau", "x0", "delta")


def apply_sweep_value(cfg: ProblemConfig, parameter: str, value: float) -> ProblemConfig:
    """Return a copy of ``cfg`` with one swept parameter replaced."""
    if parameter in _SWEEP_SCALARS:
        if parameter == "alpha" and cfg.utility != "power":
            raise ConfigError("alpha can only be swept for power utility")
        return dataclasses.replace(cfg, **{parameter: float(value)})
    if parameter.startswith("mu_"):
        i = _index_1based(parameter[3:], cfg.n, parameter)
        mu = list(cfg.mu)
        mu[i - 1] = float(value)
        return dataclasses.replace(cfg, mu=tuple(mu))
    if parameter.startswith("sigma_"):
        suffix = parameter[6:]
        if len(suffix) != 2 or not suffix.isdigit():
            raise ConfigError(f"bad sigma sweep parameter {parameter!r}")
        i = _index_1based(suffix[0], cfg.n, parameter)
        j = _index_1based(suffix[1], cfg.n, parameter)
        sigma = list(cfg.sigma)
        sigma[(i - 1) * cfg.n + (j - 1)] = float(value)
        return dataclasses.replace(cfg, sigma=tuple(sigma))
    raise ConfigError(f"unknown sweep parameter {parameter!r}")


def _index_1based(token: str, n: int, parameter: str) -> int:
    try:
        i = int(token)
    except ValueError:
        raise ConfigError(f"bad index in sweep parameter {parameter!r}") from None
    if not 1 <= i <= n:
        raise ConfigError(f"index out of range in sweep parameter {parameter!r}")
    return i


# ---------------------------------------------------------------------------
# text / JSON parsing


def _split_sections(text: str) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {"": {}}
    current = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        sections[current][key.strip().lower()] = value.strip()
    return sections


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_bool(raw: str, key: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {raw!r}")


def _parse_vector(raw: str, key: str) -> tuple[float, ...]:
    tokens = raw.replace(",", " ").split()
    if len(tokens) == 1 and ":" in tokens[0]:
        start_s, stop_s, step_s = (tokens[0].split(":") + ["", ""])[:3]
        start = _parse_float(start_s, key)
        stop = _parse_float(stop_s, key)
        step = _parse_float(step_s, key)
        if step <= 0:
            raise ConfigError(f"{key}: range step must be positive")
        count = int(round((stop - start) / step)) + 1
        values = tuple(start + k * step for k in range(count) if start + k * step <= stop + 0.5 * step)
        return values
    return tuple(_parse_float(tok, key) for tok in tokens)


def parse_problem_config(text: str) -> ProblemConfig:
    """Parse a problem configuration from text or JSON."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON config: {exc}") from None
        return _config_from_mapping(payload)
    sections = _split_sections(text)
    return _config_from_sections(sections)


def _config_from_mapping(payload) -> ProblemConfig:
    if not isinstance(payload, dict):
        raise ConfigError("JSON config must be an object")
    flat: dict[str, str] = {}
    solver = payload.get("solver", {}) or {}
    mc = payload.get("mc", {}) or {}
    for part, src in (("", payload), ("solver", solver), ("mc", mc)):
        if not isinstance(src, dict):
            raise ConfigError(f"section {part or 'top level'} must be an object")
    sections = {
        "": {k: _json_scalar(v) for k, v in payload.items() if k not in ("solver", "mc")},
        "solver": {k: _json_scalar(v) for k, v in solver.items()},
        "mc": {k: _json_scalar(v) for k, v in mc.items()},
    }
    return _config_from_sections(sections)


def _json_scalar(value) -> str:
    if isinstance(value, (list, tuple)):
        return " ".join(repr(float(v)) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "auto"
    return str(value)


def _config_from_sections(sections: dict[str, dict[str, str]]) -> ProblemConfig:
    top = dict(sections.get("", {}))
    solver = dict(sections.get("solver", {}))
    mc = dict(sections.get("mc", {}))
    for name in sections:
        if name not in ("", "solver", "mc", "sweep"):
            raise ConfigError(f"unknown section [{name}]")

    def pop_required(key: str) -> str:
        if key not in top:
            raise ConfigError(f"missing required key {key!r}")
        return top.pop(key)

    utility = pop_required("utility").lower()
    mu = _parse_vector(pop_required("mu"), "mu")
    sigma = _parse_vector(pop_required("sigma"), "sigma")
    kwargs = dict(
        utility=utility,
        mu=mu,
        sigma=sigma,
        r=_parse_float(pop_required("r"), "r"),
        tau=_parse_float(pop_required("tau"), "tau"),
        gamma=_parse_float(pop_required("gamma"), "gamma"),
        delta=_parse_float(pop_required("delta"), "delta"),
        x0=_parse_float(pop_required("x0"), "x0"),
    )
    if "alpha" in top:
        kwargs["alpha"] = _parse_float(top.pop("alpha"), "alpha")
    if "n" in top:
        n_declared = _parse_int(top.pop("n"), "n")
        if n_declared != len(mu):
            raise ConfigError(f"declared n={n_declared} but mu has {len(mu)} entries")
    if top:
        raise ConfigError(f"unknown top-level keys: {sorted(top)}")

    if "tol_root" in solver:
        kwargs["tol_root"] = _parse_float(solver.pop("tol_root"), "tol_root")
    if "tol_fixed_point" in solver:
        kwargs["tol_fixed_point"] = _parse_float(
            solver.pop("tol_fixed_point"), "tol_fixed_point"
        )
    if "quad_order" in solver:
        kwargs["quad_order"] = _parse_int(solver.pop("quad_order"), "quad_order")
    if solver:
        raise ConfigError(f"unknown [solver] keys: {sorted(solver)}")

    if "n_paths" in mc:
        kwargs["n_paths"] = _parse_int(mc.pop("n_paths"), "n_paths")
    if "n_periods" in mc:
        raw = mc.pop("n_periods")
        kwargs["n_periods"] = None if raw.lower() == "auto" else _parse_int(raw, "n_periods")
    if "seed" in mc:
        kwargs["seed"] = _parse_int(mc.pop("seed"), "seed")
    if "antithetic" in mc:
        kwargs["antithetic"] = _parse_bool(mc.pop("antithetic"), "antithetic")
    if mc:
        raise ConfigError(f"unknown [mc] keys: {sorted(mc)}")

    return ProblemConfig(**kwargs)


def format_problem_config(cfg: ProblemConfig) -> str:
    """Serialize a configuration so that parsing it back gives an equal object."""
    lines = [
        f"utility = {cfg.utility}",
        f"n = {cfg.n}",
        "mu = " + " ".join(repr(v) for v in cfg.mu),
        "sigma = " + " ".join(repr(v) for v in cfg.sigma),
        f"r = {cfg.r!r}",
        f"tau = {cfg.tau!r}",
        f"gamma = {cfg.gamma!r}",
        f"delta = {cfg.delta!r}",
        f"x0 = {cfg.x0!r}",
    ]
    if cfg.alpha is not None:
        lines.append(f"alpha = {cfg.alpha!r}")
    lines += [
        "",
        "[solver]",
        f"tol_root = {cfg.tol_root!r}",
        f"tol_fixed_point = {cfg.tol_fixed_point!r}",
        f"quad_order = {cfg.quad_order}",
        "",
        "[mc]",
        f"n_paths = {cfg.n_paths}",
        f"n_periods = {'auto' if cfg.n_periods is None else cfg.n_periods}",
        f"seed = {cfg.seed}",
        f"antithetic = {'true' if cfg.antithetic else 'false'}",
        "",
    ]
    return "\n".join(lines)


def parse_sweep_spec(text: str) -> SweepSpec:
    """Parse a sweep specification from text (``[sweep]`` section) or JSON."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON sweep: {exc}") from None
        if isinstance(payload, dict) and "sweep" in payload:
            payload = payload["sweep"]
        if not isinstance(payload, dict):
            raise ConfigError("JSON sweep must be an object")
        try:
            grid = tuple(float(v) for v in payload["grid"])
            outputs = tuple(str(v) for v in payload["outputs"])
            parameter = str(payload["parameter"])
        except KeyError as exc:
            raise ConfigError(f"sweep is missing key {exc}") from None
        return SweepSpec(parameter=parameter, grid=grid, outputs=outputs)

    sections = _split_sections(text)
    body = dict(sections.get("sweep", {}) or sections.get("", {}))
    for key in ("parameter", "grid", "outputs"):
        if key not in body:
            raise ConfigError(f"sweep is missing key {key!r}")
    parameter = body.pop("parameter")
    grid = _parse_vector(body.pop("grid"), "grid")
    outputs = tuple(body.pop("outputs").replace(",", " ").split())
    if body:
        raise ConfigError(f"unknown sweep keys: {sorted(body)}")
    return SweepSpec(parameter=parameter, grid=grid, outputs=outputs)
