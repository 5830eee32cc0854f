"""Study configuration: a YAML file with nested key/value sections.

Schema (see README for a full example)::

    problem: ishigami            # optional builtin: pulls variables
    variables:                   # explicit list, overrides problem
      - {name: x1, dist: uniform, a: -3.1416, b: 3.1416}
      - {name: p,  dist: normal,  mu: 500.0,  sigma: 100.0}
    models:
      - {id: hf, builtin: ishigami/hf}
      - {id: lf, builtin: ishigami/lf1, cost_unit: 0.125}
      - {id: ext, command: "python model.py", mode: stream, fidelity: hf}
    schemes:
      - {name: hf,  kind: hf, hf: hf}
      - {name: mf1, kind: mf, hf: hf, lf: lf, q: 2, rt: 0.03125}
    levels: {min: 1, max: 4}
    reference: {kind: analytic, a: 7.0, b: 0.1}
    #          {kind: pce, model: hf, w: 5}
    #          {kind: mc,  model: hf, n: 65536, seed: 7}
    validation: {count: 10000, seed: 42}
    rt_values: [0.25, 0.125, 0.0625, 0.03125]
    output: out
    cache: cache.tsv             # optional persistent evaluation cache
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .models import BENCHMARK_SPECS, Model, builtin_model, external_model
from .orthopoly import Normal, Uniform, VariableSpec
from .sobol import SobolReport, all_indices, mc_sobol
from .study import SchemeSpec, build_scheme, ishigami_analytic

DEFAULT_RT_VALUES = (0.25, 0.125, 0.0625, 0.03125)


class ConfigError(ValueError):
    """Invalid or inconsistent study configuration."""


@dataclass(frozen=True)
class ModelBinding:
    id: str
    builtin: str | None = None
    command: str | None = None
    mode: str = "oneshot"
    fidelity: str = "hf"
    cost_unit: float = 1.0


@dataclass(frozen=True)
class ReferenceSpec:
    kind: str  # "analytic" | "pce" | "mc"
    model: str | None = None
    w: int | None = None
    n: int | None = None
    seed: int | None = None
    a: float = 7.0
    b: float = 0.1


@dataclass(frozen=True)
class StudyConfig:
    variables: tuple[VariableSpec, ...]
    models: tuple[ModelBinding, ...]
    schemes: tuple[SchemeSpec, ...]
    level_min: int
    level_max: int
    reference: ReferenceSpec
    validation_count: int = 10000
    validation_seed: int = 42
    rt_values: tuple[float, ...] = DEFAULT_RT_VALUES
    output: str = "out"
    cache_path: str | None = None
    problem: str | None = None

    def resolved_models(self) -> dict[str, Model]:
        out: dict[str, Model] = {}
        for binding in self.models:
            if binding.builtin is not None:
                problem, _, fidelity = binding.builtin.partition("/")
                try:
                    base = builtin_model(problem, fidelity)
                except KeyError as exc:
                    raise ConfigError(str(exc)) from exc
                out[binding.id] = Model(
                    id=binding.id,
                    fidelity=base.fidelity,
                    fn=base.fn,
                    cost_unit=binding.cost_unit,
                )
            else:
                out[binding.id] = external_model(
                    binding.command,
                    fidelity=binding.fidelity,
                    mode=binding.mode,
                    cost_unit=binding.cost_unit,
                    id=binding.id,
                )
        return out

    def scheme(self, name: str) -> SchemeSpec:
        for s in self.schemes:
            if s.name == name:
                return s
        raise ConfigError(f"unknown scheme {name!r}")


def _parse_variable(entry: dict) -> VariableSpec:
    kind = entry.get("dist")
    try:
        if kind == "uniform":
            return VariableSpec(entry["name"], Uniform(float(entry["a"]), float(entry["b"])))
        if kind == "normal":
            return VariableSpec(entry["name"], Normal(float(entry["mu"]), float(entry["sigma"])))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad variable entry {entry!r}: {exc}") from exc
    raise ConfigError(f"variable {entry.get('name')!r}: unknown dist {kind!r}")


def parse_config(data: dict) -> StudyConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")

    problem = data.get("problem")
    if "variables" in data:
        variables = tuple(_parse_variable(v) for v in data["variables"])
    elif problem in BENCHMARK_SPECS:
        variables = tuple(BENCHMARK_SPECS[problem])
    else:
        raise ConfigError("config needs 'variables' or a builtin 'problem'")
    if not variables:
        raise ConfigError("at least one variable is required")

    try:
        models = tuple(ModelBinding(**m) for m in data.get("models", []))
    except TypeError as exc:
        raise ConfigError(f"bad model binding: {exc}") from exc
    if not models:
        raise ConfigError("at least one model is required")
    for binding in models:
        if (binding.builtin is None) == (binding.command is None):
            raise ConfigError(
                f"model {binding.id!r} needs exactly one of 'builtin' or 'command'"
            )
        if binding.mode not in ("oneshot", "stream"):
            raise ConfigError(f"model {binding.id!r}: unknown mode {binding.mode!r}")
    model_ids = {m.id for m in models}
    if len(model_ids) != len(models):
        raise ConfigError("model ids must be unique")

    try:
        schemes = tuple(SchemeSpec(**s) for s in data.get("schemes", []))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scheme entry: {exc}") from exc
    if not schemes:
        raise ConfigError("at least one scheme is required")
    for scheme in schemes:
        for ref in (scheme.hf, scheme.lf):
            if ref is not None and ref not in model_ids:
                raise ConfigError(f"scheme {scheme.name!r} references unknown model {ref!r}")

    levels = data.get("levels", {})
    level_min = int(levels.get("min", 1))
    level_max = int(levels.get("max", level_min))
    if level_min < 0 or level_max < level_min:
        raise ConfigError(f"bad level range [{level_min}, {level_max}]")

    ref_data = data.get("reference")
    if not isinstance(ref_data, dict) or "kind" not in ref_data:
        raise ConfigError("config needs a 'reference' section with a 'kind'")
    try:
        reference = ReferenceSpec(**ref_data)
    except TypeError as exc:
        raise ConfigError(f"bad reference section: {exc}") from exc
    if reference.kind not in ("analytic", "pce", "mc"):
        raise ConfigError(f"unknown reference kind {reference.kind!r}")
    if reference.kind in ("pce", "mc"):
        if reference.model not in model_ids:
            raise ConfigError(f"reference model {reference.model!r} not defined")
        if reference.kind == "pce" and reference.w is None:
            raise ConfigError("pce reference needs 'w'")
        if reference.kind == "mc" and reference.n is None:
            raise ConfigError("mc reference needs 'n'")

    validation = data.get("validation", {})
    return StudyConfig(
        variables=variables,
        models=models,
        schemes=schemes,
        level_min=level_min,
        level_max=level_max,
        reference=reference,
        validation_count=int(validation.get("count", 10000)),
        validation_seed=int(validation.get("seed", 42)),
        rt_values=tuple(float(r) for r in data.get("rt_values", DEFAULT_RT_VALUES)),
        output=str(data.get("output", "out")),
        cache_path=data.get("cache"),
        problem=problem,
    )


def load_config(path: str | Path) -> StudyConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parse_config(data)


def config_to_dict(cfg: StudyConfig) -> dict:
    variables = []
    for spec in cfg.variables:
        if isinstance(spec.dist, Uniform):
            variables.append(
                {"name": spec.name, "dist": "uniform", "a": spec.dist.a, "b": spec.dist.b}
            )
        else:
            variables.append(
                {"name": spec.name, "dist": "normal", "mu": spec.dist.mu, "sigma": spec.dist.sigma}
            )
    models = []
    for m in cfg.models:
        entry: dict = {"id": m.id}
        if m.builtin is not None:
            entry["builtin"] = m.builtin
        else:
            entry.update({"command": m.command, "mode": m.mode, "fidelity": m.fidelity})
        if m.cost_unit != 1.0:
            entry["cost_unit"] = m.cost_unit
        models.append(entry)
    schemes = []
    for s in cfg.schemes:
        entry = {"name": s.name, "kind": s.kind, "hf": s.hf}
        if s.lf is not None:
            entry["lf"] = s.lf
        if s.kind == "mf":
            entry["q"] = s.q
        if s.rt is not None:
            entry["rt"] = s.rt
        schemes.append(entry)
    ref: dict = {"kind": cfg.reference.kind}
    if cfg.reference.kind == "analytic":
        ref.update({"a": cfg.reference.a, "b": cfg.reference.b})
    elif cfg.reference.kind == "pce":
        ref.update({"model": cfg.reference.model, "w": cfg.reference.w})
    else:
        ref.update(
            {"model": cfg.reference.model, "n": cfg.reference.n, "seed": cfg.reference.seed}
        )
    out = {
        "variables": variables,
        "models": models,
        "schemes": schemes,
        "levels": {"min": cfg.level_min, "max": cfg.level_max},
        "reference": ref,
        "validation": {"count": cfg.validation_count, "seed": cfg.validation_seed},
        "rt_values": list(cfg.rt_values),
        "output": cfg.output,
    }
    if cfg.problem is not None:
        out["problem"] = cfg.problem
    if cfg.cache_path is not None:
        out["cache"] = cfg.cache_path
    return out


def save_config(cfg: StudyConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(config_to_dict(cfg), sort_keys=False))


def build_reference(cfg: StudyConfig, models: dict[str, Model]) -> SobolReport:
    """Reference Sobol report named by the config: analytic, a high-level
    PCE of one model, or a seeded Monte Carlo run."""
    ref = cfg.reference
    if ref.kind == "analytic":
        return ishigami_analytic(ref.a, ref.b)
    if ref.kind == "pce":
        scheme = SchemeSpec(name="__reference__", kind="hf", hf=ref.model)
        built = build_scheme(scheme, ref.w, cfg.variables, models)
        return all_indices(built.expansion)
    return mc_sobol(models[ref.model], cfg.variables, ref.n, ref.seed or 0)
