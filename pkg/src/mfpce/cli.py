"""Command-line front end.

Subcommands::

    mfpce sobol    --config cfg.yaml --scheme hf --w 6 [--q 2]
    mfpce converge --config cfg.yaml
    mfpce decay    --config cfg.yaml --scheme mf1 --w 5
    mfpce mc-check --config cfg.yaml --model hf [--n 65536]

Global flags: ``--config``, ``--out``, ``--threads``, ``--seed``; each can
also come from the environment (``MFPCE_CONFIG``, ``MFPCE_OUT``,
``MFPCE_THREADS``, ``MFPCE_SEED``).

Exit codes: 0 success, 2 configuration error, 3 model-evaluation error,
4 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .config import ConfigError, StudyConfig, load_config
from .models import EvalCache, ModelError
from .sobol import SobolReport, ZeroVarianceError, all_indices, mc_sobol
from .study import (
    build_scheme,
    decay_report,
    run_convergence,
    write_convergence_csv,
    write_decay_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MODEL = 3
EXIT_DEGENERATE = 4


def _env_default(name: str, fallback=None):
    return os.environ.get(f"MFPCE_{name}", fallback)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfpce",
        description="Sobol sensitivity analysis via (multi-fidelity) polynomial "
        "chaos expansions on sparse grids",
    )
    parser.add_argument("--config", default=_env_default("CONFIG"), help="study config (YAML)")
    parser.add_argument("--out", default=_env_default("OUT"), help="output directory override")
    parser.add_argument(
        "--threads",
        type=int,
        default=int(_env_default("THREADS", 1)),
        help="worker threads for external oneshot models",
    )
    parser.add_argument(
        "--seed", type=int, default=_env_default("SEED"), help="override the validation/MC seed"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sobol = sub.add_parser("sobol", help="Sobol report for one scheme at one level")
    p_sobol.add_argument("--scheme", required=True)
    p_sobol.add_argument("--w", type=int, required=True)
    p_sobol.add_argument("--q", type=int, default=None)

    sub.add_parser("converge", help="convergence sweep over all schemes and levels")

    p_decay = sub.add_parser("decay", help="coefficient-decay series for one scheme")
    p_decay.add_argument("--scheme", required=True)
    p_decay.add_argument("--w", type=int, required=True)

    p_mc = sub.add_parser("mc-check", help="Monte Carlo Sobol cross-check of one model")
    p_mc.add_argument("--model", required=True)
    p_mc.add_argument("--n", type=int, default=65536)
    return parser


def _load(args) -> tuple[StudyConfig, Path]:
    if not args.config:
        raise ConfigError("no config given (use --config or MFPCE_CONFIG)")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, validation_seed=int(args.seed))
    out = Path(args.out) if args.out else Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def _report_payload(report: SobolReport, variables) -> dict:
    names = [v.name for v in variables]
    payload = {
        "mean": report.mean,
        "variance": report.variance,
        "subset_indices": [
            {"subset": [i + 1 for i in subset], "variables": [names[i] for i in subset], "value": v}
            for subset, v in sorted(report.subset_indices.items())
        ],
        "total_indices": [
            {"variable": names[i], "value": t} for i, t in enumerate(report.total_indices)
        ],
    }
    if report.first_order_se is not None:
        payload["first_order_se"] = list(report.first_order_se)
    if report.total_se is not None:
        payload["total_se"] = list(report.total_se)
    return payload


def cmd_sobol(cfg: StudyConfig, out: Path, args) -> int:
    scheme = cfg.scheme(args.scheme)
    if args.q is not None:
        scheme = dataclasses.replace(scheme, q=args.q)
    models = cfg.resolved_models()
    cache = EvalCache(cfg.cache_path)
    built = build_scheme(scheme, args.w, cfg.variables, models, cache)
    report = all_indices(built.expansion)
    stem = f"sobol_{scheme.name}_w{args.w}"
    payload = _report_payload(report, cfg.variables)
    payload["scheme"] = scheme.label(args.w)
    payload["n_hf"] = built.n_hf
    payload["n_lf"] = built.n_lf
    (out / f"{stem}.json").write_text(json.dumps(payload, indent=2) + "\n")
    with open(out / f"{stem}_totals.csv", "w") as fh:
        fh.write("variable,total_index\n")
        for v, t in zip(cfg.variables, report.total_indices):
            fh.write(f"{v.name},{t:.12g}\n")
    print(f"wrote {out / stem}.json and {stem}_totals.csv")
    return EXIT_OK


def cmd_converge(cfg: StudyConfig, out: Path) -> int:
    rows = run_convergence(cfg)
    path = out / "convergence.csv"
    write_convergence_csv(rows, path)
    print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK


def cmd_decay(cfg: StudyConfig, out: Path, args) -> int:
    scheme = cfg.scheme(args.scheme)
    models = cfg.resolved_models()
    built = build_scheme(scheme, args.w, cfg.variables, models, EvalCache(cfg.cache_path))
    expansions = [built.expansion]
    if built.lf_expansion is not None:
        expansions = [built.lf_expansion, built.correction, built.expansion]
        # add the HF spectrum at the correction level for comparison
        hf_scheme = dataclasses.replace(scheme, kind="hf", q=0)
        hf_built = build_scheme(hf_scheme, args.w - scheme.q, cfg.variables, models)
        expansions.append(hf_built.expansion)
    rows = decay_report(expansions)
    path = out / f"decay_{scheme.name}_w{args.w}.csv"
    write_decay_csv(rows, path)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_mc_check(cfg: StudyConfig, out: Path, args) -> int:
    models = cfg.resolved_models()
    if args.model not in models:
        raise ConfigError(f"unknown model {args.model!r}")
    report = mc_sobol(models[args.model], cfg.variables, args.n, cfg.validation_seed)
    payload = _report_payload(report, cfg.variables)
    payload["model"] = args.model
    payload["n"] = args.n
    payload["seed"] = cfg.validation_seed
    path = out / f"mc_{args.model}_n{args.n}.json"
    path.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, out = _load(args)
        if args.command == "sobol":
            return cmd_sobol(cfg, out, args)
        if args.command == "converge":
            return cmd_converge(cfg, out)
        if args.command == "decay":
            return cmd_decay(cfg, out, args)
        return cmd_mc_check(cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        print(f"model evaluation error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except ZeroVarianceError as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
