"""Evaluation apparatus: similarity/prediction metrics, Sobol error metrics,
analytic Ishigami references, convergence sweeps, cost accounting, and
coefficient-decay reports.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .mf import MfConfig, build_mf_parts, physical_nodes
from .models import EvalCache, Model
from .pce import Expansion, evaluate_batch, mean, project, variance
from .sobol import SobolReport, ZeroVarianceError, all_indices
from .sparse_grid import smolyak_grid

log = logging.getLogger(__name__)

#: Observations with |reference| below this are skipped in MARE sums; the
#: short-column response crosses zero, where a pointwise relative error is
#: ill-defined.
_MARE_FLOOR = 1e-300


def _mare(y_num, y_den) -> tuple[float, int]:
    keep = np.abs(y_den) >= _MARE_FLOOR
    skipped = int((~keep).sum())
    if skipped:
        log.info("MARE: skipped %d observations with near-zero reference", skipped)
    value = float(np.mean(np.abs((y_num[keep] - y_den[keep]) / y_den[keep])))
    return value, skipped


def _r2(y_ref, y_other) -> float:
    y_ref = np.asarray(y_ref, dtype=float)
    y_other = np.asarray(y_other, dtype=float)
    dr = y_ref - y_ref.mean()
    do = y_other - y_other.mean()
    denom = math.sqrt(float(dr @ dr)) * math.sqrt(float(do @ do))
    if denom == 0.0:
        raise ZeroVarianceError("correlation undefined: a sample set is constant")
    return float((dr @ do) / denom) ** 2


def similarity(y_l, y_h) -> tuple[float, float]:
    """Squared correlation and mean absolute relative error of LF vs HF."""
    y_l = np.asarray(y_l, dtype=float)
    y_h = np.asarray(y_h, dtype=float)
    if y_l.shape != y_h.shape or y_l.size < 2:
        raise ValueError("need two equal-length sample sets of size >= 2")
    mare, _ = _mare(y_l, y_h)
    return _r2(y_h, y_l), mare


def prediction_error(y_true, y_pred) -> tuple[float, float]:
    """Surrogate accuracy: squared correlation and MARE of the prediction."""
    return similarity(y_pred, y_true)


def sobol_errors(report: SobolReport, reference: SobolReport) -> tuple[float, float]:
    """Summed absolute index errors over all subsets (e) and totals (e_T).

    Subsets absent from either report read as zero.
    """
    if report.n != reference.n:
        raise ValueError(f"dimension mismatch: {report.n} vs {reference.n}")
    subsets = set(report.subset_indices) | set(reference.subset_indices)
    e = sum(
        abs(report.subset_indices.get(s, 0.0) - reference.subset_indices.get(s, 0.0))
        for s in subsets
    )
    e_t = sum(
        abs(a - b) for a, b in zip(report.total_indices, reference.total_indices)
    )
    return float(e), float(e_t)


def ishigami_analytic(a: float, b: float) -> SobolReport:
    """Closed-form variance decomposition of the Ishigami family."""
    pi4 = math.pi**4
    pi8 = math.pi**8
    d = a * a / 8.0 + b * pi4 / 5.0 + b * b * pi8 / 18.0 + 0.5
    d1 = b * pi4 / 5.0 + b * b * pi8 / 50.0 + 0.5
    d2 = a * a / 8.0
    d13 = 8.0 * b * b * pi8 / 225.0
    subsets = {(0,): d1 / d, (1,): d2 / d}
    if d13 > 0:
        subsets[(0, 2)] = d13 / d
    return SobolReport(
        mean=a / 2.0,
        variance=d,
        subset_indices=subsets,
        total_indices=((d1 + d13) / d, d2 / d, d13 / d),
    )


@dataclass(frozen=True)
class SchemeSpec:
    """One PCE scheme of a study: a fidelity mode plus its model bindings."""

    name: str
    kind: str  # "hf" | "lf" | "mf"
    hf: str  # model id used as the truth / correction target
    lf: str | None = None
    q: int = 0
    rt: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("hf", "lf", "mf"):
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.kind in ("lf", "mf") and self.lf is None:
            raise ValueError(f"scheme {self.name!r} needs an lf model")
        if self.q < 0:
            raise ValueError("q must be non-negative")
        if self.rt is not None and not 0.0 < self.rt <= 1.0:
            raise ValueError("rt must lie in (0, 1]")

    def label(self, w: int) -> str:
        if self.kind == "mf":
            return f"{self.name}:SG-{w - self.q}-{w}"
        return f"{self.name}:SG-{w}"


@dataclass(frozen=True)
class ConvergenceRow:
    scheme: str
    w: int
    q: int
    n_hf: int
    n_lf: int
    n_e: int
    n_tot: float
    mare: float
    r2: float
    e: float
    e_t: float
    mean: float
    std: float


@dataclass(frozen=True)
class BuiltScheme:
    """Expansions and evaluation counts of one (scheme, level) cell."""

    expansion: Expansion
    lf_expansion: Expansion | None
    correction: Expansion | None
    n_hf: int
    n_lf: int


def build_scheme(
    scheme: SchemeSpec,
    w: int,
    specs,
    models: dict[str, Model],
    cache: EvalCache | None = None,
) -> BuiltScheme:
    """Build the expansion a scheme prescribes at sparse level ``w``."""
    cache = cache if cache is not None else EvalCache()
    specs = tuple(specs)
    n = len(specs)
    if scheme.kind == "mf":
        parts = build_mf_parts(
            models[scheme.lf], models[scheme.hf], specs, MfConfig(w=w, q=scheme.q), cache
        )
        return BuiltScheme(
            expansion=parts.combined,
            lf_expansion=parts.lf,
            correction=parts.correction,
            n_hf=parts.n_hf,
            n_lf=parts.n_lf,
        )
    model = models[scheme.hf if scheme.kind == "hf" else scheme.lf]
    grid = smolyak_grid(n, w, specs)
    values = cache.evaluate_many(model, physical_nodes(grid, specs))
    exp = project(values, w, specs, provenance=scheme.kind.upper())
    count = cache.count(model.id)
    if scheme.kind == "hf":
        return BuiltScheme(exp, None, None, n_hf=count, n_lf=0)
    return BuiltScheme(exp, None, None, n_hf=0, n_lf=count)


def run_convergence(cfg) -> list[ConvergenceRow]:
    """One row per (scheme, level), in config order, deterministically.

    ``cfg`` is a :class:`mfpce.config.StudyConfig`. The reference report is
    built once; each cell gets a fresh cache so its counters reflect only
    that build. MF rows are emitted only for levels with ``w >= q``.
    """
    from .config import build_reference  # local import to avoid a cycle

    models = cfg.resolved_models()
    reference = build_reference(cfg, models)
    rng = np.random.Generator(np.random.Philox(key=cfg.validation_seed))
    X_val = np.column_stack([s.sample(rng, cfg.validation_count) for s in cfg.variables])
    y_true: dict[str, np.ndarray] = {}

    rows = []
    for scheme in cfg.schemes:
        truth_id = scheme.hf
        if truth_id not in y_true:
            y_true[truth_id] = models[truth_id].batch(X_val)
        for w in range(cfg.level_min, cfg.level_max + 1):
            if scheme.kind == "mf" and w < scheme.q:
                continue
            built = build_scheme(scheme, w, cfg.variables, models)
            y_pred = evaluate_batch(built.expansion, X_val)
            r2, mare = prediction_error(y_true[truth_id], y_pred)
            e, e_t = sobol_errors(all_indices(built.expansion), reference)
            n_e = built.n_hf if scheme.kind != "lf" else built.n_lf
            if scheme.rt is not None:
                n_tot = built.n_hf + scheme.rt * built.n_lf
            else:
                n_tot = float(n_e)
            rows.append(
                ConvergenceRow(
                    scheme=scheme.name,
                    w=w,
                    q=scheme.q if scheme.kind == "mf" else 0,
                    n_hf=built.n_hf,
                    n_lf=built.n_lf,
                    n_e=n_e,
                    n_tot=n_tot,
                    mare=mare,
                    r2=r2,
                    e=e,
                    e_t=e_t,
                    mean=mean(built.expansion),
                    std=math.sqrt(max(variance(built.expansion), 0.0)),
                )
            )
    return rows


def decay_report(expansions) -> list[tuple[str, int, float]]:
    """(provenance, rank, |coefficient|) rows, each spectrum sorted by
    descending magnitude."""
    expansions = list(expansions)
    if not expansions:
        raise ValueError("need at least one expansion")
    rows = []
    for exp in expansions:
        spectrum = sorted((abs(c) for c in exp.terms.values()), reverse=True)
        rows.extend((exp.provenance, rank, mag) for rank, mag in enumerate(spectrum, 1))
    return rows


def write_convergence_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write("scheme,w,q,n_hf,n_lf,n_e,n_tot,mare,r2,e,e_t,mean,std\n")
        for r in rows:
            fh.write(
                f"{r.scheme},{r.w},{r.q},{r.n_hf},{r.n_lf},{r.n_e},"
                f"{r.n_tot:.12g},{r.mare:.12g},{r.r2:.12g},{r.e:.12g},"
                f"{r.e_t:.12g},{r.mean:.12g},{r.std:.12g}\n"
            )


def write_decay_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write("provenance,rank,abs_coeff\n")
        for provenance, rank, mag in rows:
            fh.write(f"{provenance},{rank},{mag:.12g}\n")
