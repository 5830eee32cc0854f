"""Polynomial chaos expansions via pseudo-spectral projection on sparse grids.

An :class:`Expansion` maps multi-indices (per-dimension polynomial degrees)
to coefficients, with the basis norms ``E[Psi^2]`` tracked alongside the
unnormalized coefficients. Coefficients are computed subspace-wise: each
tensor term of the Smolyak combination contributes its own tensor-product
pseudo-spectral coefficients, capped at the degree the term's Gauss rules
integrate exactly, and the signed combination of these partial tables is the
sparse expansion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from math import prod

import numpy as np

from .orthopoly import VariableSpec, eval_poly_table, gauss_rule, norm_sq
from .sparse_grid import (
    MultiIndex,
    compositions,
    growth,
    level_terms,
    smolyak_grid,
    tensor_grid,
)


@dataclass(frozen=True)
class Expansion:
    """A PCE: coefficient and basis-norm tables over a multi-index set."""

    specs: tuple[VariableSpec, ...]
    terms: dict[MultiIndex, float] = field(repr=False)
    norms: dict[MultiIndex, float] = field(repr=False)
    provenance: str = "HF"  # HF | LF | Correction | Combined

    @property
    def n(self) -> int:
        return len(self.specs)

    def __post_init__(self) -> None:
        zero = (0,) * self.n
        if zero not in self.terms:
            raise ValueError("the zero multi-index must be present")
        missing = set(self.terms) - set(self.norms)
        if missing:
            raise ValueError(f"missing basis norms for {sorted(missing)[:3]}")


def tensor_index_set(p: MultiIndex) -> set[MultiIndex]:
    """All degrees with ``phi_j <= p_j``; cardinality ``prod(p_j + 1)``."""
    return set(product(*(range(pj + 1) for pj in p)))


def total_order_index_set(n: int, p: int) -> set[MultiIndex]:
    """All degrees with ``|phi| <= p``; cardinality ``(n+p)! / (n! p!)``."""
    out: set[MultiIndex] = set()
    for total in range(p + 1):
        out.update(compositions(n, total))
    return out


def sparse_index_set(n: int, w: int) -> set[MultiIndex]:
    """Union over admissible levels of the degree boxes each level's rule
    integrates without noise (``phi_j <= growth(l_j) - 1``)."""
    out: set[MultiIndex] = set()
    for levels in compositions(n, w):
        out.update(product(*(range(growth(l)) for l in levels)))
    return out


def basis_norms(specs, indices) -> dict[MultiIndex, float]:
    return {
        phi: prod(norm_sq(spec.family, d) for spec, d in zip(specs, phi))
        for phi in indices
    }


def project(grid_values, w: int, specs, provenance: str = "HF") -> Expansion:
    """Spectral projection of model values sampled on ``smolyak_grid``.

    ``grid_values`` must be aligned with the canonical node order of
    ``smolyak_grid(len(specs), w, specs)``.
    """
    specs = tuple(specs)
    n = len(specs)
    grid = smolyak_grid(n, w, specs)
    values = np.asarray(grid_values, dtype=float)
    if values.shape != (len(grid),):
        raise ValueError(
            f"expected {len(grid)} grid values for (n={n}, w={w}), got {values.shape}"
        )
    value_of = dict(zip(grid.keys, values))

    terms: dict[MultiIndex, float] = {phi: 0.0 for phi in sparse_index_set(n, w)}
    # Fixed (sorted) term order keeps the accumulation bitwise reproducible.
    for term in sorted(level_terms(n, w), key=lambda t: t.levels):
        rules = [gauss_rule(spec.family, growth(l)) for spec, l in zip(specs, term.levels)]
        shape = tuple(len(r) for r in rules)
        sub = tensor_grid(term.levels, specs)
        f = np.array([value_of[k] for k in sub.keys]).reshape(shape)
        # Contract one dimension at a time with B[d, p] = Psi_d(x_p) * w_p;
        # after n contractions the axes are the per-dimension degrees.
        coeffs = f
        for rule, spec in zip(rules, specs):
            table = eval_poly_table(spec.family, len(rule) - 1, rule.points)
            coeffs = np.tensordot(coeffs, table * rule.weights, axes=([0], [1]))
        norm_tensor = np.ones(())
        for j, m in enumerate(shape):
            axis = np.array([norm_sq(specs[j].family, d) for d in range(m)])
            norm_tensor = np.multiply.outer(norm_tensor, axis)
        flat = (coeffs / norm_tensor).ravel()
        for i, phi in enumerate(product(*(range(m) for m in shape))):
            terms[phi] += term.coeff * flat[i]

    return Expansion(
        specs=specs,
        terms=terms,
        norms=basis_norms(specs, terms),
        provenance=provenance,
    )


def evaluate_batch(e: Expansion, xi_physical) -> np.ndarray:
    """Evaluate the expansion at rows of physical-coordinate points."""
    X = np.atleast_2d(np.asarray(xi_physical, dtype=float))
    if X.shape[1] != e.n:
        raise ValueError(f"expected {e.n}-dimensional points, got {X.shape[1]}")
    phis = np.array(sorted(e.terms), dtype=int)
    coeffs = np.array([e.terms[tuple(phi)] for phi in phis])
    std = np.column_stack([spec.to_standard(X[:, j]) for j, spec in enumerate(e.specs)])

    out = np.empty(len(X))
    chunk = max(1, int(2e7) // max(1, len(phis)))
    for start in range(0, len(X), chunk):
        stop = min(start + chunk, len(X))
        block = np.ones((len(phis), stop - start))
        for j, spec in enumerate(e.specs):
            table = eval_poly_table(spec.family, int(phis[:, j].max()), std[start:stop, j])
            block *= table[phis[:, j], :]
        out[start:stop] = coeffs @ block
    return out


def evaluate(e: Expansion, xi_physical) -> float:
    """Evaluate the expansion at a single physical-coordinate point."""
    return float(evaluate_batch(e, np.asarray(xi_physical, dtype=float)[None, :])[0])


def mean(e: Expansion) -> float:
    """The expansion mean is the constant-term coefficient."""
    return e.terms[(0,) * e.n]


def variance(e: Expansion) -> float:
    """Sum of squared non-constant coefficients weighted by basis norms."""
    zero = (0,) * e.n
    return sum(c * c * e.norms[phi] for phi, c in e.terms.items() if phi != zero)
