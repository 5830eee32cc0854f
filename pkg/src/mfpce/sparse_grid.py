"""Isotropic Smolyak sparse grids with the 2m+1 growth rule.

Levels are counted from zero. A grid at level ``w`` in ``n`` dimensions is a
signed combination of small tensor-product Gauss grids; nodes recurring in
several tensor terms are deduplicated with their weights accumulated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from math import comb

import numpy as np

from .orthopoly import GaussRule, VariableSpec, gauss_rule

MultiIndex = tuple[int, ...]

#: Number of decimals kept when hashing node coordinates. Gauss rules under
#: the 2m+1 growth share only the center node exactly; anything closer than
#: this tolerance is treated as the same node.
NODE_DECIMALS = 12


@dataclass(frozen=True)
class LevelTerm:
    levels: MultiIndex
    coeff: int


@dataclass(frozen=True)
class QuadratureGrid:
    """Deduplicated node/weight set in standard coordinates."""

    nodes: np.ndarray = field(repr=False)  # shape (N, n)
    weights: np.ndarray = field(repr=False)  # shape (N,)
    keys: tuple[MultiIndex, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def ndim(self) -> int:
        return self.nodes.shape[1]


def growth(level: int) -> int:
    """Points of the 1D rule at a sparse level: 1, 3, 7, 15, ..."""
    if level < 0:
        raise ValueError("level must be non-negative")
    return 2 ** (level + 1) - 1


def node_key(coords) -> tuple[float, ...]:
    """Canonical rounded key for node deduplication."""
    return tuple(round(c, NODE_DECIMALS) + 0.0 for c in coords)


def compositions(n: int, total: int):
    """All n-tuples of non-negative integers summing to ``total``."""
    if n == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in compositions(n - 1, total - head):
            yield (head,) + rest


def level_terms(n: int, w: int) -> list[LevelTerm]:
    """Smolyak combination: levels with ``w - n + 1 <= |l| <= w`` and their
    signed binomial coefficients. The coefficients always sum to one."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if w < 0:
        raise ValueError("w must be non-negative")
    terms = []
    for total in range(max(0, w - n + 1), w + 1):
        coeff = (-1) ** (w - total) * comb(n - 1, w - total)
        for levels in compositions(n, total):
            terms.append(LevelTerm(levels=levels, coeff=coeff))
    return terms


def _rules_for(levels: MultiIndex, specs: list[VariableSpec]) -> list[GaussRule]:
    return [gauss_rule(spec.family, growth(l)) for l, spec in zip(levels, specs)]


def tensor_grid(levels: MultiIndex, specs: list[VariableSpec]) -> QuadratureGrid:
    """Cartesian product of the per-dimension Gauss rules."""
    if len(levels) != len(specs):
        raise ValueError("levels must have one entry per variable")
    rules = _rules_for(levels, specs)
    point_axes = [r.points for r in rules]
    mesh = np.meshgrid(*point_axes, indexing="ij")
    nodes = np.column_stack([m.ravel() for m in mesh])
    weights = np.ones(1)
    for r in rules:
        weights = np.outer(weights, r.weights).ravel()
    keys = tuple(node_key(row) for row in nodes)
    return QuadratureGrid(nodes=nodes, weights=weights, keys=keys)


def smolyak_grid(n: int, w: int, specs: list[VariableSpec]) -> QuadratureGrid:
    """Union of the combination's tensor grids with accumulated weights.

    Nodes are returned in a canonical order (sorted by rounded key), so the
    grid is deterministic for a given (n, w, specs).
    """
    if len(specs) != n:
        raise ValueError(f"expected {n} variable specs, got {len(specs)}")
    acc: dict[tuple[float, ...], float] = {}
    coords: dict[tuple[float, ...], np.ndarray] = {}
    for term in level_terms(n, w):
        grid = tensor_grid(term.levels, specs)
        for key, node, wgt in zip(grid.keys, grid.nodes, grid.weights):
            if key in acc:
                acc[key] += term.coeff * wgt
            else:
                acc[key] = term.coeff * wgt
                coords[key] = node
    keys = sorted(acc)
    nodes = np.array([coords[k] for k in keys])
    weights = np.array([acc[k] for k in keys])
    return QuadratureGrid(nodes=nodes, weights=weights, keys=tuple(keys))
