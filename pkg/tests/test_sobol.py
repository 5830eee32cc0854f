import math

import numpy as np
import pytest

from mfpce.models import Model, builtin_model
from mfpce.orthopoly import Uniform, VariableSpec
from mfpce.pce import Expansion, basis_norms
from mfpce.sobol import (
    SobolReport,
    ZeroVarianceError,
    all_indices,
    mc_sobol,
    subset_index,
    total_indices,
)
from mfpce.sparse_grid import smolyak_grid
from mfpce.pce import project


def hand_expansion(unit_uniform_specs):
    """y = 2 + 3*x1 + 4*x2 + 6*x1*x2 on U[-1,1]^2, exact by construction."""
    terms = {(0, 0): 2.0, (1, 0): 3.0, (0, 1): 4.0, (1, 1): 6.0}
    return Expansion(
        specs=unit_uniform_specs,
        terms=terms,
        norms=basis_norms(unit_uniform_specs, terms),
    )


class TestFromExpansion:
    def test_hand_computed_partition(self, unit_uniform_specs):
        e = hand_expansion(unit_uniform_specs)
        # partial variances: 9/3, 16/3, 36/9
        d = 9 / 3 + 16 / 3 + 36 / 9
        assert subset_index(e, (0,)) == pytest.approx(3.0 / d)
        assert subset_index(e, (1,)) == pytest.approx((16 / 3) / d)
        assert subset_index(e, (0, 1)) == pytest.approx(4.0 / d)
        totals = total_indices(e)
        assert totals[0] == pytest.approx((3.0 + 4.0) / d)
        assert totals[1] == pytest.approx((16 / 3 + 4.0) / d)

    def test_subset_order_is_irrelevant(self, unit_uniform_specs):
        e = hand_expansion(unit_uniform_specs)
        assert subset_index(e, (1, 0)) == subset_index(e, (0, 1))

    def test_empty_subset_rejected(self, unit_uniform_specs):
        with pytest.raises(ValueError):
            subset_index(hand_expansion(unit_uniform_specs), ())

    def test_report_fields(self, unit_uniform_specs):
        report = all_indices(hand_expansion(unit_uniform_specs))
        assert report.n == 2
        assert report.mean == pytest.approx(2.0)
        assert report.variance == pytest.approx(9 / 3 + 16 / 3 + 4.0)
        assert report.first_order(0) == pytest.approx(subset_index(hand_expansion(unit_uniform_specs), (0,)))
        assert report.first_order(5) == 0.0

    def test_subset_indices_sum_to_one(self, ishigami_range_specs):
        model = builtin_model("ishigami", "hf")
        grid = smolyak_grid(3, 4, list(ishigami_range_specs))
        nodes = np.column_stack(
            [
                spec.from_standard(grid.nodes[:, j])
                for j, spec in enumerate(ishigami_range_specs)
            ]
        )
        report = all_indices(project(model.batch(nodes), 4, ishigami_range_specs))
        assert sum(report.subset_indices.values()) == pytest.approx(1.0, abs=1e-9)
        # totals dominate the union of first-order shares
        for i in range(3):
            covering = sum(
                v for s, v in report.subset_indices.items() if i in s
            )
            assert report.total_indices[i] == pytest.approx(covering, abs=1e-12)

    def test_constant_expansion_raises(self, unit_uniform_specs):
        e = Expansion(
            specs=unit_uniform_specs,
            terms={(0, 0): 1.0},
            norms={(0, 0): 1.0},
        )
        for fn in (lambda: subset_index(e, (0,)), lambda: total_indices(e), lambda: all_indices(e)):
            with pytest.raises(ZeroVarianceError):
                fn()


class TestMonteCarlo:
    def _linear_model(self):
        return Model(
            id="linear", fidelity="hf", fn=lambda X: X.sum(axis=1)
        )

    def test_additive_model_indices(self):
        specs = [VariableSpec(f"x{i}", Uniform(-1.0, 1.0)) for i in range(3)]
        report = mc_sobol(self._linear_model(), specs, 65536, seed=7)
        for i in range(3):
            assert report.first_order(i) == pytest.approx(
                1 / 3, abs=3 * report.first_order_se[i] + 1e-3
            )
            assert report.total_indices[i] == pytest.approx(
                1 / 3, abs=3 * report.total_se[i] + 1e-3
            )
        assert report.mean == pytest.approx(0.0, abs=0.02)
        assert report.variance == pytest.approx(1.0, abs=0.02)

    def test_deterministic_for_fixed_seed(self):
        specs = [VariableSpec(f"x{i}", Uniform(0.0, 1.0)) for i in range(2)]
        a = mc_sobol(self._linear_model(), specs, 4096, seed=11)
        b = mc_sobol(self._linear_model(), specs, 4096, seed=11)
        assert a.subset_indices == b.subset_indices
        assert a.total_indices == b.total_indices

    def test_seed_changes_the_stream(self):
        specs = [VariableSpec(f"x{i}", Uniform(0.0, 1.0)) for i in range(2)]
        a = mc_sobol(self._linear_model(), specs, 4096, seed=11)
        b = mc_sobol(self._linear_model(), specs, 4096, seed=12)
        assert a.subset_indices != b.subset_indices

    def test_constant_model_raises(self):
        specs = [VariableSpec("x", Uniform(0.0, 1.0))]
        const = Model(id="const", fidelity="hf", fn=lambda X: np.ones(len(X)))
        with pytest.raises(ZeroVarianceError):
            mc_sobol(const, specs, 1024, seed=1)

    def test_small_sample_rejected(self):
        specs = [VariableSpec("x", Uniform(0.0, 1.0))]
        with pytest.raises(ValueError):
            mc_sobol(self._linear_model(), specs, 1, seed=1)
