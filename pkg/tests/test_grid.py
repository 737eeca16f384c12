import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridcast.errors import DomainError
from gridcast.grid import (
    ForecastPoint,
    PartitionGrid,
    cell_parts,
    joint_weights,
    kernel_eval,
    randomize_point,
    rounding_weights,
)
from oracles import exact_joint, exact_weights, overlap

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
sizes = st.integers(min_value=1, max_value=60)


def test_partition_grid_basics():
    g = PartitionGrid(4)
    assert g.delta == 0.25
    assert g.node_count == 5
    assert g.endpoints == (0.0, 0.25, 0.5, 0.75, 1.0)
    assert g.endpoint(3) == 0.75
    with pytest.raises(Exception):
        PartitionGrid(0)


def test_cell_parts_edges():
    assert cell_parts(0.0, 4) == (0, 0, 0.0)
    assert cell_parts(1.0, 4) == (4, 4, 0.0)
    assert cell_parts(0.5, 4) == (2, 2, 0.0)
    lo, hi, frac = cell_parts(0.3, 4)
    assert (lo, hi) == (1, 2)
    assert frac == 0.3 * 4 - 1


@given(unit, sizes)
@settings(max_examples=300)
def test_cell_parts_reconstructs_value(v, size):
    lo, hi, frac = cell_parts(v, size)
    assert 0 <= lo <= hi <= size
    assert hi - lo in (0, 1)
    assert 0.0 <= frac < 1.0
    # the two-endpoint mixture puts the mean back on the value
    mean = ((1.0 - frac) * lo + frac * hi) / size
    assert math.isclose(mean, v, rel_tol=0, abs_tol=1e-12)


@given(unit, sizes)
@settings(max_examples=300)
def test_rounding_weights_match_exact_oracle(v, size):
    w = rounding_weights(v, PartitionGrid(size))
    got = {idx: wt for idx, _, wt in w.support()}
    want = {i: float(f) for i, f in exact_weights(v, size).items()}
    for i in set(got) | set(want):
        assert abs(got.get(i, 0.0) - want.get(i, 0.0)) < 1e-9


def test_rounding_weights_worked_case():
    w = rounding_weights(0.3, PartitionGrid(4))
    d = w.as_dict()
    assert set(d) == {0.25, 0.5}
    assert abs(d[0.25] - 0.8) < 1e-12
    assert abs(d[0.5] - 0.2) < 1e-12
    assert w.lower_weight + w.upper_weight == 1.0
    assert abs(w.mean - 0.3) < 1e-15


def test_rounding_weights_on_node_is_point_mass():
    w = rounding_weights(0.5, PartitionGrid(2))
    assert w.as_dict() == {0.5: 1.0}
    assert w.variance == 0.0


@given(unit, sizes)
@settings(max_examples=300)
def test_rounding_weights_variance_bound(v, size):
    w = rounding_weights(v, PartitionGrid(size))
    delta = 1.0 / size
    assert w.variance <= delta * delta / 4.0 + 1e-15
    assert abs(w.mean - v) < 1e-12


def test_rounding_weights_domain():
    with pytest.raises(DomainError):
        rounding_weights(-0.01, PartitionGrid(4))
    with pytest.raises(DomainError):
        rounding_weights(1.01, PartitionGrid(4))


@given(unit, st.lists(unit, min_size=0, max_size=2), st.sampled_from([2, 5, 10]))
@settings(max_examples=200)
def test_joint_weights_match_exact_oracle(p, xs, size):
    q = ForecastPoint(p, tuple(xs))
    got = joint_weights(q, PartitionGrid(size))
    want = exact_joint(p, tuple(xs), size)
    assert abs(sum(got.values()) - 1.0) < 1e-12
    for cell in set(got) | set(want):
        assert abs(got.get(cell, 0.0) - float(want.get(cell, 0))) < 1e-9


def test_joint_weights_worked_case():
    got = joint_weights(ForecastPoint(0.3, (0.6,)), PartitionGrid(4))
    want = {(1, 2): 0.48, (1, 3): 0.32, (2, 2): 0.12, (2, 3): 0.08}
    assert set(got) == set(want)
    for cell, w in want.items():
        assert abs(got[cell] - w) < 1e-12


@given(unit, unit, st.sampled_from([2, 5, 10]))
@settings(max_examples=200)
def test_grid_kernel_matches_oracle(p1, p2, size):
    g = PartitionGrid(size)
    got = kernel_eval(ForecastPoint(p1, ()), ForecastPoint(p2, ()), g, mode="grid")
    want = overlap(p1, (), p2, (), size)
    assert abs(got - want) < 1e-9
    assert got >= 0.0


def test_grid_kernel_disjoint_supports_is_zero():
    g = PartitionGrid(10)
    assert kernel_eval(ForecastPoint(0.1, ()), ForecastPoint(0.9, ()), g) == 0.0


def test_cosine_kernel_formula():
    g = PartitionGrid(10)
    got = kernel_eval(ForecastPoint(0.3, ()), ForecastPoint(0.7, ()), g, mode="cosine")
    assert abs(got - math.cos(math.pi * (0.3 - 0.7))) < 1e-15


def test_randomize_point_consumes_one_uniform_per_coordinate():
    g = PartitionGrid(4)
    q = ForecastPoint(0.3, (0.6, 0.1))

    class Counter:
        def __init__(self, vals):
            self.vals = list(vals)

        def random(self):
            return self.vals.pop(0)

    counter = Counter([0.9, 0.1, 0.5])
    p, x = randomize_point(q, g, counter)
    assert counter.vals == []
    # u < frac picks the upper endpoint; frac(0.3*4)=0.2, frac(0.6*4)=0.4
    assert p == 0.25  # 0.9 >= 0.2
    assert x[0] == 0.75  # 0.1 < 0.4


def test_randomize_point_unbiased():
    g = PartitionGrid(10)
    rng = np.random.default_rng(0)
    q = ForecastPoint(0.77, (0.13,))
    draws = np.array([randomize_point(q, g, rng)[0] for _ in range(20000)])
    se = math.sqrt(q.p * (1 - q.p) / len(draws))
    assert abs(draws.mean() - 0.77) < 4 * max(se, g.delta / 2 / math.sqrt(len(draws)))
    assert set(np.unique(draws)) <= {0.7, 0.8}
