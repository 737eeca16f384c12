import math

import numpy as np
import pytest

from gridcast._kernels import (
    DENSE_CELL_CAP,
    HAVE_COMPILED,
    PureGridAccumulator,
    WaveAccumulator,
    backend_name,
    make_accumulator,
)
from gridcast.errors import ConfigError, DomainError
from oracles import (
    brute_node_scores,
    brute_score,
    check_root_contract,
    leftmost_root,
    scan_cosine_root,
)

needs_compiled = pytest.mark.skipif(not HAVE_COMPILED, reason="extension not built")


def random_history(rng, dim, n):
    hist = []
    for _ in range(n):
        p = float(rng.random())
        x = tuple(float(v) for v in rng.random(dim))
        s = float(rng.random())
        hist.append((p, x, s))
    return hist


def test_make_accumulator_selection():
    assert make_accumulator(5, 1, kind="cosine").kind == "cosine"
    pure = make_accumulator(5, 1, force_pure=True)
    assert isinstance(pure, PureGridAccumulator)
    with pytest.raises(ConfigError):
        make_accumulator(5, 1, kind="fourier")
    if HAVE_COMPILED:
        assert backend_name() == "compiled"
        assert not isinstance(make_accumulator(5, 1), PureGridAccumulator)
        # picks the sparse path once the dense table would not fit
        big = int(DENSE_CELL_CAP ** 0.5) + 2
        assert isinstance(make_accumulator(big, 1), PureGridAccumulator)


def test_signal_arity_guard():
    for acc in (make_accumulator(4, 1), PureGridAccumulator(4, 1)):
        with pytest.raises(DomainError):
            acc.update(0.3, (), 1.0)
        with pytest.raises(DomainError):
            acc.score(0.3, (0.1, 0.2))


def test_pure_score_matches_brute_force():
    rng = np.random.default_rng(11)
    for size in (2, 5, 10):
        for dim in (0, 1, 2):
            acc = PureGridAccumulator(size, dim)
            hist = random_history(rng, dim, 30)
            for p, x, s in hist:
                acc.update(p, x, s)
            for _ in range(10):
                q = float(rng.random())
                xs = tuple(float(v) for v in rng.random(dim))
                assert abs(acc.score(q, xs) - brute_score(hist, q, xs, size)) < 1e-9


def test_pure_solve_satisfies_root_contract():
    rng = np.random.default_rng(12)
    for trial in range(30):
        size = int(rng.integers(2, 9))
        dim = int(rng.integers(0, 2))
        acc = PureGridAccumulator(size, dim)
        hist = random_history(rng, dim, int(rng.integers(1, 40)))
        for p, x, s in hist:
            acc.update(p, x, s)
        xs = tuple(float(v) for v in rng.random(dim))
        root = acc.solve(xs)
        ng = brute_node_scores(hist, xs, size)
        reason = check_root_contract(ng, size, root)
        assert reason is None, reason
        oracle = leftmost_root(ng, size)
        if abs(root - oracle) > 1e-6:
            # legitimate only when the score is degenerate near zero there
            assert abs(brute_score(hist, root, xs, size)) <= 1e-9


def test_empty_table_solves_to_zero():
    acc = PureGridAccumulator(5, 0)
    assert acc.solve(()) == 0.0  # all-zero node scores, leftmost zero node
    assert acc.score(0.37, ()) == 0.0
    assert acc.energy() == 0.0


def test_update_skips_upper_block_on_nodes():
    # updating exactly on a node touches one p-slice only
    acc = PureGridAccumulator(4, 0)
    acc.update(0.5, (), 1.0)
    assert dict(acc.cell_items()) == {(2,): 0.5}


@needs_compiled
def test_backends_bit_identical():
    from gridcast._kernels import _core

    rng = np.random.default_rng(7)
    for trial in range(60):
        size = int(rng.integers(2, 12))
        dim = int(rng.integers(0, 3))
        comp = _core.GridAccumulator(size, dim)
        pure = PureGridAccumulator(size, dim)
        for p, x, s in random_history(rng, dim, int(rng.integers(1, 50))):
            r = s * 2 - 1
            comp.update(p, x, r)
            pure.update(p, x, r)
        for _ in range(12):
            q = float(rng.random())
            xs = tuple(float(v) for v in rng.random(dim))
            assert comp.score(q, xs) == pure.score(q, xs)
            assert comp.node_scores(xs) == pure.node_scores(xs)
            assert comp.solve(xs) == pure.solve(xs)
        assert dict(comp.cell_items()) == dict(pure.cell_items())
        assert comp.energy() == pure.energy()


def test_wave_accumulator_against_scan():
    rng = np.random.default_rng(13)
    for trial in range(25):
        acc = WaveAccumulator(10, 0)
        for _ in range(int(rng.integers(1, 60))):
            p = float(rng.random())
            acc.update(p, (), float(rng.random()))
        root = acc.solve(())
        want = scan_cosine_root(acc.a, acc.b)
        assert abs(root - want) < 1e-9
        # score formula
        q = float(rng.random())
        want_score = acc.a * math.cos(math.pi * q) + acc.b * math.sin(math.pi * q)
        assert acc.score(q, ()) == want_score


def test_wave_accumulator_empty_is_half():
    acc = WaveAccumulator(10, 0)
    assert acc.solve(()) == 0.5
    assert acc.energy() == 0.0
    assert list(acc.cell_items()) == []
