import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irsradar.linalg import hermitian_extreme_eigs, is_unimodular
from irsradar.uqp import (
    UqpProblem,
    diagonal_load,
    dominant_phase_start,
    pmli_step,
    quadratic_form,
    solve,
)
from irsradar.validation import random_unimodular


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    a = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    return a @ a.conj().T


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


class TestDiagonalLoad:
    def test_example(self):
        loaded, shift = diagonal_load(np.diag([1.0, -3.0]))
        assert shift == pytest.approx(3.0, rel=1e-8)
        assert shift > 3.0
        lo, _ = hermitian_extreme_eigs(loaded)
        assert lo >= 0

    def test_psd_untouched(self, rng):
        g = random_psd(rng, 5)
        loaded, shift = diagonal_load(g)
        assert shift == 0.0
        np.testing.assert_allclose(loaded, g)

    def test_objective_offset(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 10))
            g = random_hermitian(rng, n)
            loaded, shift = diagonal_load(g)
            s = random_unimodular(rng, n)
            assert quadratic_form(loaded, s) == pytest.approx(quadratic_form(g, s) + shift * n, rel=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            diagonal_load(np.array([[0, 1], [0, 0]], dtype=complex))


class TestPmliStep:
    def test_identity_is_fixed(self, rng):
        s = random_unimodular(rng, 7)
        np.testing.assert_array_equal(pmli_step(np.eye(7), s), s)

    def test_rank_one_reaches_optimum(self, rng):
        u = random_unimodular(rng, 6)
        g = np.outer(u, u.conj())
        s = pmli_step(g, random_unimodular(rng, 6))
        # rank one: optimum is u up to a global phase, value n^2
        assert quadratic_form(g, s) == pytest.approx(36.0, rel=1e-12)

    def test_unimodular_output(self, rng):
        assert is_unimodular(pmli_step(random_psd(rng, 9), random_unimodular(rng, 9)))


class TestSolve:
    def test_identity(self, rng):
        s0 = random_unimodular(rng, 5)
        res = solve(UqpProblem(np.eye(5), s0))
        np.testing.assert_array_equal(res.solution, s0)
        assert res.objective == pytest.approx(5.0)
        assert res.iterations_used == 3  # three stalled steps then stop

    def test_trace_starts_at_initial(self, rng):
        g = random_psd(rng, 6)
        s0 = random_unimodular(rng, 6)
        res = solve(UqpProblem(g, s0, max_iterations=5, stall_tolerance=-np.inf))
        assert res.objective_trace[0] == pytest.approx(quadratic_form(g, s0))
        assert len(res.objective_trace) == 6

    def test_zero_iterations(self, rng):
        s0 = random_unimodular(rng, 4)
        res = solve(UqpProblem(random_psd(rng, 4), s0, max_iterations=0))
        np.testing.assert_array_equal(res.solution, s0)
        assert res.iterations_used == 0

    def test_monotone(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 65))
            g = random_psd(rng, n, rank=int(rng.integers(1, n + 1)))
            res = solve(UqpProblem(g, random_unimodular(rng, n), max_iterations=40, stall_tolerance=0.0))
            tr = res.objective_trace
            assert np.all(tr[1:] >= tr[:-1] - 1e-10 * np.abs(tr[:-1]))

    def test_indefinite_monotone(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 20))
            g = random_hermitian(rng, n)
            g -= np.trace(g).real / n * np.eye(n)  # traceless, hence indefinite
            res = solve(UqpProblem(g, random_unimodular(rng, n), max_iterations=40))
            assert res.loading_applied > 0
            tr = res.objective_trace
            scale = np.abs(tr).max()
            assert np.all(tr[1:] >= tr[:-1] - 1e-10 * scale)

    def test_loading_offset_invariance(self, rng):
        g = random_psd(rng, 8)
        s0 = random_unimodular(rng, 8)
        shifted = g - 2 * hermitian_extreme_eigs(g)[1] * np.eye(8)
        a = solve(UqpProblem(g, s0, max_iterations=30, stall_tolerance=-np.inf))
        b = solve(UqpProblem(shifted, s0, max_iterations=30, stall_tolerance=-np.inf))
        # both objectives differ by the constant offset times n at every iterate
        offset = -2 * hermitian_extreme_eigs(g)[1] * 8
        np.testing.assert_allclose(b.objective_trace[0], a.objective_trace[0] + offset, rtol=1e-10)
        assert is_unimodular(b.solution)

    def test_quantized_exhaustive(self, rng):
        """PMLI should come within a small gap of the best 4-PSK vector."""
        alphabet = np.exp(1j * np.pi / 2 * np.arange(4))
        wins = 0
        for _ in range(20):
            n = int(rng.integers(2, 6))
            g = random_psd(rng, n)
            best = 0.0
            for tail in itertools.product(alphabet, repeat=n - 1):
                s = np.array((1.0,) + tail)  # global phase is irrelevant
                best = max(best, quadratic_form(g, s))
            res = solve(UqpProblem(g, dominant_phase_start(g), max_iterations=200))
            wins += res.objective >= best * (1 - 1e-9)
        assert wins >= 18

    def test_deterministic(self, rng):
        g = random_psd(rng, 10)
        s0 = random_unimodular(rng, 10)
        a = solve(UqpProblem(g, s0))
        b = solve(UqpProblem(g, s0))
        np.testing.assert_array_equal(a.solution, b.solution)
        np.testing.assert_array_equal(a.objective_trace, b.objective_trace)


class TestProblemValidation:
    def test_not_square(self):
        with pytest.raises(ValueError, match="square"):
            UqpProblem(np.ones((2, 3)), np.ones(2))

    def test_bad_initial(self):
        with pytest.raises(ValueError, match="unimodular"):
            UqpProblem(np.eye(2), np.array([1.0, 0.5]))

    def test_wrong_length(self):
        with pytest.raises(ValueError, match="match"):
            UqpProblem(np.eye(2), np.ones(3))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pmli_never_decreases(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 17))
    g = random_psd(rng, n)
    s = random_unimodular(rng, n)
    for _ in range(10):
        nxt = pmli_step(g, s)
        assert quadratic_form(g, nxt) >= quadratic_form(g, s) * (1 - 1e-12)
        s = nxt
