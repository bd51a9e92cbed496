"""End-to-end acceptance checks, one test per criterion.

The scene-scale criteria (4 through 7, 9) run the full bundled configuration
and take several minutes on a single core.
"""

import logging
import time

import numpy as np
import pytest

from irsradar import experiment as ex
from irsradar.scene import build_channels, draw_reflectivities
from irsradar.uber import run_uber
from irsradar.fisher import fisher_direct
from irsradar.uqp import UqpProblem, dominant_phase_start, solve
from irsradar.validation import (
    _derivative_fd_error,
    _los_fd_error,
    check_form_equivalence,
    check_penalty_expansion,
    check_q_identity,
    check_vec_identities,
    random_unimodular,
)

log = logging.getLogger(__name__)
N_SEEDS = 20


@pytest.fixture(scope="module")
def fig1_spec():
    return ex.load_spec(ex.template_path("fig1"))


@pytest.fixture(scope="module")
def trace_runs():
    """Full-scale UBeR runs at sigma^2 = 0.1 with M = 3, one per seed."""
    spec = ex.load_spec(ex.template_path("fig1b"))
    scene = spec.scene
    ch = build_channels(scene)
    start = time.perf_counter()
    runs = [run_uber(scene, ch, draw_reflectivities(scene.n_irs, s), spec.uber, seed=s)
            for s in range(N_SEEDS)]
    return runs, time.perf_counter() - start


@pytest.fixture(scope="module")
def fig1_csv(fig1_spec):
    rows = ex.run_spec(fig1_spec)
    return rows, ex.format_csv(rows)


def test_criterion_1_form_equivalence(record_criterion):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = check_form_equivalence(rng, 1000)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 30
    record_criterion(1, "three Fisher forms agree", ok,
                     f"worst rel err {worst:.2e} (tol 1e-9) over 1000 instances in {elapsed:.1f} s")
    assert ok


def test_criterion_2_derivative_oracles(record_criterion):
    rng = np.random.default_rng(102)
    irs = max(_derivative_fd_error(rng) for _ in range(200))
    los = max(_los_fd_error(rng) for _ in range(200))
    ok = irs <= 1e-6 and los <= 1e-6
    record_criterion(2, "channel derivatives vs central differences", ok,
                     f"IRS path {irs:.2e}, LoS {los:.2e} (tol 1e-6, 200 scenes each)")
    assert ok


def test_criterion_3_pmli(record_criterion):
    rng = np.random.default_rng(103)
    worst_drop = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 65))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        g = a @ a.conj().T
        tr = solve(UqpProblem(g, random_unimodular(rng, n), max_iterations=50,
                              stall_tolerance=0.0)).objective_trace
        worst_drop = max(worst_drop, float(np.max((tr[:-1] - tr[1:]) / np.abs(tr[:-1]))))

    cases, wins = 200, 0
    for _ in range(cases):
        n = int(rng.integers(2, 9))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        g = a @ a.conj().T
        probes = random_unimodular(rng, (10_000, n))
        best_probe = np.max(np.einsum("ki,ij,kj->k", probes.conj(), g, probes).real)
        res = solve(UqpProblem(g, dominant_phase_start(g), max_iterations=200))
        wins += res.objective >= best_probe
    rate = wins / cases
    ok = worst_drop <= 1e-10 and rate >= 0.99
    record_criterion(3, "PMLI monotone and beats random probes", ok,
                     f"worst relative drop {worst_drop:.1e} over 500 PSD matrices; "
                     f"beats best of 1e4 probes in {rate:.1%} of {cases} cases")
    assert ok


@pytest.mark.slow
def test_criterion_4_waveform_step_monotone(trace_runs, record_criterion):
    runs, _ = trace_runs
    worst = 0.0
    for r in runs:
        for before, after in r.waveform_steps:
            worst = max(worst, (before - after) / before)
    ok = worst <= 1e-10
    record_criterion(4, "Fisher information never drops across a waveform step", ok,
                     f"worst relative drop {worst:.1e} over {sum(len(r.waveform_steps) for r in runs)} steps")
    assert ok


@pytest.mark.slow
def test_criterion_5_trace_shape(trace_runs, record_criterion):
    runs, elapsed = trace_runs
    crlb = np.array([r.crlb_trace for r in runs])
    final_ok = bool(np.all(crlb[:, -1] <= crlb[:, 0]))
    median = np.median(crlb, axis=0)
    steps = median[1:] <= median[:-1] * (1 + 1e-8)
    frac = float(np.mean(steps))
    per_seed = float(np.mean(crlb[:, 1:] <= crlb[:, :-1] * (1 + 1e-8)))
    log.info("per-seed monotone fraction %.3f; median non-monotone steps at %s",
             per_seed, list(np.flatnonzero(~steps) + 1))
    ok = final_ok and frac >= 0.9 and elapsed < 300
    record_criterion(5, "CRLB trace decreases", ok,
                     f"final<=initial on {int(np.sum(crlb[:, -1] <= crlb[:, 0]))}/{N_SEEDS} seeds; "
                     f"median monotone in {frac:.0%} of steps (per-seed {per_seed:.0%}); "
                     f"median CRLB {median[0]:.2e} -> {median[-1]:.2e}; {elapsed:.0f} s")
    assert ok


@pytest.mark.slow
def test_criterion_6_sigma_sweep_ordering(fig1_spec, fig1_csv, record_criterion):
    rows, _ = fig1_csv
    sigmas = fig1_spec.sweep.values
    mean = {(s, m): np.mean([r.crlb for r in rows if r.sigma2 == s and r.m_count == m])
            for s in sigmas for m in (1, 3)}
    counts = {(s, m): sum(1 for r in rows if r.sigma2 == s and r.m_count == m) for s in sigmas for m in (1, 3)}
    multi_wins = all(mean[(s, 3)] < mean[(s, 1)] for s in sigmas)
    monotone = all(mean[(a, m)] <= mean[(b, m)] for m in (1, 3) for a, b in zip(sigmas, sigmas[1:]))
    ok = multi_wins and monotone and set(counts.values()) == {N_SEEDS}
    detail = "; ".join(f"s2={s:g}: M=3 {mean[(s, 3)]:.2e} vs M=1 {mean[(s, 1)]:.2e}" for s in sigmas)
    record_criterion(6, "three IRS beat one at every noise level, CRLB rises with noise", ok, detail)
    assert ok


@pytest.mark.slow
def test_criterion_7_noise_equivariance(trace_runs, record_criterion):
    runs, _ = trace_runs
    spec = ex.load_spec(ex.template_path("fig1b"))
    doubled = spec.scene.with_noise_variance(2 * spec.scene.noise_variance)
    ch = build_channels(doubled)
    worst = 0.0
    for s in range(3):
        r2 = run_uber(doubled, ch, draw_reflectivities(doubled.n_irs, s), spec.uber, seed=s)
        worst = max(worst, abs(r2.crlb_trace[-1] / (2 * runs[s].crlb_trace[-1]) - 1))
    ok = worst <= 1e-9
    record_criterion(7, "CRLB(2 s2) = 2 CRLB(s2)", ok, f"worst rel err {worst:.1e} over 3 seeds")
    assert ok


def test_criterion_8_algebra(record_criterion):
    rng = np.random.default_rng(108)
    errs = {
        "Q swap": check_q_identity(rng, 500),
        "vec/kron/commutation": check_vec_identities(rng, 500),
        "penalty expansion": check_penalty_expansion(rng, 500),
    }
    ok = all(e <= 1e-10 for e in errs.values())
    record_criterion(8, "algebraic identities", ok, ", ".join(f"{k} {v:.1e}" for k, v in errs.items()))
    assert ok


@pytest.mark.slow
def test_criterion_9_determinism(fig1_spec, fig1_csv, record_criterion):
    _, first = fig1_csv
    second = ex.format_csv(ex.run_spec(fig1_spec))
    ok = first == second
    record_criterion(9, "bundled sweep reproduces byte for byte", ok,
                     f"{len(first.encode())} bytes, {first.count(chr(10)) - 1} rows, identical={ok}")
    assert ok


@pytest.mark.slow
def test_trace_matches_direct_evaluation(trace_runs):
    # the reported trace must agree with an independent evaluation of the final design
    runs, _ = trace_runs
    spec = ex.load_spec(ex.template_path("fig1b"))
    ch = build_channels(spec.scene)
    r = runs[0]
    f = fisher_direct(r.x, r.nu, draw_reflectivities(3, 0), ch, spec.scene.noise_variance)
    assert r.fisher_trace[-1] == pytest.approx(f, rel=1e-9)
