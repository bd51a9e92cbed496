"""Randomized invariant checks run by ``irsradar validate``.

Each check draws small random scenes and reports the worst error it saw
against a fixed tolerance.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import fisher as fi
from .linalg import commutation_matrix, kron, unvec, vec
from .scene import IrsConfig, SceneConfig, build_channels, steering
from .uber import penalty_matrix
from .uqp import UqpProblem, solve


@dataclass
class PropertyResult:
    name: str
    passed: bool
    worst_error: float
    tolerance: float
    cases: int

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name:<34} worst={self.worst_error:.3e} "
                f"tol={self.tolerance:.0e} cases={self.cases}")


def random_unimodular(rng, shape):
    return np.exp(2j * np.pi * rng.random(shape))


def random_scene(rng, n_t=None, n_m=None, n_irs=None, noise_variance=None):
    """Random planar scene with ``N_t = N_r`` and identical IRS sizes."""
    n_t = int(rng.integers(2, 5)) if n_t is None else n_t
    n_m = int(rng.integers(2, 4)) if n_m is None else n_m
    n_irs = int(rng.integers(1, 4)) if n_irs is None else n_irs
    wavelength = float(rng.uniform(0.01, 0.3))
    target = tuple(rng.uniform(1000, 6000, size=2) * rng.choice([-1, 1], size=2))
    irs = []
    while len(irs) < n_irs:
        pos = tuple(rng.uniform(-2000, 2000, size=2))
        if np.hypot(*np.subtract(pos, target)) > 100 and np.hypot(*pos) > 100:
            irs.append(IrsConfig(pos, n_m))
    sigma2 = float(rng.uniform(0.05, 2.0)) if noise_variance is None else noise_variance
    return SceneConfig(target_position=target, wavelength=wavelength, n_tx=n_t, n_rx=n_t,
                       irs_list=tuple(irs), noise_variance=sigma2)


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def check_form_equivalence(rng, cases, d_builder=fi.build_D):
    worst = 0.0
    for _ in range(cases):
        cfg = random_scene(rng)
        ch = build_channels(cfg)
        n = int(rng.integers(4, 9))
        x = random_unimodular(rng, (cfg.n_tx, n))
        nu = random_unimodular(rng, cfg.n_irs * ch.n_elements)
        alpha = (rng.standard_normal(cfg.n_irs) + 1j * rng.standard_normal(cfg.n_irs)) / np.sqrt(2)
        direct = fi.fisher_direct(x, nu, alpha, ch, cfg.noise_variance)
        g = fi.waveform_gram(nu, alpha, ch, cfg.noise_variance, n)
        quad = np.vdot(vec(x), g @ vec(x)).real
        t = fi.build_T(x, alpha, ch, cfg.noise_variance, d=d_builder(ch)[1])
        z = fi.q1(nu, cfg.n_irs) @ nu
        quart = np.vdot(z, t @ z).real
        worst = max(worst, _rel(quad, direct), _rel(quart, direct))
    return worst


def _derivative_fd_error(rng, h=1e-7):
    cfg = random_scene(rng)
    ch = build_channels(cfg)
    nu = fi.split_phases(random_unimodular(rng, cfg.n_irs * ch.n_elements), cfg.n_irs)
    m = int(rng.integers(cfg.n_irs))
    plus = ch.with_doa(ch.theta_tr + h)
    minus = ch.with_doa(ch.theta_tr - h)
    fd = (fi.composite_channel(nu[m], plus, m) - fi.composite_channel(nu[m], minus, m)) / (2 * h)
    return _rel(fi.channel_derivative(nu[m], ch, m), fd)


def _los_fd_error(rng, h=1e-7):
    n = int(rng.integers(2, 9))
    wavelength = float(rng.uniform(0.01, 0.3))
    d = wavelength / 2
    theta = float(rng.uniform(-1.4, 1.4))

    def h_los(th):
        a = steering(n, d, wavelength, th)
        return np.outer(a, a)

    fd = (h_los(theta + h) - h_los(theta - h)) / (2 * h)
    return _rel(fi.los_derivative(theta, n, d, wavelength), fd)


def check_pmli_monotone(rng, cases):
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(2, 65))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        g = a @ a.conj().T
        res = solve(UqpProblem(g, random_unimodular(rng, n), max_iterations=30, stall_tolerance=0.0))
        tr = res.objective_trace
        drops = (tr[:-1] - tr[1:]) / np.abs(tr[:-1])
        worst = max(worst, float(np.max(drops, initial=0.0)))
    return worst


def check_q_identity(rng, cases):
    worst = 0.0
    for _ in range(cases):
        n_irs, n_m = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        a = random_unimodular(rng, n_irs * n_m)
        b = random_unimodular(rng, n_irs * n_m)
        worst = max(worst, _rel(fi.q1(a, n_irs) @ b, fi.q2(b, n_irs) @ a))
    return worst


def check_vec_identities(rng, cases):
    worst = 0.0
    for _ in range(cases):
        p, q, r = (int(k) for k in rng.integers(1, 6, size=3))
        a = rng.standard_normal((p, q)) + 1j * rng.standard_normal((p, q))
        h = rng.standard_normal((r, p)) + 1j * rng.standard_normal((r, p))
        x = rng.standard_normal((p, q)) + 1j * rng.standard_normal((p, q))
        k = commutation_matrix(p, q)
        worst = max(
            worst,
            _rel(k @ vec(a), vec(a.T)),
            _rel(kron(x.T, np.eye(r)) @ vec(h), vec(h @ x)),
            _rel(kron(np.eye(q), h) @ vec(x), vec(h @ x)),
            _rel(unvec(vec(a), p, q), a),
        )
    return worst


def check_penalty_expansion(rng, cases):
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(2, 13))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        e = a @ a.conj().T
        eta = float(rng.uniform(0, 2))
        nu_i, nu_j = random_unimodular(rng, n), random_unimodular(rng, n)
        pm = penalty_matrix(e, nu_i, eta)
        bar = np.append(nu_j, 1.0)
        lhs = np.vdot(bar, pm @ bar).real
        e_tilde = pm[:n, :n]
        rhs = np.vdot(nu_j, e_tilde @ nu_j).real + eta * np.linalg.norm(nu_i - nu_j) ** 2
        worst = max(worst, _rel(lhs, rhs))
    return worst


def check_t_hermitian(rng, cases):
    worst = 0.0
    for _ in range(cases):
        cfg = random_scene(rng)
        ch = build_channels(cfg)
        x = random_unimodular(rng, (cfg.n_tx, int(rng.integers(4, 9))))
        alpha = rng.standard_normal(cfg.n_irs) + 1j * rng.standard_normal(cfg.n_irs)
        _, d = fi.build_D(ch)
        # raw kernel, before the symmetrization build_T applies
        n_r = cfg.n_rx
        x_tilde = kron(x.T, np.eye(n_r))
        z = kron(np.eye(n_r * cfg.n_tx), np.outer(alpha.conj(), alpha)).T @ kron(
            x_tilde.T @ x_tilde.conj(), np.eye(cfg.n_irs))
        pd = commutation_matrix(n_r * cfg.n_tx, cfg.n_irs) @ d
        t = pd.conj().T @ z.conj() @ pd
        worst = max(worst, float(np.linalg.norm(t - t.conj().T) / np.linalg.norm(t)))
    return worst


def run_validation(quick=False, seed=2023, d_builder=fi.build_D):
    """Run every invariant check; returns a list of :class:`PropertyResult`."""
    rng = np.random.default_rng(seed)
    scale = 0.1 if quick else 1.0

    def n(k):
        return max(5, int(k * scale))

    checks = [
        ("fisher form equivalence", 1e-9, n(1000), lambda c: check_form_equivalence(rng, c, d_builder)),
        ("IRS channel derivative vs FD", 1e-6, n(200),
         lambda c: max(_derivative_fd_error(rng) for _ in range(c))),
        ("LoS channel derivative vs FD", 1e-6, n(200), lambda c: max(_los_fd_error(rng) for _ in range(c))),
        ("PMLI monotone on PSD G", 1e-10, n(200), lambda c: check_pmli_monotone(rng, c)),
        ("Q1(a) b == Q2(b) a", 1e-10, n(200), lambda c: check_q_identity(rng, c)),
        ("vec / kron / commutation", 1e-10, n(200), lambda c: check_vec_identities(rng, c)),
        ("penalty quadratic-form expansion", 1e-10, n(200), lambda c: check_penalty_expansion(rng, c)),
        ("T Hermitian", 1e-9, n(100), lambda c: check_t_hermitian(rng, c)),
    ]
    results = []
    for name, tol, cases, fn in checks:
        worst = fn(cases)
        results.append(PropertyResult(name, bool(worst <= tol), worst, tol, cases))
    return results


def report(results, elapsed=None, stream=None):
    lines = [r.line() for r in results]
    n_fail = sum(not r.passed for r in results)
    tail = f"{len(results) - n_fail}/{len(results)} properties passed"
    if elapsed is not None:
        tail += f" in {elapsed:.1f} s"
    lines.append(tail)
    text = "\n".join(lines)
    if stream is not None:
        print(text, file=stream)
    return text


def timed_validation(quick=False, **kwargs):
    start = time.perf_counter()
    results = run_validation(quick=quick, **kwargs)
    return results, time.perf_counter() - start

