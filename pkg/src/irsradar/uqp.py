"""Unimodular quadratic programs solved by power-method-like iterations.

Maximize ``s^H G s`` over vectors with ``|s_i| = 1``. For positive
semidefinite ``G`` the fixed-point map ``s <- exp(j arg(G s))`` never
decreases the objective; indefinite matrices are first shifted by a
multiple of the identity, which leaves the maximizer unchanged because
``s^H (G + c I) s = s^H G s + c n`` on the unit torus.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import hermitian_extreme_eigs, hermitian_part, is_unimodular, unit_modulus_project


def quadratic_form(g, s):
    return float(np.vdot(s, g @ s).real)


def diagonal_load(g):
    """Shift a Hermitian ``g`` to be positive semidefinite.

    Returns
    -------
    (ndarray, float)
        The loaded matrix and the shift ``lambda_m``. PSD inputs come back
        unchanged with shift 0; otherwise the shift is
        ``-lambda_min + eps`` with ``eps = 1e-9 * max(1, |lambda_min|)``.
    """
    g = hermitian_part(g)
    lam_min, _ = hermitian_extreme_eigs(g)
    if lam_min >= 0:
        return g, 0.0
    shift = -lam_min + 1e-9 * max(1.0, abs(lam_min))
    return g + shift * np.eye(g.shape[0]), shift


def pmli_step(g, s):
    """One power-method-like iteration ``exp(j arg(g @ s))``."""
    return unit_modulus_project(g @ s)


@dataclass(frozen=True)
class UqpProblem:
    g: np.ndarray
    initial: np.ndarray
    max_iterations: int = 100
    stall_tolerance: float = 1e-12

    def __post_init__(self):
        g = np.asarray(self.g)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"G must be square, got shape {g.shape}")
        if np.asarray(self.initial).shape != (g.shape[0],):
            raise ValueError("initial point does not match G")
        if not is_unimodular(self.initial):
            raise ValueError("initial point is not unimodular")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")


@dataclass
class UqpResult:
    solution: np.ndarray
    objective_trace: np.ndarray  # trace[0] is the starting objective
    iterations_used: int
    loading_applied: float

    @property
    def objective(self):
        return float(self.objective_trace[-1])


def solve(problem):
    """Run PMLI on ``problem``.

    Stops after ``max_iterations`` steps or once the relative objective gain
    stays below ``stall_tolerance`` for three consecutive steps. The trace
    holds the unloaded objective ``s^H G s`` of the start point followed by
    one value per iteration.
    """
    g = hermitian_part(problem.g)
    loaded, shift = diagonal_load(g)
    s = np.array(problem.initial, dtype=complex)
    trace = [quadratic_form(g, s)]
    stalls = 0
    for _ in range(problem.max_iterations):
        s = pmli_step(loaded, s)
        trace.append(quadratic_form(g, s))
        prev, cur = trace[-2], trace[-1]
        gain = (cur - prev) / max(abs(prev), np.finfo(float).tiny)
        stalls = stalls + 1 if gain < problem.stall_tolerance else 0
        if stalls >= 3:
            break
    return UqpResult(s, np.array(trace), len(trace) - 1, shift)


def dominant_phase_start(g):
    """Phases of the principal eigenvector, a common PMLI starting point."""
    _, vecs = np.linalg.eigh(hermitian_part(g))
    return unit_modulus_project(vecs[:, -1])
