"""Alternating waveform / IRS phase-shift design that minimizes the DoA CRLB.

Each outer iteration

1. rebuilds the phase-shift kernel ``T`` for the current waveform,
2. runs the penalty-coupled bi-quadratic PMLI on two copies ``nu1``, ``nu2``
   of the phase vector, both restarted from the previously kept phases,
3. keeps whichever copy has the larger Fisher information,
4. rebuilds the waveform matrix ``B`` for the kept phases,
5. takes PMLI step(s) on ``vec(X)`` with the Gram matrix ``I kron B^H B``.

The optimizer works on noise-free operators (``T`` and ``B`` evaluated at
``sigma^2 = 2`` so the ``2/sigma^2`` prefactor is one). The noise variance
only rescales the reported Fisher information, so the iterates do not depend
on it and ``CRLB(c sigma^2) = c CRLB(sigma^2)`` holds exactly.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .fisher import (
    SingularInformationError,
    build_D,
    build_T,
    e_matrix,
    fisher_quartic,
    waveform_matrix,
)
from .linalg import hermitian_extreme_eigs, is_unimodular, unit_modulus_project

log = logging.getLogger(__name__)

# evaluating B and T at this variance makes 2/sigma^2 == 1
_UNIT_VARIANCE = 2.0


@dataclass(frozen=True)
class UberConfig:
    outer_iterations: int = 50
    inner_iterations: int = 20
    eta: float = 0.1
    waveform_steps: int = 1
    n_samples: int = 16
    initial_waveform: np.ndarray = None
    initial_phases: tuple = (None, None)

    def __post_init__(self):
        if self.outer_iterations < 0:
            raise ValueError("outer_iterations must be >= 0")
        if self.inner_iterations < 1:
            raise ValueError("inner_iterations must be >= 1")
        if self.waveform_steps < 1:
            raise ValueError("waveform_steps must be >= 1")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.initial_waveform is not None and not is_unimodular(self.initial_waveform):
            raise ValueError("initial waveform is not unimodular")
        for nu in self.initial_phases:
            if nu is not None and not is_unimodular(nu):
                raise ValueError("initial phase vector is not unimodular")


@dataclass
class InnerTrace:
    """Bookkeeping of one bi-quadratic inner loop.

    ``surrogate`` holds ``(before, after)`` values of the augmented quadratic
    form for every half-step; ``g_values`` the bi-quadratic objective
    ``g(nu1, nu2)`` after each full step.
    """

    surrogate: list = field(default_factory=list)
    g_values: list = field(default_factory=list)


@dataclass
class UberResult:
    x: np.ndarray
    nu: np.ndarray
    fisher_trace: np.ndarray
    crlb_trace: np.ndarray
    inner_traces: list
    waveform_steps: list  # (fisher before, fisher after) per waveform PMLI step, unit variance
    selected: list  # 1 or 2: which inner copy each outer iteration kept


def initial_waveform(n_tx, n_samples, seed):
    """Unit-modulus waveform with the phases of CN(0, 1) samples (PCG64 stream ``[seed, 1]``)."""
    rng = np.random.default_rng([int(seed), 1])
    g = rng.standard_normal((2, n_tx, n_samples))
    return unit_modulus_project(g[0] + 1j * g[1])


def penalty_matrix(e, nu_other, eta):
    """``[[lam_max I - E, -eta nu], [-eta nu^H, 2 eta n]]``.

    Its quadratic form at ``[nu_j; 1]`` is
    ``nu_j^H (lam_max I - E) nu_j + eta ||nu_other - nu_j||^2``.
    """
    n = e.shape[0]
    _, lam_max = hermitian_extreme_eigs(e)
    out = np.empty((n + 1, n + 1), dtype=complex)
    out[:n, :n] = lam_max * np.eye(n) - e
    out[:n, n] = -eta * nu_other
    out[n, :n] = -eta * np.conj(nu_other)
    out[n, n] = 2 * eta * n
    return out


def augmented_matrix(e, nu_other, eta):
    """PSD matrix ``lam_hat I - penalty_matrix`` maximized by the phase update."""
    script_e = penalty_matrix(e, nu_other, eta)
    _, lam_hat = hermitian_extreme_eigs(script_e)
    return lam_hat * np.eye(script_e.shape[0]) - script_e


def _surrogate(e_hat, nu):
    nu_bar = np.append(nu, 1.0)
    return float(np.vdot(nu_bar, e_hat @ nu_bar).real)


def phase_update(e_hat, nu):
    """PMLI step on ``[nu; 1]`` that keeps the appended 1 fixed."""
    nu_bar = np.append(nu, 1.0)
    return unit_modulus_project((e_hat @ nu_bar)[:-1])


def beamformer_inner(t, nu1, nu2, eta, n_inner, n_irs):
    """Run ``n_inner`` alternating updates of the two phase copies.

    ``nu1`` is refreshed against ``E(nu2)``, then ``nu2`` against ``E`` of the
    fresh ``nu1``.
    """
    nu1 = np.array(nu1, dtype=complex)
    nu2 = np.array(nu2, dtype=complex)
    trace = InnerTrace()
    for _ in range(n_inner):
        e_hat = augmented_matrix(e_matrix(nu2, t, n_irs), nu2, eta)
        new = phase_update(e_hat, nu1)
        trace.surrogate.append((_surrogate(e_hat, nu1), _surrogate(e_hat, new)))
        nu1 = new

        e1 = e_matrix(nu1, t, n_irs)
        e_hat = augmented_matrix(e1, nu1, eta)
        new = phase_update(e_hat, nu2)
        trace.surrogate.append((_surrogate(e_hat, nu2), _surrogate(e_hat, new)))
        nu2 = new

        # g is symmetric, so g(nu1, nu2) = nu2^H E(nu1) nu2
        trace.g_values.append(float(np.vdot(nu2, e1 @ nu2).real))
    return nu1, nu2, trace


def select_profile(nu1, nu2, t, n_irs):
    """Return ``(nu, k)``: the copy with the larger Fisher information and its index; ties keep ``nu1``."""
    if fisher_quartic(nu2, t, n_irs) > fisher_quartic(nu1, t, n_irs):
        return nu2, 2
    return nu1, 1


def _unit_fisher(b, x):
    bx = b @ x
    return float(np.vdot(bx, bx).real)


def run_uber(scene, channels, alpha, cfg, seed=None):
    """Jointly optimize the waveform and IRS phases for ``scene``.

    Parameters
    ----------
    scene : SceneConfig
        Supplies the noise variance and, when ``cfg`` has no initial
        waveform, the seed of the random-phase start (``seed`` overrides).
    channels : ChannelSet
    alpha : ndarray, shape (M,)
    cfg : UberConfig

    Returns
    -------
    UberResult
        ``fisher_trace``/``crlb_trace`` have ``outer_iterations + 1`` entries,
        starting with the initial design.
    """
    n_irs = channels.n_irs
    n_phase = n_irs * channels.n_elements
    alpha = np.asarray(alpha, dtype=complex)
    sigma2 = scene.noise_variance
    scale = 2.0 / sigma2

    if cfg.initial_waveform is None:
        x = initial_waveform(channels.a_t.size, cfg.n_samples, scene.seed if seed is None else seed)
    else:
        x = np.array(cfg.initial_waveform, dtype=complex)
    ones = np.ones(n_phase, dtype=complex)
    nu1 = ones if cfg.initial_phases[0] is None else np.array(cfg.initial_phases[0], dtype=complex)
    nu2 = ones if cfg.initial_phases[1] is None else np.array(cfg.initial_phases[1], dtype=complex)
    if nu1.size != n_phase or nu2.size != n_phase:
        raise ValueError(f"initial phases must have length {n_phase}")

    _, d = build_D(channels)
    nu = nu1
    b = waveform_matrix(nu, alpha, channels, _UNIT_VARIANCE)
    f0 = _unit_fisher(b, x)
    if not f0 > 0:
        raise SingularInformationError("Fisher information vanishes at the initial design")
    fisher = [scale * f0]
    inner_traces, wf_steps, selected = [], [], []

    for it in range(cfg.outer_iterations):
        t = build_T(x, alpha, channels, _UNIT_VARIANCE, d=d)
        if it > 0:
            # both copies restart from the kept profile
            nu1 = nu2 = nu
        nu1, nu2, inner = beamformer_inner(t, nu1, nu2, cfg.eta, cfg.inner_iterations, n_irs)
        inner_traces.append(inner)
        nu, k = select_profile(nu1, nu2, t, n_irs)
        selected.append(k)

        b = waveform_matrix(nu, alpha, channels, _UNIT_VARIANCE)
        gram = b.conj().T @ b
        for _ in range(cfg.waveform_steps):
            before = _unit_fisher(b, x)
            x = unit_modulus_project(gram @ x)
            wf_steps.append((before, _unit_fisher(b, x)))

        fisher.append(scale * _unit_fisher(b, x))
        if fisher[-1] < fisher[-2]:
            log.info("outer iteration %d: Fisher information dropped %.3e -> %.3e",
                     it + 1, fisher[-2], fisher[-1])

    fisher = np.array(fisher)
    return UberResult(
        x=x,
        nu=nu,
        fisher_trace=fisher,
        crlb_trace=1.0 / fisher,
        inner_traces=inner_traces,
        waveform_steps=wf_steps,
        selected=selected,
    )
