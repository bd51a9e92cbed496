"""Fisher information of the target DoA and its waveform / phase-shift forms.

Three algebraically equivalent evaluations are provided:

* :func:`fisher_direct` -- ``(2/sigma^2) ||X~ H~' alpha||^2`` with
  ``X~ = X^T kron I``, straight from the derivative of the mean.
* :func:`waveform_gram` -- quadratic in ``vec(X)`` with Gram matrix
  ``(I_N kron B)^H (I_N kron B)``.
* :func:`fisher_quartic` -- quartic in the stacked IRS phase vector ``nu``,
  ``nu^H Q1(nu)^H T Q1(nu) nu``.

Phase profiles are 1-D arrays of length ``M * N_m`` holding the IRS phase
vectors back to back; waveforms are ``N_t x N`` arrays.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DimensionError,
    block_diag,
    commutation_matrix,
    hermitian_part,
    kron,
    unvec,
    vec,
)
from .scene import steering

IMAG_TOL = 1e-9


class SingularInformationError(ValueError):
    """Fisher information is zero (or negative), so the CRLB does not exist."""


def split_phases(nu, n_irs):
    nu = np.asarray(nu)
    if nu.size % n_irs:
        raise DimensionError(f"phase vector of length {nu.size} does not split into {n_irs} IRS")
    return nu.reshape(n_irs, -1)


def derivative_scalar(link, wavelength):
    """``j (2 pi d_m / lambda) cos(theta_ti,m)``, the chain-rule factor of ``b_m``."""
    return 1j * 2 * np.pi * link.spacing / wavelength * np.cos(link.theta_ti)


def composite_channel(v_m, channels, m):
    """Round-trip NLoS channel ``H_ir Phi b b^T Phi H_ri`` through IRS ``m``."""
    link = channels.links[m]
    v_m = np.asarray(v_m)
    if v_m.size != link.n_elements:
        raise DimensionError(f"IRS {m} has {link.n_elements} elements, got {v_m.size} phases")
    w = v_m * link.b_ti  # Phi_m b_m(theta_ti)
    return np.outer(link.h_ir @ w, w @ link.h_ri)


def channel_derivative(v_m, channels, m):
    """Derivative of :func:`composite_channel` w.r.t. the LoS DoA."""
    link = channels.links[m]
    v_m = np.asarray(v_m)
    if v_m.size != link.n_elements:
        raise DimensionError(f"IRS {m} has {link.n_elements} elements, got {v_m.size} phases")
    b = link.b_ti
    db = np.arange(b.size) * b
    left = link.h_ir @ (v_m * b)
    left_d = link.h_ir @ (v_m * db)
    right = (v_m * b) @ link.h_ri
    right_d = (v_m * db) @ link.h_ri
    scale = derivative_scalar(link, channels.wavelength)
    return scale * (np.outer(left, right_d) + np.outer(left_d, right))


def stacked_derivative(nu, channels):
    """``[vec(H'_1), ..., vec(H'_M)]`` as an ``N_r N_t x M`` matrix."""
    v = split_phases(nu, channels.n_irs)
    return np.column_stack([vec(channel_derivative(v[m], channels, m))
                            for m in range(channels.n_irs)])


def _check_waveform(x, channels):
    x = np.atleast_2d(x)
    if x.shape[0] != channels.a_t.size:
        raise DimensionError(f"waveform has {x.shape[0]} rows, radar has {channels.a_t.size} antennas")
    return x


def fisher_direct(x, nu, alpha, channels, noise_variance):
    """Fisher information of the LoS DoA for waveform ``x`` and phases ``nu``.

    Parameters
    ----------
    x : ndarray, shape (N_t, N)
        Transmit waveform.
    nu : ndarray, shape (M * N_m,)
        Stacked IRS phase shifts.
    alpha : ndarray, shape (M,)
        Complex reflectivities of the NLoS paths.
    channels : ChannelSet
    noise_variance : float

    Returns
    -------
    float
        ``(2 / sigma^2) * ||(X^T kron I) H~' alpha||^2``.
    """
    x = _check_waveform(x, channels)
    alpha = np.asarray(alpha)
    if alpha.size != channels.n_irs:
        raise DimensionError(f"{alpha.size} reflectivities for {channels.n_irs} IRS")
    n_r = channels.a_r.size
    x_tilde = kron(x.T, np.eye(n_r))
    r = x_tilde @ (stacked_derivative(nu, channels) @ alpha)
    return float(2.0 / noise_variance * np.vdot(r, r).real)


def waveform_matrix(nu, alpha, channels, noise_variance):
    """``B = (sqrt(2)/sigma) unvec(H~' alpha)``, an ``N_r x N_t`` matrix."""
    n_r, n_t = channels.a_r.size, channels.a_t.size
    h = stacked_derivative(nu, channels) @ np.asarray(alpha)
    return np.sqrt(2.0 / noise_variance) * unvec(h, n_r, n_t)


def waveform_gram(nu, alpha, channels, noise_variance, n_samples):
    """Gram matrix ``G = (I_N kron B)^H (I_N kron B)`` of the waveform quadratic form."""
    b = waveform_matrix(nu, alpha, channels, noise_variance)
    ib = kron(np.eye(n_samples), b)
    return ib.conj().T @ ib


def build_D(channels, sign=1.0):
    """Per-IRS maps ``D_m`` with ``vec(H'_m) = D_m vec(v_m v_m^T)`` and ``D = blockdiag(D_m)``.

    ``D_m = s_m [(C^T diag(d) kron C^T) + (C^T kron C^T diag(d))]`` with
    ``C = Diag(b_m(theta_ti)) H_ri`` and ``s_m`` the derivative scalar. The
    construction uses ``H_ir = H_ri^T``, so it needs ``N_r == N_t``.

    ``sign`` multiplies the second Kronecker term; it exists only so the
    validation suite can inject a broken operator and is 1 otherwise.
    """
    if channels.a_r.size != channels.a_t.size:
        raise DimensionError("D_m requires N_r == N_t (reciprocal channel)")
    blocks = []
    for link in channels.links:
        c = link.b_ti[:, None] * link.h_ri
        ct = c.T
        ct_d = ct * np.arange(link.n_elements)[None, :]
        d_m = kron(ct_d, ct) + sign * kron(ct, ct_d)
        blocks.append(derivative_scalar(link, channels.wavelength) * d_m)
    return blocks, block_diag(blocks)


def build_T(x, alpha, channels, noise_variance, d=None):
    """Phase-shift quartic-form kernel ``T = (2/sigma^2) D^H P^H Z* P D``.

    ``Z = (I kron alpha* alpha^T)^T (X~^T X~* kron I_M)`` and ``P`` is the
    commutation matrix taking ``vec(H~')`` to ``vec(H~'^T)``. The ``2/sigma^2``
    prefactor is kept so that :func:`fisher_quartic` returns the Fisher
    information itself.
    """
    x = _check_waveform(x, channels)
    alpha = np.asarray(alpha)
    if alpha.size != channels.n_irs:
        raise DimensionError(f"{alpha.size} reflectivities for {channels.n_irs} IRS")
    if d is None:
        _, d = build_D(channels)
    n_r, n_t, n_irs = channels.a_r.size, channels.a_t.size, channels.n_irs
    x_tilde = kron(x.T, np.eye(n_r))
    aa = np.outer(alpha.conj(), alpha)
    z = kron(np.eye(n_r * n_t), aa).T @ kron(x_tilde.T @ x_tilde.conj(), np.eye(n_irs))
    p = commutation_matrix(n_r * n_t, n_irs)
    pd = p @ d
    t = pd.conj().T @ z.conj() @ pd
    return 2.0 / noise_variance * hermitian_part(t, tol=1e-8)


def _q_matrix(nu, n_irs, outer):
    v = split_phases(nu, n_irs)
    n = v.shape[1]
    out = np.zeros((n_irs * n * n, n_irs * n), dtype=complex)
    i, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    for m in range(n_irs):
        # row i*n + k of the block, column k (outer) or i (inner)
        rows = m * n * n + (i * n + k).ravel()
        cols = m * n + (k if outer else i).ravel()
        out[rows, cols] = v[m][(i if outer else k).ravel()]
    return out


def q1(nu, n_irs):
    """``blockdiag(v_m kron I_{N_m})``; ``q1(nu) @ nu`` stacks ``vec(v_m v_m^T)``."""
    return _q_matrix(nu, n_irs, outer=True)


def q2(nu, n_irs):
    """``blockdiag(I_{N_m} kron v_m)``."""
    return _q_matrix(nu, n_irs, outer=False)


def _real_scalar(value, what):
    value = complex(value)
    if abs(value.imag) > IMAG_TOL * max(abs(value), 1e-300):
        raise ValueError(f"{what} has imaginary residue {value.imag:.3e}; kernel is not Hermitian")
    return value.real


def fisher_quartic(nu, t, n_irs, q=q1):
    """``nu^H Q(nu)^H T Q(nu) nu`` for ``Q`` one of :func:`q1`, :func:`q2`."""
    z = q(nu, n_irs) @ np.asarray(nu)
    return _real_scalar(np.vdot(z, t @ z), "quartic Fisher form")


def g_matrices(nu, t, n_irs):
    """``(Q1^H T Q1, Q2^H T Q2)`` evaluated at ``nu``.

    Both ``Q`` have a single non-zero per row, so the products reduce to
    weighted sums over one index of ``T`` viewed as ``(M, n, n, M, n, n)``.
    """
    v = split_phases(nu, n_irs)
    n = v.shape[1]
    t6 = np.asarray(t).reshape(n_irs, n, n, n_irs, n, n)
    vc = v.conj()
    # Q1 picks index i of (m, i, k); Q2 picks index k
    tq1 = np.einsum("aikbjl,bj->aikbl", t6, v)
    g1 = np.einsum("aikbl,ai->akbl", tq1, vc)
    tq2 = np.einsum("aikbjl,bl->aikbj", t6, v)
    g2 = np.einsum("aikbj,ak->aibj", tq2, vc)
    size = n_irs * n
    return g1.reshape(size, size), g2.reshape(size, size)


def e_matrix(nu, t, n_irs):
    """``E(nu) = (G1(nu) + G2(nu)) / 2`` so that ``g(nu1, nu2) = nu1^H E(nu2) nu1``."""
    g1, g2 = g_matrices(nu, t, n_irs)
    return hermitian_part(0.5 * (g1 + g2), tol=1e-8)


def biquadratic(nu1, nu2, t, n_irs):
    """Symmetric surrogate ``g(nu1, nu2)``; ``g(nu, nu)`` is the Fisher information."""
    g1_at_2, _ = g_matrices(nu2, t, n_irs)
    g1_at_1, _ = g_matrices(nu1, t, n_irs)
    val = 0.5 * (np.vdot(nu1, g1_at_2 @ nu1) + np.vdot(nu2, g1_at_1 @ nu2))
    return _real_scalar(val, "bi-quadratic form")


def los_derivative(theta, n, spacing, wavelength):
    """Derivative of the LoS channel ``a_r(theta) a_t(theta)^T`` w.r.t. ``theta``."""
    a = steering(n, spacing, wavelength, theta)
    da = np.arange(n) * a
    scale = 1j * 2 * np.pi * spacing / wavelength * np.cos(theta)
    return scale * (np.outer(da, a) + np.outer(a, da))


def fisher_no_irs(x, theta, alpha_rtr, cfg):
    """DoA Fisher information of the LoS path alone (no IRS)."""
    if cfg.n_rx != cfg.n_tx:
        raise DimensionError("no-IRS baseline assumes N_r == N_t")
    x = np.atleast_2d(x)
    if x.shape[0] != cfg.n_tx:
        raise DimensionError(f"waveform has {x.shape[0]} rows, radar has {cfg.n_tx} antennas")
    h_dot = los_derivative(theta, cfg.n_tx, cfg.d, cfg.wavelength)
    r = kron(x.T, np.eye(cfg.n_rx)) @ vec(h_dot)
    return float(2 * abs(alpha_rtr) ** 2 / cfg.noise_variance * np.vdot(r, r).real)


def crlb(fisher):
    if not fisher > 0:
        raise SingularInformationError(f"Fisher information {fisher!r} is not positive")
    return 1.0 / fisher


@dataclass(frozen=True)
class FisherOperators:
    """Snapshot of the operators used by the alternating optimizer.

    ``b`` depends on the phases, ``t`` on the waveform; :meth:`with_phases`
    and :meth:`with_waveform` return new snapshots with only the affected
    operator rebuilt. ``d_blocks``/``d`` depend on the geometry alone.
    """

    channels: object
    alpha: np.ndarray
    noise_variance: float
    d_blocks: tuple
    d: np.ndarray
    x: np.ndarray = None
    nu: np.ndarray = None
    b: np.ndarray = None
    t: np.ndarray = None

    @classmethod
    def build(cls, channels, alpha, noise_variance, x=None, nu=None):
        blocks, d = build_D(channels)
        ops = cls(channels, np.asarray(alpha), noise_variance, tuple(blocks), d)
        if x is not None:
            ops = ops.with_waveform(x)
        if nu is not None:
            ops = ops.with_phases(nu)
        return ops

    @property
    def n_irs(self):
        return self.channels.n_irs

    def with_waveform(self, x):
        x = np.array(x, dtype=complex)
        t = build_T(x, self.alpha, self.channels, self.noise_variance, d=self.d)
        return FisherOperators(self.channels, self.alpha, self.noise_variance,
                               self.d_blocks, self.d, x, self.nu, self.b, t)

    def with_phases(self, nu):
        nu = np.array(nu, dtype=complex)
        b = waveform_matrix(nu, self.alpha, self.channels, self.noise_variance)
        return FisherOperators(self.channels, self.alpha, self.noise_variance,
                               self.d_blocks, self.d, self.x, nu, b, self.t)

    def fisher(self):
        """Fisher information of the current ``(x, nu)`` through ``B``: ``||B X||_F^2``."""
        bx = self.b @ self.x
        return float(np.vdot(bx, bx).real)
