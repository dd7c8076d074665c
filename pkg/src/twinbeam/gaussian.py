"""Exact Gaussian-moment backend for the three two-mode sources.

All three sources (two-mode squeezed vacuum, split coherent, split thermal)
are Gaussian, so their full statistics are carried by the quadrature mean
vector and covariance matrix.  This backend evaluates every reported
quantity exactly from those moments and doubles as the sampling
distribution for homodyne Monte Carlo.

Conventions
-----------
* Quadratures ``x = (a + a^dag)/2``, ``p = (a - a^dag)/(2i)``; the vacuum
  covariance is ``I/4`` and the coherent-state quadrature-difference noise
  floor is 1/2.
* Ordering ``(x_c, p_c, x_d, p_d)``; mode c is the object arm.
* Photon moments follow from the quadrature moments by Wick factorization
  of Gaussian fourth moments (including displacement terms); this route is
  independent of the Fock backend's operator contractions, which is the
  point of keeping both.

Source covariances (n = mean photon number per output mode)
------------------------------------------------------------
* PDC: zero mean; per-quadrature variance (2n+1)/4; cross covariances
  x_c x_d = +sqrt(n(n+1))/2 and p_c p_d = -sqrt(n(n+1))/2 (the p
  anticorrelation follows from the Bogoliubov relations with real gain).
* Split coherent: mean (sqrt(n), 0, sqrt(n), 0); covariance I/4.
* Split thermal: zero mean; per-quadrature variance (2n+1)/4; cross
  covariances x_c x_d = p_c p_d = +n/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sources import SourceKind, SourceSpec

VACUUM_VARIANCE = 0.25
SYMPLECTIC_TOL = 1e-12
VARIANCE_FLOOR = 1e-14  # below this a normalized correlation is undefined

_OMEGA = np.array([[0.0, 1.0, 0.0, 0.0],
                   [-1.0, 0.0, 0.0, 0.0],
                   [0.0, 0.0, 0.0, 1.0],
                   [0.0, 0.0, -1.0, 0.0]])

_X_C, _P_C, _X_D, _P_D = 0, 1, 2, 3


@dataclass(frozen=True)
class GaussianTwoModeState:
    """First and second quadrature moments in (x_c, p_c, x_d, p_d) order."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        if mean.shape != (4,):
            raise ValueError(f"mean must have shape (4,), got {mean.shape}")
        if cov.shape != (4, 4):
            raise ValueError(f"cov must have shape (4, 4), got {cov.shape}")
        if np.max(np.abs(cov - cov.T)) > SYMPLECTIC_TOL:
            raise ValueError("covariance matrix is not symmetric within 1e-12")

    def symplectic_eigenvalues(self) -> np.ndarray:
        """Symplectic spectrum of the covariance matrix; the uncertainty
        principle in this scaling reads nu_k >= 1/4.

        The eigenvalues of i * Omega * cov come in +/- pairs whose moduli are
        the symplectic eigenvalues, each appearing twice.
        """
        ev = np.linalg.eigvals(1j * _OMEGA @ self.cov)
        return np.sort(np.abs(ev))[::2]

    def validate(self) -> None:
        nu = self.symplectic_eigenvalues()
        if np.min(nu) < VACUUM_VARIANCE - SYMPLECTIC_TOL:
            raise ValueError(
                f"symplectic eigenvalue {np.min(nu)} violates the uncertainty bound 1/4")


@dataclass(frozen=True)
class PhotonMoments:
    """Photon-number means, variances, and cross covariance of the two modes."""

    mean_c: float
    mean_d: float
    var_c: float
    var_d: float
    cov_cd: float

    def __post_init__(self):
        bound = math.sqrt(max(self.var_c, 0.0) * max(self.var_d, 0.0)) + 1e-12
        if abs(self.cov_cd) > bound:
            raise ValueError(
                f"photon covariance {self.cov_cd} violates Cauchy-Schwarz bound {bound}")


def vacuum_state() -> GaussianTwoModeState:
    return GaussianTwoModeState(mean=np.zeros(4), cov=VACUUM_VARIANCE * np.eye(4))


def gaussian_from_source(source: SourceSpec, n_per_mode: float | None = None) -> GaussianTwoModeState:
    """Exact post-transform Gaussian state for the given source."""
    n = source.n_per_mode if n_per_mode is None else float(n_per_mode)
    if n < 0.0:
        raise ValueError(f"n_per_mode must be >= 0, got {n}")
    mean = np.zeros(4)
    cov = VACUUM_VARIANCE * np.eye(4)
    if source.kind is SourceKind.PDC:
        diag = (2.0 * n + 1.0) / 4.0
        cross = math.sqrt(n * (n + 1.0)) / 2.0
        cov = np.diag([diag] * 4)
        cov[_X_C, _X_D] = cov[_X_D, _X_C] = cross
        cov[_P_C, _P_D] = cov[_P_D, _P_C] = -cross
    elif source.kind is SourceKind.COHERENT_SPLIT:
        amp = math.sqrt(2.0 * n) * math.sqrt(0.5)
        mean = np.array([amp, 0.0, amp, 0.0])
    else:
        diag = (2.0 * n + 1.0) / 4.0
        cross = n / 2.0
        cov = np.diag([diag] * 4)
        cov[_X_C, _X_D] = cov[_X_D, _X_C] = cross
        cov[_P_C, _P_D] = cov[_P_D, _P_C] = cross
    return GaussianTwoModeState(mean=mean, cov=cov)


def quadrature_indices(phase: str) -> tuple[int, int]:
    if phase == "in":
        return _X_C, _X_D
    if phase == "out":
        return _P_C, _P_D
    raise ValueError(f"phase must be 'in' or 'out', got {phase!r}")


def quadrature_pair_moments(state: GaussianTwoModeState, phase: str):
    """Mean vector and 2x2 covariance of the chosen (q_c, q_d) pair; this is
    the exact homodyne sampling distribution for Gaussian states."""
    i, j = quadrature_indices(phase)
    mean = np.array([state.mean[i], state.mean[j]])
    cov = np.array([[state.cov[i, i], state.cov[i, j]],
                    [state.cov[j, i], state.cov[j, j]]])
    return mean, cov


def quadrature_correlation(state: GaussianTwoModeState, phase: str = "in") -> float | None:
    """Normalized correlation cov(q_c, q_d)/sqrt(var var) for the chosen
    quadrature pair; None when a variance is below the 1e-14 floor."""
    i, j = quadrature_indices(phase)
    va, vb = state.cov[i, i], state.cov[j, j]
    if va < VARIANCE_FLOOR or vb < VARIANCE_FLOOR:
        return None
    return float(state.cov[i, j] / math.sqrt(va * vb))


def _complex_second_moments(state: GaussianTwoModeState):
    """N_jk = <da_j^dag da_k>, M_jk = <da_j da_k>, and the displacements
    alpha_j = <x_j> + i <p_j>, from the real quadrature moments.

    Within one mode the operator ordering contributes the commutator term:
    N_jj = var(x_j) + var(p_j) - 1/2.
    """
    c = state.cov
    m = state.mean
    alpha = np.array([m[_X_C] + 1j * m[_P_C], m[_X_D] + 1j * m[_P_D]])
    xi = [_X_C, _X_D]
    pi = [_P_C, _P_D]
    N = np.zeros((2, 2), dtype=complex)
    M = np.zeros((2, 2), dtype=complex)
    for j in range(2):
        for k in range(2):
            xx = c[xi[j], xi[k]]
            pp = c[pi[j], pi[k]]
            xp = c[xi[j], pi[k]]
            px = c[pi[j], xi[k]]
            N[j, k] = xx + pp + 1j * (xp - px)
            M[j, k] = xx - pp + 1j * (xp + px)
            if j == k:
                N[j, k] -= 0.5
    return N, M, alpha


def photon_moments(state: GaussianTwoModeState) -> PhotonMoments:
    """Photon-number means, variances, and cross covariance via Wick
    factorization of the Gaussian fourth moments, displacements included."""
    N, M, alpha = _complex_second_moments(state)

    def mean_n(j):
        return (abs(alpha[j]) ** 2 + N[j, j]).real

    def var_n(j):
        a2 = alpha[j] ** 2
        return (2.0 * (a2.conjugate() * M[j, j]).real
                + abs(alpha[j]) ** 2 * (2.0 * N[j, j].real + 1.0)
                + N[j, j].real * (N[j, j].real + 1.0)
                + abs(M[j, j]) ** 2)

    cov_cd = (abs(M[0, 1]) ** 2 + abs(N[0, 1]) ** 2
              + 2.0 * (alpha[0].conjugate() * alpha[1].conjugate() * M[0, 1]).real
              + 2.0 * (alpha[0] * alpha[1].conjugate() * N[0, 1]).real)

    return PhotonMoments(mean_c=float(mean_n(0)), mean_d=float(mean_n(1)),
                         var_c=float(var_n(0)), var_d=float(var_n(1)),
                         cov_cd=float(cov_cd))


def difference_variances(state: GaussianTwoModeState) -> tuple[float, float]:
    """(V_I, V_i): the second moments of the photon-number difference and of
    the in-phase quadrature difference.

    Both are raw second moments; for every source handled here the difference
    means vanish, so they coincide with the variances (asserted by tests, not
    assumed silently: the quadrature term carries the mean contribution).
    """
    pm = photon_moments(state)
    mean_diff_n = pm.mean_c - pm.mean_d
    v_i_num = (pm.var_c + pm.var_d - 2.0 * pm.cov_cd) + mean_diff_n ** 2

    c = state.cov
    mean_diff_x = state.mean[_X_C] - state.mean[_X_D]
    v_i_quad = (c[_X_C, _X_C] + c[_X_D, _X_D] - 2.0 * c[_X_C, _X_D]) + mean_diff_x ** 2
    return float(v_i_num), float(v_i_quad)
