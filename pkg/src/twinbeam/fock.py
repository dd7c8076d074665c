"""Truncated Fock-space backend for two bosonic modes.

This is the brute-force oracle: states are built as explicit amplitude
arrays over the photon-number basis and observables are evaluated by direct
operator contraction, with no appeal to Gaussian moment identities.

Conventions
-----------
* Mode ``c`` (object arm) is the outer index, mode ``d`` (reference arm) the
  inner one: a pure two-mode state is an array ``amp[n_c, n_d]``.
* Annihilation operator: ``a[k-1, k] = sqrt(k)``.
* Quadratures: in-phase ``x = (a + a^dag)/2``, out-of-phase
  ``p = (a - a^dag)/(2i)``; vacuum variance 1/4.
* Beam splitter of power transmittance T maps the mode operators as
  ``c = sqrt(T) a - sqrt(1-T) b`` and ``d = sqrt(T) b + sqrt(1-T) a``
  (minus sign on the reflected contribution into mode c).

Truncation policy
-----------------
``choose_cutoff`` returns the smallest per-mode dimension whose output-mode
photon distribution has tail mass below ``tail_tolerance`` (geometric tail
for PDC and split thermal, Poisson tail for split coherent), hard-capped at
512 levels.

The requested dimension is a floor, not a ceiling: state constructors add
guard levels internally so that first and second photon-number and
quadrature moments are correct to near machine precision.  A state sliced
exactly at the requested dimension would bias second moments by roughly
``tail_tolerance * dim**2`` (measured: ~8e-8 on the split-thermal
intensity-difference variance at n=2, tol=1e-10), which would not survive
cross-checks against the exact Gaussian backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

HARD_DIM_CAP = 512
# Guard-level policy: extend levels L until the discarded photon-number tail,
# weighted by (k^2 + 1), is below this times max(1, nbar^2).
GUARD_TAIL_WEIGHT = 1e-13
# Largest per-mode level count a constructor will use for pure amplitudes.
PURE_LEVEL_CAP = 2048
# Largest input-photon-number block kept in a split-thermal mixture.
BLOCK_LEVEL_CAP = 8192
# Largest per-mode level count for which a dense dim^2 x dim^2 density matrix
# may be materialized (48^4 complex entries is ~85 MB).
DENSE_LEVEL_CAP = 48

HERMITICITY_TOL = 1e-12
TRACE_EXCESS_TOL = 1e-12
PSD_EIGVAL_TOL = 1e-10


class TruncationError(ValueError):
    """A requested state cannot be represented within the allowed level budget."""


# ---------------------------------------------------------------------------
# cutoff selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FockCutoff:
    """Per-mode truncation: ``dim`` Fock levels (0..dim-1) and the acceptable
    probability mass outside the truncation."""

    dim: int
    tail_tolerance: float

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if not (0.0 <= self.tail_tolerance < 1.0):
            raise ValueError(f"tail_tolerance must be in [0, 1), got {self.tail_tolerance}")


def _geometric_tail(nbar: float, dim: int) -> float:
    """P(k >= dim) for the Bose-Einstein distribution with mean nbar."""
    if nbar <= 0.0:
        return 0.0
    return (nbar / (nbar + 1.0)) ** dim


def _poisson_tail(mean: float, dim: int) -> float:
    """P(k >= dim) for Poisson(mean), via a direct pmf sum."""
    if mean <= 0.0:
        return 0.0
    pmf = math.exp(-mean)
    cdf = pmf
    for k in range(1, dim):
        pmf *= mean / k
        cdf += pmf
    return max(0.0, 1.0 - cdf)


def choose_cutoff(source, n_per_mode: float | None = None,
                  tail_tolerance: float = 1e-10,
                  hard_cap: int = HARD_DIM_CAP) -> FockCutoff:
    """Smallest per-mode dimension whose output-mode photon-number tail is
    below ``tail_tolerance``.

    ``source`` may be a SourceSpec or a SourceKind; ``n_per_mode`` defaults to
    the spec's value.  Raises TruncationError past ``hard_cap``.
    """
    from .sources import SourceKind, SourceSpec

    if isinstance(source, SourceSpec):
        kind = source.kind
        if n_per_mode is None:
            n_per_mode = source.n_per_mode
    else:
        kind = source
        if n_per_mode is None:
            raise ValueError("n_per_mode is required when only a kind is given")
    if not (0.0 < tail_tolerance < 1.0):
        raise ValueError(f"tail_tolerance must be in (0, 1), got {tail_tolerance}")
    if n_per_mode < 0.0:
        raise ValueError(f"n_per_mode must be >= 0, got {n_per_mode}")

    if kind is SourceKind.COHERENT_SPLIT:
        tail = lambda d: _poisson_tail(n_per_mode, d)
    else:
        # PDC and split thermal both have geometric (thermal) output marginals.
        tail = lambda d: _geometric_tail(n_per_mode, d)

    dim = 2
    while tail(dim) >= tail_tolerance:
        dim += 1
        if dim > hard_cap:
            raise TruncationError(
                f"required dimension exceeds the hard cap {hard_cap} "
                f"(source {kind.value}, n={n_per_mode}, tol={tail_tolerance}); "
                "reduce n_per_mode or loosen tail_tolerance")
    return FockCutoff(dim=dim, tail_tolerance=tail_tolerance)


def _geometric_guard_levels(nbar: float, floor: int) -> int:
    """Levels needed so the discarded geometric tail, weighted by k^2 + 1,
    is below GUARD_TAIL_WEIGHT * max(1, nbar^2)."""
    levels = max(2, floor)
    if nbar <= 0.0:
        return levels
    s = nbar / (nbar + 1.0)
    q = 1.0 - s
    target = GUARD_TAIL_WEIGHT * max(1.0, nbar * nbar)
    while True:
        head = s ** levels
        tail_weight = head * (levels * levels + 2.0 * levels * s / q
                              + s * (1.0 + s) / q ** 2 + 1.0)
        if tail_weight <= target:
            return levels
        levels += 1
        if levels > BLOCK_LEVEL_CAP:
            raise TruncationError(
                f"guard levels for mean photon number {nbar} exceed {BLOCK_LEVEL_CAP}")


def _poisson_guard_levels(mean: float, floor: int) -> int:
    """Poisson analogue of _geometric_guard_levels."""
    levels = max(2, floor)
    if mean <= 0.0:
        return levels
    target = GUARD_TAIL_WEIGHT * max(1.0, mean * mean)
    span = int(mean + 60.0 * math.sqrt(mean + 1.0) + 60)
    ks = np.arange(span)
    logpmf = -mean + ks * math.log(mean) - np.cumsum(
        np.concatenate([[0.0], np.log(np.arange(1, span))]))
    weight = np.exp(logpmf) * (ks.astype(float) ** 2 + 1.0)
    suffix = np.cumsum(weight[::-1])[::-1]
    for lv in range(levels, span):
        if suffix[lv] <= target:
            return lv
    raise TruncationError(f"could not bound the Poisson({mean}) tail within {span} levels")


# ---------------------------------------------------------------------------
# single-mode operators
# ---------------------------------------------------------------------------

MODE_OPERATOR_LABELS = (
    "annihilation", "creation", "number", "quadrature_in", "quadrature_out", "identity",
)


@dataclass(frozen=True)
class ModeOperator:
    label: str
    matrix: np.ndarray


def annihilation_matrix(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, dim)), k=1).astype(complex)


def mode_operator(label: str, dim: int) -> ModeOperator:
    """Build one of the named single-mode operators on ``dim`` Fock levels."""
    a = annihilation_matrix(dim)
    if label == "annihilation":
        mat = a
    elif label == "creation":
        mat = a.conj().T
    elif label == "number":
        mat = a.conj().T @ a
    elif label == "quadrature_in":
        mat = (a + a.conj().T) / 2.0
    elif label == "quadrature_out":
        mat = (a - a.conj().T) / 2.0j
    elif label == "identity":
        mat = np.eye(dim, dtype=complex)
    else:
        raise ValueError(f"unknown operator label {label!r}; "
                         f"expected one of {MODE_OPERATOR_LABELS}")
    return ModeOperator(label=label, matrix=mat)


def _as_matrix(op, dim: int) -> np.ndarray:
    if op is None:
        return np.eye(dim, dtype=complex)
    if isinstance(op, ModeOperator):
        op = op.matrix
    op = np.asarray(op, dtype=complex)
    if op.shape != (dim, dim):
        raise ValueError(f"operator shape {op.shape} does not match {dim} levels")
    return op


# ---------------------------------------------------------------------------
# state representation
# ---------------------------------------------------------------------------

class TwoModeFockState:
    """A two-mode state over ``levels`` Fock levels per mode.

    Storage is one of three equivalent forms, all positive by construction:

    * ``pure``: a single amplitude array ``amp[n_c, n_d]``;
    * ``mixture``: weights plus a list of pure amplitude arrays;
    * ``blocks``: weights plus compact total-photon-number blocks, member i
      holding coefficients ``c_k`` of ``|k, n_i - k>`` (used for the split
      thermal state, whose large level counts rule out dense storage).

    ``levels`` may exceed ``cutoff.dim``: constructors add guard levels so
    reported moments carry no measurable truncation bias.
    """

    def __init__(self, cutoff: FockCutoff, levels: int, storage: str, payload):
        if storage not in ("pure", "mixture", "blocks"):
            raise ValueError(f"unknown storage kind {storage!r}")
        self.cutoff = cutoff
        self.levels = int(levels)
        self.storage = storage
        self._payload = payload

    # -- factories ----------------------------------------------------------

    @classmethod
    def from_pure(cls, cutoff: FockCutoff, amp: np.ndarray) -> "TwoModeFockState":
        amp = np.asarray(amp, dtype=complex)
        if amp.ndim != 2 or amp.shape[0] != amp.shape[1]:
            raise ValueError(f"pure amplitudes must be square, got {amp.shape}")
        return cls(cutoff, amp.shape[0], "pure", amp)

    @classmethod
    def from_mixture(cls, cutoff: FockCutoff, weights, members) -> "TwoModeFockState":
        weights = np.asarray(weights, dtype=float)
        members = [np.asarray(m, dtype=complex) for m in members]
        if len(weights) != len(members) or len(members) == 0:
            raise ValueError("mixture needs matching, non-empty weights and members")
        levels = members[0].shape[0]
        for m in members:
            if m.shape != (levels, levels):
                raise ValueError("all mixture members must share one shape")
        if np.any(weights < -1e-15):
            raise ValueError("mixture weights must be non-negative")
        return cls(cutoff, levels, "mixture", (weights, members))

    @classmethod
    def from_block_mixture(cls, cutoff: FockCutoff, weights, blocks) -> "TwoModeFockState":
        """Members are compact vectors over |k, n-k>; member i has
        n = len(blocks[i]) - 1 total photons."""
        weights = np.asarray(weights, dtype=float)
        blocks = [np.asarray(b, dtype=complex) for b in blocks]
        if len(weights) != len(blocks) or len(blocks) == 0:
            raise ValueError("block mixture needs matching, non-empty weights and blocks")
        if np.any(weights < -1e-15):
            raise ValueError("mixture weights must be non-negative")
        levels = max(len(b) for b in blocks)
        return cls(cutoff, levels, "blocks", (weights, blocks))

    # -- basic properties ----------------------------------------------------

    @property
    def is_pure(self) -> bool:
        return self.storage == "pure"

    @property
    def vector(self) -> np.ndarray:
        """Flattened dim^2 state vector (pure states only), mode c outer."""
        if not self.is_pure:
            raise ValueError("vector is only defined for pure states")
        return self._payload.reshape(-1).copy()

    @property
    def amplitudes(self) -> np.ndarray:
        if not self.is_pure:
            raise ValueError("amplitudes are only defined for pure states")
        return self._payload

    def trace(self) -> float:
        if self.storage == "pure":
            return float(np.sum(np.abs(self._payload) ** 2))
        weights, members = self._payload
        if self.storage == "mixture":
            norms = np.array([np.sum(np.abs(m) ** 2) for m in members])
        else:
            norms = np.array([np.sum(np.abs(b) ** 2) for b in members])
        return float(np.sum(weights * norms))

    def to_dense(self, max_levels: int = DENSE_LEVEL_CAP) -> np.ndarray:
        """Dense density matrix of shape (levels^2, levels^2), row-major in
        (n_c, n_d).  Guarded: refuses levels beyond ``max_levels``."""
        L = self.levels
        if L > max_levels:
            raise TruncationError(
                f"dense density matrix at {L} levels per mode would need "
                f"{L ** 4} complex entries; raise max_levels only if you mean it")
        if self.storage == "pure":
            v = self._payload.reshape(-1)
            return np.outer(v, v.conj())
        weights, members = self._payload
        rho = np.zeros((L * L, L * L), dtype=complex)
        if self.storage == "mixture":
            for w, m in zip(weights, members):
                v = m.reshape(-1)
                rho += w * np.outer(v, v.conj())
        else:
            for w, b in zip(weights, members):
                n = len(b) - 1
                ks = np.arange(n + 1)
                idx = ks * L + (n - ks)
                rho[np.ix_(idx, idx)] += w * np.outer(b, b.conj())
        return rho

    def validate(self) -> None:
        """Check the state invariants; raises ValueError on violation.

        Trace and weight positivity are checked on every representation; the
        Hermiticity and positive-semidefiniteness checks run on the dense
        matrix when it is small enough to materialize.
        """
        tr = self.trace()
        if not (1.0 - self.cutoff.tail_tolerance - 1e-12 <= tr <= 1.0 + TRACE_EXCESS_TOL):
            raise ValueError(f"trace {tr} outside [1 - tail_tolerance, 1 + {TRACE_EXCESS_TOL}]")
        if self.storage in ("mixture", "blocks"):
            weights, _ = self._payload
            if np.any(weights < -1e-15):
                raise ValueError("negative mixture weight")
        if self.levels <= 24:
            rho = self.to_dense()
            herm = np.max(np.abs(rho - rho.conj().T))
            if herm > HERMITICITY_TOL:
                raise ValueError(f"density matrix not Hermitian: deviation {herm}")
            eigmin = float(np.linalg.eigvalsh(rho)[0])
            if eigmin < -PSD_EIGVAL_TOL:
                raise ValueError(f"density matrix not PSD: min eigenvalue {eigmin}")


# ---------------------------------------------------------------------------
# state constructors
# ---------------------------------------------------------------------------

def _coherent_vector(beta: complex, levels: int) -> np.ndarray:
    """Amplitudes of |beta> on 0..levels-1, built by a stable recurrence."""
    v = np.zeros(levels, dtype=complex)
    v[0] = math.exp(-0.5 * abs(beta) ** 2)
    for k in range(1, levels):
        v[k] = v[k - 1] * beta / math.sqrt(k)
    return v


def make_tmsv(gain: float, cutoff: FockCutoff) -> TwoModeFockState:
    """Two-mode squeezed vacuum from an ideal parametric amplifier of power
    gain G >= 1, built directly in Schmidt form: amplitude
    sqrt(nbar^k / (nbar+1)^(k+1)) on |k, k>, nbar = G - 1."""
    if gain < 1.0:
        raise ValueError(f"gain must be >= 1, got {gain}")
    nbar = gain - 1.0
    levels = _geometric_guard_levels(nbar, cutoff.dim)
    if levels > PURE_LEVEL_CAP:
        raise TruncationError(
            f"TMSV at gain {gain} needs {levels} levels per mode (cap {PURE_LEVEL_CAP}); "
            "reduce the gain")
    amp = np.zeros((levels, levels), dtype=complex)
    s = nbar / (nbar + 1.0)
    coeff = math.sqrt(1.0 / (nbar + 1.0))
    for k in range(levels):
        amp[k, k] = coeff
        coeff *= math.sqrt(s)
    state = TwoModeFockState.from_pure(cutoff, amp)
    _check_tail(state, "TMSV")
    return state


def make_split_coherent(alpha: complex, cutoff: FockCutoff,
                        transmittance: float = 0.5) -> TwoModeFockState:
    """Coherent state |alpha> on the input port, vacuum on the other, through
    a beam splitter: the pure product |alpha sqrt(T)> (x) |alpha sqrt(1-T)>.

    With vacuum on port b the reflected-minus-sign convention never surfaces;
    both output amplitudes inherit the phase of alpha.
    """
    if not (0.0 <= transmittance <= 1.0):
        raise ValueError(f"transmittance must be in [0, 1], got {transmittance}")
    mean_c = abs(alpha) ** 2 * transmittance
    mean_d = abs(alpha) ** 2 * (1.0 - transmittance)
    levels = _poisson_guard_levels(max(mean_c, mean_d), cutoff.dim)
    if levels > PURE_LEVEL_CAP:
        raise TruncationError(
            f"split coherent state at |alpha|^2={abs(alpha)**2} needs {levels} levels "
            f"per mode (cap {PURE_LEVEL_CAP})")
    vc = _coherent_vector(alpha * math.sqrt(transmittance), levels)
    vd = _coherent_vector(alpha * math.sqrt(1.0 - transmittance), levels)
    state = TwoModeFockState.from_pure(cutoff, np.outer(vc, vd))
    _check_tail(state, "split coherent")
    return state


def _splitter_block_column(n: int, transmittance: float) -> np.ndarray:
    """Amplitudes c_k of U_BS |n, 0> = sum_k c_k |k, n-k>.

    These are the square roots of the Binomial(n, T) pmf: the exact action of
    the beam-splitter unitary on an n-photon Fock input, all positive under
    the sign convention used here (vacuum on the reflected port).  Unit tests
    cross-check these columns against the exponentiated generator.
    """
    if n == 0:
        return np.ones(1, dtype=complex)
    T = transmittance
    ks = np.arange(n + 1, dtype=float)
    logfact = np.cumsum(np.concatenate([[0.0], np.log(np.arange(1.0, n + 1))]))
    logbin = logfact[n] - logfact - logfact[::-1]
    if T <= 0.0:
        col = np.zeros(n + 1); col[0] = 1.0
    elif T >= 1.0:
        col = np.zeros(n + 1); col[n] = 1.0
    else:
        col = np.exp(0.5 * (logbin + ks * math.log(T) + (n - ks) * math.log1p(-T)))
    return col.astype(complex)


def make_split_thermal(input_mean: float, cutoff: FockCutoff,
                       transmittance: float = 0.5) -> TwoModeFockState:
    """Thermal state of mean ``input_mean`` on one port, vacuum on the other,
    through a beam splitter.

    Built as the geometric mixture over input Fock layers |n, 0>, each pushed
    through the splitter; every member lives in one total-photon-number block,
    which keeps the representation compact at high means.
    """
    if input_mean < 0.0:
        raise ValueError(f"input_mean must be >= 0, got {input_mean}")
    members = _geometric_guard_levels(input_mean, cutoff.dim)
    s = input_mean / (input_mean + 1.0)
    q = 1.0 / (input_mean + 1.0)
    weights = q * s ** np.arange(members)
    blocks = [_splitter_block_column(n, transmittance) for n in range(members)]
    state = TwoModeFockState.from_block_mixture(cutoff, weights, blocks)
    _check_tail(state, "split thermal")
    return state


def _check_tail(state: TwoModeFockState, what: str) -> None:
    deficit = 1.0 - state.trace()
    if deficit > state.cutoff.tail_tolerance:
        raise TruncationError(
            f"{what}: probability mass {deficit:.3e} outside the truncation exceeds "
            f"tail_tolerance {state.cutoff.tail_tolerance}; raise dim or the level caps")


def make_source_state(source, cutoff: FockCutoff) -> TwoModeFockState:
    """Construct the two-mode Fock state for a SourceSpec."""
    from .sources import SourceKind

    if source.kind is SourceKind.PDC:
        return make_tmsv(source.gain, cutoff)
    if source.kind is SourceKind.COHERENT_SPLIT:
        return make_split_coherent(source.alpha, cutoff)
    return make_split_thermal(source.input_mean, cutoff)


# ---------------------------------------------------------------------------
# four-port transforms
# ---------------------------------------------------------------------------

def beam_splitter_unitary(transmittance: float, cutoff: FockCutoff) -> np.ndarray:
    """Unitary of the beam splitter on the truncated two-mode space,
    shape (dim^2, dim^2), row-major in (n_c, n_d).

    Built by exponentiating the generator theta * (a^dag b - a b^dag) with
    theta = -arccos(sqrt(T)), which reproduces the operator relations
    c = sqrt(T) a - sqrt(1-T) b and d = sqrt(T) b + sqrt(1-T) a away from the
    truncation boundary.  The generator conserves total photon number, so the
    exponential is assembled block by block; clipping the generator to the
    truncated box keeps the result exactly unitary.
    """
    if not (0.0 <= transmittance <= 1.0):
        raise ValueError(f"transmittance must be in [0, 1], got {transmittance}")
    dim = cutoff.dim
    if dim > 64:
        raise TruncationError(f"dense beam-splitter unitary capped at 64 levels, got {dim}")
    theta = -math.acos(min(1.0, math.sqrt(transmittance)))
    U = np.zeros((dim * dim, dim * dim), dtype=complex)
    for total in range(2 * dim - 1):
        ks = np.arange(max(0, total - dim + 1), min(total, dim - 1) + 1)
        idx = ks * dim + (total - ks)
        m = len(ks)
        gen = np.zeros((m, m))
        # coupling <k+1, total-k-1| a^dag b |k, total-k> = sqrt((k+1)(total-k))
        for i in range(m - 1):
            k = ks[i]
            coup = theta * math.sqrt((k + 1.0) * (total - k))
            gen[i + 1, i] = coup
            gen[i, i + 1] = -coup
        U[np.ix_(idx, idx)] = expm(gen)
    return U


def two_mode_squeeze_unitary(gain: float, cutoff: FockCutoff,
                             sign: float = 1.0) -> np.ndarray:
    """Unitary exp(r * sign * (a^dag b^dag - a b)) with r = arccosh(sqrt(G)),
    on the truncated two-mode space.

    This is the generator route to the TMSV, kept as an independent
    cross-check of the Schmidt-form constructor (and, with sign=-1, as a
    deliberately wrong-phase negative control).  Dense exponentiation, so
    small dimensions only.
    """
    if gain < 1.0:
        raise ValueError(f"gain must be >= 1, got {gain}")
    dim = cutoff.dim
    if dim > 32:
        raise TruncationError(f"dense squeeze unitary capped at 32 levels, got {dim}")
    r = math.acosh(math.sqrt(gain)) * sign
    a = annihilation_matrix(dim)
    gen = r * (np.kron(a.conj().T, a.conj().T) - np.kron(a, a))
    return expm(gen)


def apply_unitary(state: TwoModeFockState, unitary: np.ndarray) -> TwoModeFockState:
    """Apply a dense two-mode unitary (for tests; pure states only)."""
    if not state.is_pure:
        raise ValueError("apply_unitary supports pure states only")
    L = state.levels
    if unitary.shape != (L * L, L * L):
        raise ValueError(f"unitary shape {unitary.shape} does not match {L} levels")
    out = (unitary @ state.vector).reshape(L, L)
    return TwoModeFockState.from_pure(state.cutoff, out)


# ---------------------------------------------------------------------------
# loss channel
# ---------------------------------------------------------------------------

def _kraus_factors(n: np.ndarray, loss: int, transmittance: float) -> np.ndarray:
    """sqrt(C(n, l) t^(n-l) (1-t)^l) for each n, the amplitude for losing
    exactly ``loss`` photons out of n."""
    out = np.zeros(len(n))
    ok = n >= loss
    nn = n[ok].astype(float)
    if transmittance == 0.0:
        out[ok] = (nn == loss).astype(float)
        return out
    logfact = np.cumsum(np.concatenate([[0.0], np.log(np.arange(1.0, float(n.max()) + 1))]))
    logbin = logfact[n[ok]] - logfact[loss] - logfact[n[ok] - loss]
    logt = (nn - loss) * math.log(transmittance)
    logl = loss * math.log1p(-transmittance) if transmittance < 1.0 else (
        0.0 if loss == 0 else -math.inf)
    out[ok] = np.exp(0.5 * (logbin + logt + logl))
    return out


def loss_channel(state: TwoModeFockState, mode: str,
                 transmittance: float) -> TwoModeFockState:
    """Pure-loss channel of the given transmittance on mode 'c' or 'd'.

    Implemented as the Kraus decomposition of a beam splitter coupling the
    mode to an ancilla vacuum that is then traced out; K_l removes exactly l
    photons.  Trace-preserving on the truncated space.  Unit tests verify the
    equivalence to the explicit ancilla construction at small dimension.
    """
    if mode not in ("c", "d"):
        raise ValueError(f"mode must be 'c' or 'd', got {mode!r}")
    if not (0.0 <= transmittance <= 1.0):
        raise ValueError(f"transmittance must be in [0, 1], got {transmittance}")
    L = state.levels
    if transmittance == 1.0:
        return state

    if state.storage == "blocks":
        weights, blocks = state._payload
        new_w, new_b = [], []
        for w, b in zip(weights, blocks):
            n = len(b) - 1
            ks = np.arange(n + 1)
            for loss in range(n + 1):
                if mode == "c":
                    gam = _kraus_factors(ks, loss, transmittance)
                    vec = (gam * b)[loss:]
                else:
                    gam = _kraus_factors(n - ks, loss, transmittance)
                    vec = (gam * b)[:n + 1 - loss]
                wt = w * float(np.sum(np.abs(vec) ** 2))
                if wt > 1e-16:
                    norm = math.sqrt(float(np.sum(np.abs(vec) ** 2)))
                    new_w.append(wt)
                    new_b.append(vec / norm)
        return TwoModeFockState.from_block_mixture(state.cutoff, new_w, new_b)

    if state.storage == "pure":
        pure_members = [(1.0, state.amplitudes)]
    else:
        w0, m0 = state._payload
        pure_members = list(zip(w0, m0))

    ns = np.arange(L)
    new_w, new_m = [], []
    for w, amp in pure_members:
        for loss in range(L):
            gam = _kraus_factors(ns, loss, transmittance)
            if mode == "c":
                out = (gam[:, None] * amp)[loss:, :]
                out = np.vstack([out, np.zeros((loss, L), dtype=complex)])
            else:
                out = (gam[None, :] * amp)[:, loss:]
                out = np.hstack([out, np.zeros((L, loss), dtype=complex)])
            wt = w * float(np.sum(np.abs(out) ** 2))
            if wt > 1e-16:
                norm = math.sqrt(float(np.sum(np.abs(out) ** 2)))
                new_w.append(wt)
                new_m.append(out / norm)
    return TwoModeFockState.from_mixture(state.cutoff, new_w, new_m)


# ---------------------------------------------------------------------------
# expectation values
# ---------------------------------------------------------------------------

def _pure_expectation(amp: np.ndarray, A: np.ndarray, B: np.ndarray) -> complex:
    # <psi| A (x) B |psi> with row-major (c, d) ordering: (A (x) B) vec(amp)
    # reshapes to A @ amp @ B.T.
    return complex(np.sum(amp.conj() * (A @ amp @ B.T)))


def _nonzero_diagonals(mat: np.ndarray) -> list[int]:
    L = mat.shape[0]
    return [off for off in range(-(L - 1), L)
            if np.any(np.diagonal(mat, off))]


def _block_expectation(weights, blocks, A: np.ndarray, B: np.ndarray) -> complex:
    """Mixture expectation when every member lives in one total-photon block.

    For member |phi> = sum_k c_k |k, n-k>, the matrix element couples k to
    k' = k - delta through A[k, k'] and B[n-k, n-k']; only offsets where A
    carries the -delta diagonal and B the +delta diagonal contribute, which
    makes the contraction linear in the block size for banded operators.
    """
    offs_a = set(_nonzero_diagonals(A))
    offs_b = set(_nonzero_diagonals(B))
    # A[k, k-delta] lives on diagonal -delta; B[n-k, n-k+delta] on +delta.
    deltas = [-oa for oa in offs_a if oa in offs_b]
    total = 0.0 + 0.0j
    for w, b in zip(weights, blocks):
        n = len(b) - 1
        acc = 0.0 + 0.0j
        for delta in deltas:
            lo, hi = max(0, delta), n + min(0, delta)
            if lo > hi:
                continue
            ks = np.arange(lo, hi + 1)
            acc += np.sum(b[ks].conj() * b[ks - delta]
                          * A[ks, ks - delta] * B[n - ks, n - ks + delta])
        total += w * acc
    return complex(total)


def expectation(state: TwoModeFockState, op_c=None, op_d=None) -> complex:
    """Expectation value of ``op_c (x) op_d``; None means identity.

    Operators may be ModeOperator instances or raw (levels x levels) arrays.
    """
    L = state.levels
    A = _as_matrix(op_c, L)
    B = _as_matrix(op_d, L)
    if state.storage == "pure":
        return _pure_expectation(state.amplitudes, A, B)
    weights, members = state._payload
    if state.storage == "blocks":
        return _block_expectation(weights, members, A, B)
    return complex(sum(w * _pure_expectation(m, A, B) for w, m in zip(weights, members)))


def mean_photons(state: TwoModeFockState) -> tuple[float, float]:
    """(mean n_c, mean n_d)."""
    n = mode_operator("number", state.levels)
    return (expectation(state, n, None).real, expectation(state, None, n).real)


def photon_difference_second_moment(state: TwoModeFockState) -> float:
    """<(n_c - n_d)^2>, evaluated on the difference operator directly.

    Applying n_c - n_d before squaring keeps the result exactly zero for
    perfectly number-correlated states (the TMSV), where assembling it from
    <n_c^2> + <n_d^2> - 2 <n_c n_d> would leave rounding residue.
    """
    if state.storage == "blocks":
        weights, blocks = state._payload
        total = 0.0
        for w, b in zip(weights, blocks):
            n = len(b) - 1
            ks = np.arange(n + 1)
            total += w * float(np.sum(np.abs(b) ** 2 * (2.0 * ks - n) ** 2))
        return total
    num = np.arange(state.levels, dtype=float)
    if state.storage == "pure":
        members = [(1.0, state.amplitudes)]
    else:
        members = list(zip(*state._payload))

    def member_value(amp):
        diff = num[:, None] * amp - amp * num[None, :]
        return float(np.sum(np.abs(diff) ** 2))

    return float(sum(w * member_value(m) for w, m in members))


def quadrature_difference_second_moment(state: TwoModeFockState) -> float:
    """<(x_c - x_d)^2> for the in-phase quadratures, via the difference
    operator (manifestly non-negative)."""
    x = mode_operator("quadrature_in", state.levels).matrix

    def member_value(amp):
        diff = x @ amp - amp @ x.T
        return float(np.sum(np.abs(diff) ** 2))

    if state.storage == "pure":
        return member_value(state.amplitudes)
    weights, members = state._payload
    if state.storage == "mixture":
        return float(sum(w * member_value(m) for w, m in zip(weights, members)))
    total = 0.0
    for w, b in zip(weights, members):
        n = len(b) - 1
        ks = np.arange(n + 1, dtype=float)
        # (x_c - x_d)|phi> lives in the two adjacent total-photon blocks.
        low = np.zeros(max(n, 1), dtype=complex)
        high = np.zeros(n + 2, dtype=complex)
        if n >= 1:
            js = np.arange(n)
            low[js] = 0.5 * (b[js + 1] * np.sqrt(js + 1.0) - b[js] * np.sqrt(n - js))
        js = np.arange(n + 2)
        high[1:] += 0.5 * b * np.sqrt(np.arange(1.0, n + 2.0))
        high[:n + 1] -= 0.5 * b * np.sqrt(n - ks + 1.0)
        total += w * (float(np.sum(np.abs(low) ** 2)) + float(np.sum(np.abs(high) ** 2)))
    return total
