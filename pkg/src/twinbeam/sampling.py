"""Seeded Monte Carlo photon-count and homodyne records with batch-means errors.

Sampling recipes (exact, not approximate):

* PDC counts: one geometric (Bose-Einstein) draw per shot, written to both
  modes; the pair correlation is perfect by construction.
* Split coherent counts: two independent Poisson draws per shot (a split
  coherent state is a product of coherent states).
* Split thermal counts: draw the input complex amplitude from the thermal
  phase-space (circular Gaussian) distribution, split it on the 50/50
  beam splitter, then draw independent Poisson counts conditioned on the
  per-arm intensities.  This is the P-representation construction; the two
  arms share the amplitude fluctuations, which carries the correlations.
* Homodyne quadratures: exact bivariate Gaussian marginals of the source's
  Gaussian state for the chosen quadrature pair.

Reproducibility: streams are keyed by (seed, domain, shard) through
SeedSequence spawn keys, so identical RngConfig and parameters give
bit-identical records no matter how shards are scheduled; shard results are
concatenated in shard order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlators import VARIANCE_FLOOR, CorrelationReport, normalized_correlation
from .gaussian import gaussian_from_source, quadrature_pair_moments
from .sources import SourceKind, SourceSpec

N_BATCHES = 100  # batch-means batches; fixed, documented constant
MAX_SHOTS = 10 ** 9

_DOMAIN_COUNTS = 0
_DOMAIN_QUADRATURES = 1
# Domains 2+ are claimed by the imaging module for per-pixel streams.


@dataclass(frozen=True)
class RngConfig:
    """Root seed plus the number of independent substreams (shards)."""

    seed: int
    shards: int = 1

    def __post_init__(self):
        if not (0 <= self.seed < 2 ** 64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.shards < 1:
            raise ValueError(f"shards must be >= 1, got {self.shards}")


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for a (seed, key...) path in the stream tree."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def shard_sizes(shots: int, shards: int) -> list[int]:
    base, extra = divmod(shots, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


@dataclass(frozen=True)
class CountRecord:
    source: SourceSpec
    shots: int
    counts_c: np.ndarray
    counts_d: np.ndarray

    def __post_init__(self):
        if len(self.counts_c) != self.shots or len(self.counts_d) != self.shots:
            raise ValueError("count arrays must have length shots")


@dataclass(frozen=True)
class QuadratureRecord:
    source: SourceSpec
    phase: str
    shots: int
    q_c: np.ndarray
    q_d: np.ndarray

    def __post_init__(self):
        if len(self.q_c) != self.shots or len(self.q_d) != self.shots:
            raise ValueError("quadrature arrays must have length shots")


def _draw_counts(source: SourceSpec, size: int, rng: np.random.Generator):
    """One shard of photon-count pairs; the draw order per shard is fixed."""
    n = source.n_per_mode
    if source.kind is SourceKind.PDC:
        k = rng.geometric(1.0 / (n + 1.0), size=size).astype(np.int64) - 1
        return k, k.copy()
    if source.kind is SourceKind.COHERENT_SPLIT:
        c = rng.poisson(n, size=size).astype(np.int64)
        d = rng.poisson(n, size=size).astype(np.int64)
        return c, d
    # Split thermal: amplitude mixture plus conditional Poisson counts.
    # E|a|^2 = 2n (the input mean), and each arm sees intensity |a|^2 / 2.
    sigma = math.sqrt(n)
    re = rng.normal(0.0, sigma, size=size)
    im = rng.normal(0.0, sigma, size=size)
    intensity = 0.5 * (re ** 2 + im ** 2)
    c = rng.poisson(intensity).astype(np.int64)
    d = rng.poisson(intensity).astype(np.int64)
    return c, d


def sample_counts(source: SourceSpec, shots: int, rng: RngConfig) -> CountRecord:
    """Photon-count record of the given source over ``shots`` shots."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if shots > MAX_SHOTS:
        raise ValueError(f"shots {shots} exceeds the budget guard {MAX_SHOTS}")
    parts_c, parts_d = [], []
    for shard, size in enumerate(shard_sizes(shots, rng.shards)):
        if size == 0:
            continue
        g = substream(rng.seed, _DOMAIN_COUNTS, shard)
        c, d = _draw_counts(source, size, g)
        parts_c.append(c)
        parts_d.append(d)
    return CountRecord(source=source, shots=shots,
                       counts_c=np.concatenate(parts_c),
                       counts_d=np.concatenate(parts_d))


def sample_quadratures(source: SourceSpec, phase: str, shots: int,
                       rng: RngConfig) -> QuadratureRecord:
    """Homodyne record: (q_c, q_d) pairs from the exact Gaussian marginal."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if shots > MAX_SHOTS:
        raise ValueError(f"shots {shots} exceeds the budget guard {MAX_SHOTS}")
    mean, cov = quadrature_pair_moments(gaussian_from_source(source), phase)
    try:
        chol = np.linalg.cholesky(cov + 0.0)
    except np.linalg.LinAlgError as exc:  # valid states always factor
        raise RuntimeError(f"internal error: quadrature covariance failed to factor: {exc}")
    parts_c, parts_d = [], []
    for shard, size in enumerate(shard_sizes(shots, rng.shards)):
        if size == 0:
            continue
        g = substream(rng.seed, _DOMAIN_QUADRATURES, shard)
        z = g.standard_normal((2, size))
        q = chol @ z + mean[:, None]
        parts_c.append(q[0])
        parts_d.append(q[1])
    return QuadratureRecord(source=source, phase=phase, shots=shots,
                            q_c=np.concatenate(parts_c), q_d=np.concatenate(parts_d))


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def batch_means_stderr(values: np.ndarray, n_batches: int = N_BATCHES) -> float:
    """Standard error of the mean of ``values`` from batch means."""
    m = len(values) // n_batches
    if m < 1:
        raise ValueError(f"need at least {n_batches} samples, got {len(values)}")
    batches = np.asarray(values, dtype=float)[:m * n_batches].reshape(n_batches, m)
    return float(np.std(batches.mean(axis=1), ddof=1) / math.sqrt(n_batches))


def _plugin_correlation(a: np.ndarray, b: np.ndarray) -> float | None:
    # One centered route for all three second moments, so perfectly
    # correlated arrays give exactly 1.0 rather than 1 + rounding noise.
    da = a - a.mean()
    db = b - b.mean()
    va = float(np.mean(da * da))
    vb = float(np.mean(db * db))
    cov = float(np.mean(da * db))
    return normalized_correlation(cov, va, vb)


def estimate_report(record) -> CorrelationReport:
    """Plug-in estimates of C and V from a record, with batch-means errors.

    Works on CountRecord (intensity quantities) and QuadratureRecord
    (quadrature quantities); the unrelated pair of fields is left as None/0
    in the report.  Needs at least 100 shots for the error batches.
    """
    if isinstance(record, CountRecord):
        a = record.counts_c.astype(float)
        b = record.counts_d.astype(float)
        intensity = True
    elif isinstance(record, QuadratureRecord):
        a = np.asarray(record.q_c, dtype=float)
        b = np.asarray(record.q_d, dtype=float)
        intensity = False
    else:
        raise TypeError(f"expected a CountRecord or QuadratureRecord, got {type(record)}")
    if record.shots < N_BATCHES:
        raise ValueError(f"need at least {N_BATCHES} shots for batch means, got {record.shots}")

    corr = _plugin_correlation(a, b)
    sq_diff = (a - b) ** 2
    v = float(np.mean(sq_diff))
    stderr_v = batch_means_stderr(sq_diff)

    if corr is None:
        stderr_c = 0.0
    else:
        m = record.shots // N_BATCHES
        cs = []
        for i in range(N_BATCHES):
            ca = a[i * m:(i + 1) * m]
            cb = b[i * m:(i + 1) * m]
            cbatch = _plugin_correlation(ca, cb)
            if cbatch is None:
                cbatch = corr  # degenerate batch; contributes no spread
            cs.append(cbatch)
        stderr_c = float(np.std(np.array(cs), ddof=1) / math.sqrt(N_BATCHES))

    if intensity:
        return CorrelationReport(source=record.source, backend="monte_carlo",
                                 C_I=corr, C_i=None, V_I=v, V_i=0.0,
                                 stderr_C_I=stderr_c, stderr_V_I=stderr_v)
    return CorrelationReport(source=record.source, backend="monte_carlo",
                             C_I=None, C_i=corr, V_I=0.0, V_i=v,
                             stderr_C_i=stderr_c, stderr_V_i=stderr_v)


def write_record_csv(record, path) -> None:
    """Export a record as CSV with columns shot_index,value_c,value_d."""
    if isinstance(record, CountRecord):
        ac, ad = record.counts_c, record.counts_d
        fmt = lambda v: str(int(v))
    else:
        ac, ad = record.q_c, record.q_d
        fmt = lambda v: format(float(v), ".17g")
    with open(path, "w") as fh:
        fh.write("shot_index,value_c,value_d\n")
        for i in range(record.shots):
            fh.write(f"{i},{fmt(ac[i])},{fmt(ad[i])}\n")
