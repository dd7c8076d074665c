"""Desk-scale correlated-imaging experiment over pairwise-correlated mode pairs.

Each pixel of the scene owns one independent source mode pair; the object
arm passes through an absorbing mask of per-pixel power transmittance t,
modeled as binomial thinning of the photon counts (the exact count-level
action of a loss channel); the reference arm is untouched.  Two
reconstructions are provided:

* fluctuation correlation: per-pixel covariance of the two arms, which is
  proportional to t for the PDC and thermal sources and pure noise for the
  split coherent source;
* difference signal: per-pixel mean of (reference - object), which equals
  n * (1 - t) for every source; its blank-scene per-shot variance realizes
  the V_I noise floors, so the PDC pair detects small absorptions with far
  fewer shots than the classical sources.

Pixel (0, 0) is the calibration pixel: bundled masks force t = 1 there so
the fluctuation method can fit its proportionality constant without theory
input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlators import closed_forms
from .sampling import (RngConfig, batch_means_stderr, sample_counts, shard_sizes,
                       substream, _draw_counts)
from .sources import SourceSpec

MAX_GRID = 256
MAX_TOTAL_SAMPLES = 10 ** 9

_DOMAIN_PIXEL = 2
_DOMAIN_THINNING = 3
_DOMAIN_DETECTION = 4


@dataclass(frozen=True)
class ImagingScene:
    """Pixel grid, object mask, source, and shot budget for one experiment."""

    mask: np.ndarray
    source: SourceSpec
    shots_per_pixel: int
    rng: RngConfig

    def __post_init__(self):
        mask = np.clip(np.asarray(self.mask, dtype=float), 0.0, 1.0)
        object.__setattr__(self, "mask", mask)
        if mask.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
        if mask.shape[0] > MAX_GRID or mask.shape[1] > MAX_GRID:
            raise ValueError(f"grid {mask.shape} exceeds the desk-scale cap {MAX_GRID}x{MAX_GRID}")
        if self.shots_per_pixel < 1:
            raise ValueError("shots_per_pixel must be >= 1")
        if self.shots_per_pixel * mask.size > MAX_TOTAL_SAMPLES:
            raise ValueError(
                f"total sample budget {self.shots_per_pixel * mask.size} exceeds "
                f"{MAX_TOTAL_SAMPLES}")

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def width(self) -> int:
        return self.mask.shape[1]


@dataclass(frozen=True)
class SceneCounts:
    """Per-pixel count records: arrays of shape (height, width, shots)."""

    scene: ImagingScene
    counts_object: np.ndarray
    counts_reference: np.ndarray


@dataclass(frozen=True)
class ImagingResult:
    """A reconstruction with per-pixel standard errors.

    ``reconstruction`` is in transmittance units when ``calibrated`` (both
    methods aim at t-hat); ``raw`` keeps the uncalibrated per-pixel statistic
    of the fluctuation method (the covariance) for significance tests.
    ``summary_snr`` is an artifact-defined figure: the mean of
    |reconstruction - 1| / stderr over the pixels where the true mask absorbs.
    """

    method: str
    reconstruction: np.ndarray
    stderr: np.ndarray
    summary_snr: float
    calibrated: bool = True
    calibration_constant: float | None = None
    raw: np.ndarray | None = None
    raw_stderr: np.ndarray | None = None
    difference_variance: np.ndarray | None = None


def pixel_seed(rng: RngConfig, pixel_index: int) -> int:
    """Derived 64-bit seed for one pixel's sample stream."""
    ss = np.random.SeedSequence(rng.seed, spawn_key=(_DOMAIN_PIXEL, pixel_index))
    return int(ss.generate_state(1, np.uint64)[0])


def simulate_scene(scene: ImagingScene) -> SceneCounts:
    """Correlated count pairs for every pixel, object arm thinned by the mask.

    Pixel streams are independent substreams of the scene seed; each pixel's
    unthinned pair is exactly ``sample_counts`` under its derived seed, and
    thinning draws from a separate per-pixel stream, so a t = 1 pixel
    reproduces the source record bit for bit.
    """
    shots = scene.shots_per_pixel
    h, w = scene.mask.shape
    obj = np.empty((h, w, shots), dtype=np.int64)
    ref = np.empty((h, w, shots), dtype=np.int64)
    flat = scene.mask.reshape(-1)
    for p in range(h * w):
        rec = sample_counts(scene.source, shots,
                            RngConfig(pixel_seed(scene.rng, p), scene.rng.shards))
        c = rec.counts_c
        t = flat[p]
        if t < 1.0:
            g = substream(scene.rng.seed, _DOMAIN_THINNING, p)
            c = g.binomial(c, t)
        i, j = divmod(p, w)
        obj[i, j] = c
        ref[i, j] = rec.counts_d
    return SceneCounts(scene=scene, counts_object=obj, counts_reference=ref)


def reconstruct_fluctuation(records: SceneCounts, scene: ImagingScene | None = None) -> ImagingResult:
    """Ghost image from per-pixel covariance of the two arms.

    The covariance is proportional to t; the constant is fitted on the
    calibration pixel (0, 0), which must have t = 1 in the true mask.  When
    the calibration covariance is statistically indistinguishable from zero
    (the coherent source), the raw covariances are returned uncalibrated.
    """
    scene = scene or records.scene
    if scene.mask[0, 0] < 1.0:
        raise ValueError("calibration pixel (0, 0) must have transmittance 1")
    obj = records.counts_object.astype(float)
    ref = records.counts_reference.astype(float)
    h, w, shots = obj.shape

    centered = (obj - obj.mean(axis=2, keepdims=True)) * (ref - ref.mean(axis=2, keepdims=True))
    raw = centered.mean(axis=2)
    raw_se = np.empty((h, w))
    for p in range(h * w):
        i, j = divmod(p, w)
        raw_se[i, j] = batch_means_stderr(centered[i, j])

    k = float(raw[0, 0])
    k_se = float(raw_se[0, 0])
    calibrated = abs(k) > 5.0 * k_se and k != 0.0
    if calibrated:
        rec = raw / k
        se = raw_se / abs(k)
    else:
        rec = raw.copy()
        se = raw_se.copy()
    snr = _summary_snr(rec, se, scene.mask, blank_level=1.0 if calibrated else k)
    return ImagingResult(method="fluctuation_correlation", reconstruction=rec,
                         stderr=se, summary_snr=snr, calibrated=calibrated,
                         calibration_constant=k, raw=raw, raw_stderr=raw_se)


def reconstruct_difference(records: SceneCounts, scene: ImagingScene | None = None) -> ImagingResult:
    """Absorption image from the mean reference-minus-object count difference.

    mean(ref - obj) per shot equals n (1 - t), so t-hat = 1 - mean_diff / n.
    The per-pixel per-shot variance of the difference is also reported; on a
    blank scene it realizes the V_I noise floor of the source.
    """
    scene = scene or records.scene
    n = scene.source.n_per_mode
    if n <= 0.0:
        raise ValueError("difference imaging needs a source with n_per_mode > 0")
    diff = records.counts_reference.astype(float) - records.counts_object.astype(float)
    h, w, shots = diff.shape
    mean_diff = diff.mean(axis=2)
    se = np.empty((h, w))
    for p in range(h * w):
        i, j = divmod(p, w)
        se[i, j] = batch_means_stderr(diff[i, j])
    rec = 1.0 - mean_diff / n
    rec_se = se / n
    var = diff.var(axis=2)
    snr = _summary_snr(rec, rec_se, scene.mask, blank_level=1.0)
    return ImagingResult(method="difference_signal", reconstruction=rec,
                         stderr=rec_se, summary_snr=snr,
                         difference_variance=var)


def _summary_snr(rec: np.ndarray, se: np.ndarray, mask: np.ndarray,
                 blank_level: float) -> float:
    signal = mask < 1.0
    if not np.any(signal):
        return 0.0
    safe_se = np.where(se > 0.0, se, np.inf)
    return float(np.mean(np.abs(rec[signal] - blank_level) / safe_se[signal]))


def predicted_noise_floor(source: SourceSpec) -> tuple[float, float]:
    """(V_I, V_i) theory lines for annotating imaging results."""
    report = closed_forms(source)
    return report.V_I, report.V_i


def shots_for_detection(source: SourceSpec, transmittance: float, rng: RngConfig,
                        target_sigma: float = 5.0, start_shots: int = 250,
                        max_shots: int = 2 ** 24) -> int:
    """Smallest shot count on a doubling grid at which the absorption
    1 - transmittance on a single pixel is detected at ``target_sigma``
    via the difference signal.  Deterministic for a fixed RngConfig."""
    if not (0.0 <= transmittance < 1.0):
        raise ValueError("transmittance must be in [0, 1) so there is something to detect")
    shots = start_shots
    trial = 0
    while shots <= max_shots:
        sizes = shard_sizes(shots, rng.shards)
        parts_c, parts_d = [], []
        for shard, size in enumerate(sizes):
            if size == 0:
                continue
            g = substream(rng.seed, _DOMAIN_DETECTION, trial, shard)
            c, d = _draw_counts(source, size, g)
            parts_c.append(g.binomial(c, transmittance))
            parts_d.append(d)
        diff = np.concatenate(parts_d).astype(float) - np.concatenate(parts_c)
        se = float(np.std(diff, ddof=1) / math.sqrt(shots))
        if se > 0.0 and float(diff.mean()) / se >= target_sigma:
            return shots
        shots *= 2
        trial += 1
    raise RuntimeError(
        f"no {target_sigma} sigma detection of absorption {1 - transmittance} "
        f"within {max_shots} shots")


def demo_mask(name: str, width: int = 32, height: int = 32) -> np.ndarray:
    """Bundled demo masks; 'bars' alternates opaque and clear 4-pixel
    vertical bars, with the calibration pixel (0, 0) in a clear bar."""
    if name != "bars":
        raise ValueError(f"unknown demo mask {name!r}; available: 'bars'")
    mask = np.ones((height, width))
    for x in range(width):
        if (x // 4) % 2 == 1:
            mask[:, x] = 0.0
    mask[0, 0] = 1.0
    return mask
