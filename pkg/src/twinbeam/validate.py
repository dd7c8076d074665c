"""Cross-backend validation suite behind the `twinbeam validate` command.

Every check compares two independent routes to the same number (closed
form, Gaussian moments, Fock contraction, Monte Carlo) and reports the
worst observed deviation against a fixed tolerance.  The 'fast' profile
skips the million-shot Monte Carlo checks, keeping only the exact-backend
comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import correlators, fock, gaussian, imaging, sampling
from .sources import SourceKind, SourceSpec

GRID = correlators.VALIDATION_GRID
MC_GRID = (0.5, 1.0, 2.0)
MC_SHOTS = 10 ** 6
MC_SEED = 20240808
GAUSSIAN_TOL = 1e-12
FOCK_TOL = 1e-8
FOCK_TAIL = 1e-10
MC_SIGMA = 5.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _report_values(report):
    return {"C_I": report.C_I, "C_i": report.C_i, "V_I": report.V_I, "V_i": report.V_i}


def _max_report_deviation(got, want) -> float:
    worst = 0.0
    got_v, want_v = _report_values(got), _report_values(want)
    for key in got_v:
        g, w = got_v[key], want_v[key]
        if (g is None) != (w is None):
            return math.inf
        if g is not None:
            worst = max(worst, abs(g - w))
    return worst


def _all_sources(n: float):
    return [SourceSpec(kind, n) for kind in SourceKind]


def check_backend_against_closed_forms(backend: str, tol: float) -> CheckResult:
    worst, where = 0.0, ""
    for n in GRID:
        for source in _all_sources(n):
            got = correlators.correlations_via_backend(source, backend,
                                                       cutoff_tolerance=FOCK_TAIL)
            dev = _max_report_deviation(got, correlators.closed_forms(source))
            if dev > worst:
                worst, where = dev, f"{source.kind.value} n={n}"
    return CheckResult(
        name=f"{backend} backend vs closed forms",
        passed=worst < tol,
        detail=f"max deviation {worst:.3e} at {where} (tol {tol:.0e})")


def check_generation_symmetry() -> CheckResult:
    """Mean photon number must match between the two output modes."""
    worst = 0.0
    for n in GRID:
        for source in _all_sources(n):
            state = fock.make_source_state(
                source, fock.choose_cutoff(source, tail_tolerance=FOCK_TAIL))
            nc, nd = fock.mean_photons(state)
            worst = max(worst, abs(nc - nd))
    return CheckResult("mode-symmetry <n_c> = <n_d> (fock)", worst < 1e-10,
                       f"max |<n_c> - <n_d>| = {worst:.3e} (tol 1e-10)")


def check_symplectic_bound() -> CheckResult:
    worst = math.inf
    for n in GRID + (0.0,):
        for source in _all_sources(n):
            state = gaussian.gaussian_from_source(source)
            worst = min(worst, float(np.min(state.symplectic_eigenvalues())))
    return CheckResult("uncertainty bound on symplectic spectrum", worst > 0.25 - 1e-12,
                       f"min symplectic eigenvalue {worst:.12f} (bound 0.25)")


def check_phase_symmetry() -> CheckResult:
    """In-phase and out-of-phase correlation magnitudes must agree.

    The PDC out-of-phase covariance is negative (anticorrelated p
    quadratures), so the comparison is on |C|.
    """
    worst = 0.0
    for n in GRID:
        for source in _all_sources(n):
            state = gaussian.gaussian_from_source(source)
            cin = gaussian.quadrature_correlation(state, "in")
            cout = gaussian.quadrature_correlation(state, "out")
            worst = max(worst, abs(abs(cin) - abs(cout)))
    return CheckResult("out-of-phase matches in-phase (|C|)", worst < 1e-10,
                       f"max | |C_in| - |C_out| | = {worst:.3e} (tol 1e-10)")


def check_pdc_quadrature_correlation(state: "fock.TwoModeFockState | None" = None,
                                     n: float = 1.0) -> CheckResult:
    """PDC quadrature correlation from the Fock state against the closed form
    2 sqrt(n(n+1)) / (2n+1).

    A state built with the wrong beam-splitter/squeezer phase flips the sign
    of the correlation and fails this check; the test suite exercises that
    negative control by injecting such a state here.
    """
    source = SourceSpec(SourceKind.PDC, n)
    if state is None:
        state = fock.make_source_state(
            source, fock.choose_cutoff(source, tail_tolerance=FOCK_TAIL))
    x = fock.mode_operator("quadrature_in", state.levels)
    x2 = fock.ModeOperator("x_squared", x.matrix @ x.matrix)
    exc2 = fock.expectation(state, x2, None).real
    exd2 = fock.expectation(state, None, x2).real
    excd = fock.expectation(state, x, x).real
    exc = fock.expectation(state, x, None).real
    exd = fock.expectation(state, None, x).real
    got = correlators.normalized_correlation(excd - exc * exd,
                                             exc2 - exc ** 2, exd2 - exd ** 2)
    want = 2.0 * math.sqrt(n * (n + 1.0)) / (2.0 * n + 1.0)
    dev = math.inf if got is None else abs(got - want)
    return CheckResult("PDC quadrature correlation (fock vs closed form)", dev < FOCK_TOL,
                       f"deviation {dev:.3e} (tol {FOCK_TOL:.0e})")


def check_tmsv_perfect_number_correlation() -> CheckResult:
    worst = 0.0
    for n in GRID:
        source = SourceSpec(SourceKind.PDC, n)
        state = fock.make_source_state(
            source, fock.choose_cutoff(source, tail_tolerance=FOCK_TAIL))
        worst = max(worst, abs(fock.photon_difference_second_moment(state)))
    return CheckResult("TMSV photon-number difference variance is zero", worst < 1e-12,
                       f"max <(n_c - n_d)^2> = {worst:.3e} (tol 1e-12)")


def check_beam_splitter_unitarity() -> CheckResult:
    cutoff = fock.FockCutoff(dim=10, tail_tolerance=1e-10)
    worst = 0.0
    for t in (0.0, 0.3, 0.5, 1.0):
        u = fock.beam_splitter_unitary(t, cutoff)
        worst = max(worst, float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))))
    ident = float(np.max(np.abs(fock.beam_splitter_unitary(1.0, cutoff)
                                - np.eye(cutoff.dim ** 2))))
    passed = worst < 1e-12 and ident < 1e-12
    return CheckResult("beam-splitter unitarity and T=1 identity", passed,
                       f"max |U+U - I| = {worst:.3e}, |U(T=1) - I| = {ident:.3e} (tol 1e-12)")


def check_rng_determinism() -> CheckResult:
    rng = sampling.RngConfig(seed=MC_SEED, shards=4)
    source = SourceSpec(SourceKind.THERMAL_SPLIT, 1.0)
    a = sampling.sample_counts(source, 10_000, rng)
    b = sampling.sample_counts(source, 10_000, rng)
    qa = sampling.sample_quadratures(source, "in", 10_000, rng)
    qb = sampling.sample_quadratures(source, "in", 10_000, rng)
    same = (np.array_equal(a.counts_c, b.counts_c)
            and np.array_equal(a.counts_d, b.counts_d)
            and np.array_equal(qa.q_c, qb.q_c) and np.array_equal(qa.q_d, qb.q_d))
    return CheckResult("seeded sampling is bit-reproducible", same,
                       "identical records on repeat" if same else "records differ on repeat")


def check_monte_carlo_convergence() -> CheckResult:
    """Every MC estimate within 5 batch-means stderr of its closed form."""
    worst, where = 0.0, ""
    rng = sampling.RngConfig(seed=MC_SEED)
    for n in MC_GRID:
        for source in _all_sources(n):
            want = correlators.closed_forms(source)
            counts = sampling.estimate_report(sampling.sample_counts(source, MC_SHOTS, rng))
            quads = sampling.estimate_report(
                sampling.sample_quadratures(source, "in", MC_SHOTS, rng))
            pairs = [
                (counts.C_I, counts.stderr_C_I, want.C_I, "C_I"),
                (counts.V_I, counts.stderr_V_I, want.V_I, "V_I"),
                (quads.C_i, quads.stderr_C_i, want.C_i, "C_i"),
                (quads.V_i, quads.stderr_V_i, want.V_i, "V_i"),
            ]
            for got, se, want_v, label in pairs:
                if want_v is None or got is None:
                    continue
                if se == 0.0:
                    if abs(got - want_v) > 0.0:
                        return CheckResult("monte carlo within 5 sigma of closed forms",
                                           False, f"{label} off with zero stderr at "
                                                  f"{source.kind.value} n={n}")
                    continue
                sigmas = abs(got - want_v) / se
                if sigmas > worst:
                    worst, where = sigmas, f"{label} {source.kind.value} n={n}"
    return CheckResult("monte carlo within 5 sigma of closed forms", worst < MC_SIGMA,
                       f"worst deviation {worst:.2f} sigma at {where}")


def check_blank_scene_noise_floor() -> CheckResult:
    """Blank-scene difference variance per shot against the V_I floors."""
    worst, where = 0.0, ""
    rng = sampling.RngConfig(seed=MC_SEED)
    for source in _all_sources(1.0):
        rec = sampling.sample_counts(source, MC_SHOTS, rng)
        diff = (rec.counts_d - rec.counts_c).astype(float)
        got = float(np.mean(diff ** 2))
        se = sampling.batch_means_stderr(diff ** 2)
        want = correlators.closed_forms(source).V_I
        if se == 0.0:
            if got != want:
                return CheckResult("blank-scene difference variance matches V_I",
                                   False, f"{source.kind.value}: {got} != {want}")
            continue
        sigmas = abs(got - want) / se
        if sigmas > worst:
            worst, where = sigmas, source.kind.value
    return CheckResult("blank-scene difference variance matches V_I", worst < MC_SIGMA,
                       f"worst deviation {worst:.2f} sigma ({where})")


def check_detection_advantage() -> CheckResult:
    """PDC must need strictly fewer shots than coherent light to see a 1%
    absorption at 5 sigma."""
    rng = sampling.RngConfig(seed=MC_SEED)
    pdc_shots = imaging.shots_for_detection(SourceSpec(SourceKind.PDC, 1.0), 0.99, rng)
    coh_shots = imaging.shots_for_detection(SourceSpec(SourceKind.COHERENT_SPLIT, 1.0), 0.99, rng)
    return CheckResult("few-photon detection advantage of PDC", pdc_shots < coh_shots,
                       f"shots to 5 sigma: pdc {pdc_shots}, coherent {coh_shots}")


def run_checks(profile: str = "strict") -> list[CheckResult]:
    if profile not in ("strict", "fast"):
        raise ValueError(f"profile must be 'strict' or 'fast', got {profile!r}")
    checks = [
        check_backend_against_closed_forms("gaussian", GAUSSIAN_TOL),
        check_backend_against_closed_forms("fock", FOCK_TOL),
        check_generation_symmetry(),
        check_symplectic_bound(),
        check_phase_symmetry(),
        check_pdc_quadrature_correlation(),
        check_tmsv_perfect_number_correlation(),
        check_beam_splitter_unitarity(),
        check_rng_determinism(),
    ]
    if profile == "strict":
        checks.append(check_monte_carlo_convergence())
        checks.append(check_blank_scene_noise_floor())
        checks.append(check_detection_advantage())
    return checks
