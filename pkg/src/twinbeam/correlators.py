"""Closed-form correlation figures of merit and their backend-agnostic assembly.

C_I and C_i are the normalized intensity and in-phase quadrature
fluctuation correlations between the two output modes; V_I and V_i are the
second moments of the photon-number difference and of the in-phase
quadrature difference (the uncorrelated-fluctuation noise floors).  As
functions of the mean photon number n per output mode:

* PDC:            C_I = 1, C_i = 2*sqrt(n(n+1))/(2n+1),
                  V_I = 0, V_i = (2n+1 - 2*sqrt(n(n+1)))/2
* split coherent: C_I = C_i = 0, V_I = 2n, V_i = 1/2
* split thermal:  C_I = n/(n+1), C_i = 2n/(2n+1), V_I = 2n, V_i = 1/2

The coherent-state floors 2n and 1/2 are the standard quantum limits.

Ratios that degenerate to 0/0 (the PDC intensity correlation at n = 0, and
any normalized correlation whose denominator variance is below 1e-14) are
reported as None rather than as a limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .sources import SourceKind, SourceSpec

VARIANCE_FLOOR = 1e-14

# Standard photon-number grid used by the cross-backend validation suite.
VALIDATION_GRID = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)


@dataclass(frozen=True)
class CorrelationReport:
    """The four figures of merit for one source, tagged with provenance.

    ``C_I`` and ``C_i`` are None when undefined (0/0).  Standard errors are
    zero for the exact backends and batch-means estimates for Monte Carlo.
    """

    source: SourceSpec
    backend: str
    C_I: float | None
    C_i: float | None
    V_I: float
    V_i: float
    stderr_C_I: float = 0.0
    stderr_C_i: float = 0.0
    stderr_V_I: float = 0.0
    stderr_V_i: float = 0.0

    def __post_init__(self):
        for name in ("C_I", "C_i"):
            value = getattr(self, name)
            if value is not None and abs(value) > 1.0 + 1e-9:
                raise ValueError(f"{name} = {value} outside [-1, 1]")
        for name in ("V_I", "V_i"):
            if getattr(self, name) < -1e-10:
                raise ValueError(f"{name} = {getattr(self, name)} is negative")


def normalized_correlation(numerator_cov: float, var_a: float, var_b: float) -> float | None:
    """cov / sqrt(var_a * var_b); None when either variance is below 1e-14."""
    if var_a < 0.0 or var_b < 0.0:
        raise ValueError(f"variances must be >= 0, got {var_a}, {var_b}")
    if var_a < VARIANCE_FLOOR or var_b < VARIANCE_FLOOR:
        return None
    return float(numerator_cov / math.sqrt(var_a * var_b))


def closed_forms(source: SourceSpec) -> CorrelationReport:
    """Evaluate the exact closed-form quantities for one source."""
    n = source.n_per_mode
    root = math.sqrt(n * (n + 1.0))
    if source.kind is SourceKind.PDC:
        c_i = 2.0 * root / (2.0 * n + 1.0)
        report = CorrelationReport(
            source=source, backend="closed_form",
            C_I=(1.0 if n > 0.0 else None), C_i=c_i,
            V_I=0.0, V_i=0.5 * (2.0 * n + 1.0 - 2.0 * root))
    elif source.kind is SourceKind.COHERENT_SPLIT:
        report = CorrelationReport(
            source=source, backend="closed_form",
            C_I=0.0, C_i=0.0, V_I=2.0 * n, V_i=0.5)
    else:
        report = CorrelationReport(
            source=source, backend="closed_form",
            C_I=n / (n + 1.0), C_i=2.0 * n / (2.0 * n + 1.0),
            V_I=2.0 * n, V_i=0.5)
    return report


def _report_from_gaussian(source: SourceSpec) -> CorrelationReport:
    from . import gaussian

    state = gaussian.gaussian_from_source(source)
    pm = gaussian.photon_moments(state)
    c_I = normalized_correlation(pm.cov_cd, pm.var_c, pm.var_d)
    c_i = gaussian.quadrature_correlation(state, "in")
    v_I, v_i = gaussian.difference_variances(state)
    return CorrelationReport(source=source, backend="gaussian",
                             C_I=c_I, C_i=c_i, V_I=v_I, V_i=v_i)


IMAG_TOL = 1e-10


def _real(value: complex) -> float:
    if abs(value.imag) > IMAG_TOL * max(1.0, abs(value.real)):
        raise ValueError(f"expectation of a Hermitian observable came out complex: {value}")
    return value.real


def _report_from_fock(source: SourceSpec, cutoff_tolerance: float) -> CorrelationReport:
    from . import fock

    cutoff = fock.choose_cutoff(source, tail_tolerance=cutoff_tolerance)
    state = fock.make_source_state(source, cutoff)
    num = fock.mode_operator("number", state.levels)
    num2 = fock.ModeOperator("number_squared", num.matrix @ num.matrix)
    x = fock.mode_operator("quadrature_in", state.levels)
    x2 = fock.ModeOperator("quadrature_in_squared", x.matrix @ x.matrix)

    e_nc = _real(fock.expectation(state, num, None))
    e_nd = _real(fock.expectation(state, None, num))
    e_nc2 = _real(fock.expectation(state, num2, None))
    e_nd2 = _real(fock.expectation(state, None, num2))
    e_ncd = _real(fock.expectation(state, num, num))

    e_xc = _real(fock.expectation(state, x, None))
    e_xd = _real(fock.expectation(state, None, x))
    e_xc2 = _real(fock.expectation(state, x2, None))
    e_xd2 = _real(fock.expectation(state, None, x2))
    e_xcd = _real(fock.expectation(state, x, x))

    c_I = normalized_correlation(e_ncd - e_nc * e_nd,
                                 e_nc2 - e_nc ** 2, e_nd2 - e_nd ** 2)
    c_i = normalized_correlation(e_xcd - e_xc * e_xd,
                                 e_xc2 - e_xc ** 2, e_xd2 - e_xd ** 2)
    # Raw second moments of the difference operators, per the noise-floor
    # definitions; evaluated on the differences so the perfectly correlated
    # TMSV yields exactly zero.
    v_I = fock.photon_difference_second_moment(state)
    v_i = fock.quadrature_difference_second_moment(state)
    return CorrelationReport(source=source, backend="fock",
                             C_I=c_I, C_i=c_i, V_I=v_I, V_i=v_i)


def correlations_via_backend(source: SourceSpec, backend: str,
                             cutoff_tolerance: float = 1e-10) -> CorrelationReport:
    """Assemble the four quantities from the chosen backend's moment
    primitives ('fock' or 'gaussian')."""
    if backend == "gaussian":
        return _report_from_gaussian(source)
    if backend == "fock":
        return _report_from_fock(source, cutoff_tolerance)
    raise ValueError(f"backend must be 'fock' or 'gaussian', got {backend!r}")


# ---------------------------------------------------------------------------
# figure data
# ---------------------------------------------------------------------------

FIGURES = (2, 3, 4, 5)

# What each figure plots against n: the correlations, or the noise floors
# normalized so the coherent-state standard quantum limit sits at 1
# (2n for intensity, 1/2 for the quadrature difference).


@dataclass(frozen=True)
class FigureTable:
    figure: int
    n: tuple[float, ...]
    pdc: tuple[float | None, ...]
    coherent: tuple[float | None, ...]
    thermal: tuple[float | None, ...]

    def rows(self):
        for i, n in enumerate(self.n):
            yield n, self.pdc[i], self.coherent[i], self.thermal[i]


def _figure_value(figure: int, report: CorrelationReport) -> float | None:
    n = report.source.n_per_mode
    if figure == 2:
        return report.C_I
    if figure == 3:
        return report.C_i
    if figure == 4:
        if n <= 0.0:
            return None
        return report.V_I / (2.0 * n)
    if figure == 5:
        return report.V_i / 0.5
    raise ValueError(f"figure must be one of {FIGURES}, got {figure}")


def figure_curves(figure: int, n_grid) -> FigureTable:
    """Closed-form curve data for one of the four figures over a photon
    number grid; undefined entries are None."""
    if figure not in FIGURES:
        raise ValueError(f"figure must be one of {FIGURES}, got {figure}")
    grid = tuple(float(n) for n in n_grid)
    if any(n < 0.0 for n in grid):
        raise ValueError("n_grid values must be >= 0")
    columns = {kind: [] for kind in SourceKind}
    for n in grid:
        for kind in SourceKind:
            report = closed_forms(SourceSpec(kind, n))
            columns[kind].append(_figure_value(figure, report))
    return FigureTable(figure=figure, n=grid,
                       pdc=tuple(columns[SourceKind.PDC]),
                       coherent=tuple(columns[SourceKind.COHERENT_SPLIT]),
                       thermal=tuple(columns[SourceKind.THERMAL_SPLIT]))
