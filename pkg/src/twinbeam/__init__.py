"""Two-mode correlated-light statistics engine with a ghost-imaging demo.

Three mutually cross-checking backends compute the intensity and quadrature
correlation functions and difference-noise floors of three correlated light
sources (parametric down-conversion, split coherent, split thermal):

* :mod:`twinbeam.fock` - truncated Fock-space operator algebra (oracle);
* :mod:`twinbeam.gaussian` - exact quadrature-moment calculus;
* :mod:`twinbeam.sampling` - seeded Monte Carlo photon counting and homodyne.

:mod:`twinbeam.correlators` holds the closed forms and assembles reports,
and :mod:`twinbeam.imaging` runs the correlated-imaging experiment whose
noise floors those numbers predict.
"""

__version__ = "0.1.0"

from .correlators import (CorrelationReport, closed_forms, correlations_via_backend,
                          figure_curves, normalized_correlation)
from .fock import (FockCutoff, ModeOperator, TwoModeFockState, beam_splitter_unitary,
                   choose_cutoff, expectation, loss_channel, make_source_state,
                   make_split_coherent, make_split_thermal, make_tmsv)
from .gaussian import (GaussianTwoModeState, PhotonMoments, difference_variances,
                       gaussian_from_source, photon_moments, quadrature_correlation)
from .imaging import (ImagingResult, ImagingScene, demo_mask, predicted_noise_floor,
                      reconstruct_difference, reconstruct_fluctuation,
                      shots_for_detection, simulate_scene)
from .sampling import (CountRecord, QuadratureRecord, RngConfig, estimate_report,
                       sample_counts, sample_quadratures, write_record_csv)
from .sources import SourceKind, SourceSpec, coherent_split, pdc, thermal_split

__all__ = [
    "CorrelationReport", "CountRecord", "FockCutoff", "GaussianTwoModeState",
    "ImagingResult", "ImagingScene", "ModeOperator", "PhotonMoments",
    "QuadratureRecord", "RngConfig", "SourceKind", "SourceSpec", "TwoModeFockState",
    "beam_splitter_unitary", "choose_cutoff", "closed_forms", "coherent_split",
    "correlations_via_backend", "demo_mask", "difference_variances", "estimate_report",
    "expectation", "figure_curves", "gaussian_from_source", "loss_channel",
    "make_source_state", "make_split_coherent", "make_split_thermal", "make_tmsv",
    "normalized_correlation", "pdc", "photon_moments", "predicted_noise_floor",
    "quadrature_correlation", "reconstruct_difference", "reconstruct_fluctuation",
    "sample_counts", "sample_quadratures", "shots_for_detection", "simulate_scene",
    "thermal_split", "write_record_csv",
]
