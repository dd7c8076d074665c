"""Source definitions for the three correlated two-mode light sources.

Every source is parameterized by the mean photon number per output mode,
``n_per_mode``.  The internal source parameters follow from it:

* PDC: amplifier gain ``G = n_per_mode + 1`` (two-mode squeezed vacuum).
* Split coherent: input amplitude ``alpha = sqrt(2 * n_per_mode)``, real and
  positive, split on a 50/50 beam splitter.
* Split thermal: input thermal mean ``2 * n_per_mode``, split 50/50.

The factor of two for the split sources reflects that the 50/50 splitter
halves the input mean, so each output mode carries ``n_per_mode``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class SourceKind(enum.Enum):
    PDC = "pdc"
    COHERENT_SPLIT = "coherent"
    THERMAL_SPLIT = "thermal"


@dataclass(frozen=True)
class SourceSpec:
    """One of the three light sources, normalized to a per-mode mean photon number."""

    kind: SourceKind
    n_per_mode: float

    def __post_init__(self):
        if not isinstance(self.kind, SourceKind):
            raise TypeError(f"kind must be a SourceKind, got {self.kind!r}")
        if not (self.n_per_mode >= 0.0) or not math.isfinite(self.n_per_mode):
            raise ValueError(f"n_per_mode must be finite and >= 0, got {self.n_per_mode}")

    @property
    def gain(self) -> float:
        """Amplifier power gain G for the PDC source (mean photons per mode = G - 1)."""
        if self.kind is not SourceKind.PDC:
            raise ValueError("gain is defined only for the PDC source")
        return self.n_per_mode + 1.0

    @property
    def alpha(self) -> float:
        """Input coherent amplitude (real, positive convention) for the split coherent source."""
        if self.kind is not SourceKind.COHERENT_SPLIT:
            raise ValueError("alpha is defined only for the split coherent source")
        return math.sqrt(2.0 * self.n_per_mode)

    @property
    def input_mean(self) -> float:
        """Mean photon number of the thermal input beam before the 50/50 split."""
        if self.kind is not SourceKind.THERMAL_SPLIT:
            raise ValueError("input_mean is defined only for the split thermal source")
        return 2.0 * self.n_per_mode


def pdc(n_per_mode: float) -> SourceSpec:
    return SourceSpec(SourceKind.PDC, float(n_per_mode))


def coherent_split(n_per_mode: float) -> SourceSpec:
    return SourceSpec(SourceKind.COHERENT_SPLIT, float(n_per_mode))


def thermal_split(n_per_mode: float) -> SourceSpec:
    return SourceSpec(SourceKind.THERMAL_SPLIT, float(n_per_mode))


def source_from_name(name: str, n_per_mode: float) -> SourceSpec:
    """Build a SourceSpec from a CLI-style source name ('pdc', 'coherent', 'thermal')."""
    for kind in SourceKind:
        if kind.value == name:
            return SourceSpec(kind, float(n_per_mode))
    raise ValueError(f"unknown source name {name!r}; expected one of "
                     + ", ".join(k.value for k in SourceKind))
