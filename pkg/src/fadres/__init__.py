"""Resonant enhancement of the interaction between two heavy bodies by a light
third particle, in a separable-potential three-body model."""

__version__ = "0.1.0"

from .enhancement import (  # noqa: E402
    AggregateFactor,
    EnhancementFactor,
    Regime,
    Variant,
    big_xi,
    classify,
    xi,
    xi_values,
)
from .errors import (  # noqa: E402
    EtaPole,
    FadresError,
    NonConvergence,
    ResonanceSingularity,
    SingularMatrix,
)
from .scanner import (  # noqa: E402
    ResonanceRecord,
    ScanGrid,
    find_resonance_regions,
    find_resonances,
    scan_surface,
)
from .threebody import exchange_kernel, m_amplitudes  # noqa: E402
from .twobody import Coupling, amplification, find_pair_pole, propagator_loop  # noqa: E402
from .units import PhysicalScale, rho_to_distance, t0_to_momentum  # noqa: E402
