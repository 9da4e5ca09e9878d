"""Secrecy performance of an energy-harvesting backscatter network with tag
selection under Nakagami-m fading: Monte Carlo estimation plus exact and
asymptotic closed forms for secrecy outage and intercept probability."""

from .analytic import (
    ClosedFormReport,
    ip_asymptotic,
    ip_exact,
    p1,
    sop_asymptotic,
    sop_exact,
)
from .channel import NakagamiLink
from .config import SweepSpec, load_config, loads_config
from .ehmodel import EhParams, harvested_power, optimal_reflection, phi_threshold
from .errors import ConfigParseError, NumericalInstabilityWarning, ValidationError
from .montecarlo import McConfig, MetricEstimate, estimate_all, ip_mc, sop_mc
from .system import (
    ProtocolKind,
    Receiver,
    SystemParams,
    TagRealization,
    draw_realizations,
    secrecy_capacity,
    select_tag,
    snr_at,
)

__all__ = [
    "ClosedFormReport",
    "ConfigParseError",
    "EhParams",
    "McConfig",
    "MetricEstimate",
    "NakagamiLink",
    "NumericalInstabilityWarning",
    "ProtocolKind",
    "Receiver",
    "SweepSpec",
    "SystemParams",
    "TagRealization",
    "ValidationError",
    "draw_realizations",
    "estimate_all",
    "harvested_power",
    "ip_asymptotic",
    "ip_exact",
    "ip_mc",
    "load_config",
    "loads_config",
    "optimal_reflection",
    "p1",
    "phi_threshold",
    "secrecy_capacity",
    "select_tag",
    "snr_at",
    "sop_asymptotic",
    "sop_exact",
    "sop_mc",
]

__version__ = "0.1.0"
