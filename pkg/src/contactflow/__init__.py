"""Allen-Cahn gradient flow with contact-angle boundary conditions.

Finite-volume solver, varifold measures and diagnostics for the diffuse
interface limit, plus a reproducible run/sweep harness.
"""
from .energetics import EnergyModel, contact_angle, make_polynomial_model, make_quartic_model, validate_assumptions
from .errors import ContactFlowError
from .geometry import Channel2D, Disk2D, Interval1D, make_domain
from .solver import PhaseField, RunRecord, initial_profile, run, step

__all__ = [
    "Channel2D", "ContactFlowError", "Disk2D", "EnergyModel", "Interval1D", "PhaseField", "RunRecord",
    "contact_angle", "initial_profile", "make_domain", "make_polynomial_model", "make_quartic_model",
    "run", "step", "validate_assumptions",
]
__version__ = "0.1.0"
