"""Exact computations with measure-preserving actions of abelian groups."""

__version__ = "0.1.0"

from .abgroup import AbGroup, solve_group_linear, smith_normal_form  # noqa: F401
from .phases import ExactComplex, Phase, PhasePolynomial, weyl_limit  # noqa: F401
from .systems import FiniteSystem, PointFunction, TorusSystem, TrigPoly, rotation_system, skew_product  # noqa: F401
