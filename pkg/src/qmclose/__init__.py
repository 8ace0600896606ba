"""Bounded-degree computation with finitely generated quadratic modules.

Modules: ``polyring`` (exact polynomials), ``numkernel`` (SDP/LP wrappers),
``coneengine`` (exact polyhedral cones), ``qmodule`` (certificates),
``fiberlab`` (fibre decompositions), ``seqlab`` (appendix cone model),
``cli`` (command line).
"""
from .polyring import Polynomial, parse_polynomial
from .qmodule import QuadraticModuleSpec, member, seq_member
from .instances import instance

__all__ = ["Polynomial", "parse_polynomial", "QuadraticModuleSpec", "member",
           "seq_member", "instance"]
__version__ = "0.1.0"
