"""Polynomial certificates for integral inequalities over functions.

A problem asks whether f(I_1(u), ..., I_k(u)) >= 0 for every admissible u,
where each I_j is an integral of a monomial in x, u and grad u.  The package
relaxes the set of attainable integral values with moment constraints
(divergence identities, symmetry, a moment LMI), eliminates the linear part
exactly, and searches for an S-procedure certificate by semidefinite
programming.
"""

from .certificate import (CertificateError, SProcConfig, assemble_sproc, extract_solution,
                          iterated_trace, verify_certificate)
from .polyalg import Poly, VarShape
from .problem import ProblemSpec, validate_group, validate_invariance, validate_structure
from .problem_file import ProblemFileError, load_problem, parse_problem
from .relaxation import RelaxationError, build_relaxation

__version__ = "0.1.0"

__all__ = [
    "Poly", "VarShape", "ProblemSpec", "ProblemFileError", "load_problem", "parse_problem",
    "validate_group", "validate_invariance", "validate_structure", "RelaxationError",
    "build_relaxation", "CertificateError", "SProcConfig", "assemble_sproc", "extract_solution",
    "iterated_trace", "verify_certificate",
]
