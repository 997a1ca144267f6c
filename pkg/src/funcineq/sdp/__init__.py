"""Block-diagonal SDP: data model, interior-point solver, SDPA text format."""

from .model import STATUSES, BlockSdp, SolveReport, SolverOptions
from .sdpa import SdpaFormatError, export_sdpa, import_solution, parse_sdpa, write_solution
from .solver import dimacs_errors, solve

__all__ = ["BlockSdp", "SolveReport", "SolverOptions", "STATUSES", "solve", "dimacs_errors",
           "SdpaFormatError", "export_sdpa", "parse_sdpa", "write_solution", "import_solution"]
