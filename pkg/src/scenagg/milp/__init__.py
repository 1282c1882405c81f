"""Mixed-binary linear programming: model, LP backends, branch-and-bound, MPS."""
from .bnb import BnbOptions, BnbResult, branch_and_bound, relative_gap
from .lp import BACKENDS, HighsSession, SimplexSession, lp_session, solve_lp
from .model import MilpBuilder, MilpInstance
from .mps import read_mps, write_mps
from .simplex import LpResult, simplex_solve

__all__ = [
    "BACKENDS", "BnbOptions", "BnbResult", "HighsSession", "LpResult", "MilpBuilder",
    "MilpInstance", "SimplexSession", "branch_and_bound", "lp_session", "read_mps",
    "relative_gap", "simplex_solve", "solve_lp", "write_mps",
]
