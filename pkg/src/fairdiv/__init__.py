"""Exact fair division of indivisible goods under additive valuations."""

from .algorithms import (
    InvariantViolation,
    MatchFreezeTrace,
    PerturbedInstance,
    match_and_freeze,
    min_gap,
    modified_round_robin,
    perturb_for_efx0,
)
from .core import (
    Allocation,
    BudgetExceeded,
    Instance,
    InvalidAllocation,
    ParseError,
    ValueClass,
    bundle_value,
    classify,
    format_rational,
    parse_allocation,
    parse_instance,
    parse_rational,
    serialize_allocation,
    serialize_instance,
    validate_allocation,
)
from .fairness import Notion, check, efx_factor, efx_value, vefx_factor
from .generators import GeneratorSpec, fixture, generate, search_mnw_vs_efx, verify_fixture
from .kernels import BACKEND
from .matching import BipartiteGraph, max_matching
from .nash import MnwKey, binary_mnw, brute_force_mnw, complete_with_zero_goods, mnw_key, nash_welfare

__version__ = "0.1.0"
