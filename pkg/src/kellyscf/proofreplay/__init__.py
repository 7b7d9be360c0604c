"""Mechanical replay of impossibility proofs by candidate-set propagation."""

from .engine import (
    AuditReport,
    Budget,
    CandidateMap,
    SolveResult,
    Step,
    Verification,
    arc_strategyproof,
    audit,
    check_assignment,
    init,
    link_equalities,
    propagate,
    prune_condorcet_loser,
    prune_pareto,
    prune_weak_pareto,
    seed_absolute_majority,
    seed_near_unanimity,
    solve,
    trace_records,
    verify,
)
from .library import REPLAY_SCENARIOS, get_scenario, scenario_library, scenario_names
from .scenario import (
    AXIOM_NAMES,
    Expectation,
    Scenario,
    ScenarioBuilder,
    Seed,
    parse_scenario,
    render_scenario,
)

__all__ = [
    "AXIOM_NAMES",
    "AuditReport",
    "Budget",
    "CandidateMap",
    "Expectation",
    "REPLAY_SCENARIOS",
    "Scenario",
    "ScenarioBuilder",
    "Seed",
    "SolveResult",
    "Step",
    "Verification",
    "arc_strategyproof",
    "audit",
    "check_assignment",
    "get_scenario",
    "init",
    "link_equalities",
    "parse_scenario",
    "propagate",
    "prune_condorcet_loser",
    "prune_pareto",
    "prune_weak_pareto",
    "render_scenario",
    "scenario_library",
    "scenario_names",
    "seed_absolute_majority",
    "seed_near_unanimity",
    "solve",
    "trace_records",
    "verify",
]
