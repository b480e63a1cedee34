"""Simulation and exact analysis of the self-organizing network coloring game."""

from .errors import ConvergenceTimeout, InvariantViolation, ValidationError
from .graph import (
    Graph,
    complete_graph,
    empty_graph,
    generate_er,
    is_proper,
    load_graph,
    max_degree,
    path_graph,
    save_graph,
    star_graph,
)
from .game import (
    GameState,
    make_state,
    payoff_vector,
    play,
    play_to_convergence,
    round_update,
    satisfaction_lower_bound,
    simulate_batch,
)
from .absorbing import (
    absorption_variance,
    analyze,
    build_chain,
    expected_absorption,
    fundamental_matrix,
    limit_distribution_check,
)
from .convergence import SweepConfig, prop3_tail_curve, run_sweep, scaling_report, tail_checks
from .borda import (
    available_colors,
    borda_welfare,
    estimate_expected_optimum,
    local_optimal_run,
    reduce_network,
)
from .samplers import TemperatureSchedule, enumerate_target, mh_run, sa_run, schedule_value

__version__ = "0.1.0"
