"""Synthetic correlated-voter contest simulator."""

from .contest import (  # noqa: F401
    ProblemOutcome,
    ProblemRecord,
    RunRecord,
    draw_panel,
    resolve_attempts,
    simulate_contest,
    simulate_problem,
)
from .experiments import (  # noqa: F401
    CorrelationExperimentResult,
    MixerResult,
    correlation_experiment,
    mc_contest_scores,
    mixer_experiment,
)
from .model import (  # noqa: F401
    COMMON_SHOCK,
    FIXED_COUNT,
    INDEPENDENT,
    LatencyModel,
    MixerConfig,
    Shock,
    VoterModel,
    draw_shock,
    sample_attempt,
)
