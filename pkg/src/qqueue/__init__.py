"""Discrete-time quantum Markov chain models of a finite queue."""

__version__ = "0.1.0"

from .channels import (
    KrausChannel,
    Superoperator,
    apply,
    compose,
    invariant_state,
    jamiolkowski,
    spectrum,
    superoperator,
    tp_check,
)
from .errors import (
    CapabilityError,
    ConfigError,
    InvalidChannelError,
    InvalidDimsError,
    InvalidStateError,
    NumericalError,
    QQueueError,
)
from .evolution import evolve, measurement_map, queue_distribution, run_trajectory
from .queue import (
    CoinSpec,
    QueueDims,
    build_coin_channel,
    build_dephasing_channel,
    build_queue_channel,
    build_step_channel,
    coin_matrix,
    initial_state,
)
from .analysis import (
    check_semistability_operator,
    check_semistability_per_state,
    classify_spectrum,
    extract_stochastic_matrix,
)
from .randstates import SampleConfig, ginibre, hs_random_state, monte_carlo_mean
