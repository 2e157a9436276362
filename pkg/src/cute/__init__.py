"""Timeout-based window congestion control: controller, simulator, analysis."""

from .analysis import (ClosedNetworkModel, QueueCountSpec, mva_closed,
                       optimal_population, power, queue_count,
                       satellite_pipe_size, terrestrial_pipe_size)
from .config import NetworkConfig, SweepConfig, parse_config
from .metrics import fairness_index, max_supportable_connections, summarize
from .netsim import build_network, simulate
from .window import (PathInfo, PolicyConfig, WindowController,
                     effective_window_max, new_controller)

__version__ = "0.1.0"
