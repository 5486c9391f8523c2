"""Bursting-inhibition neural simulator.

Unexplained percepts burst, explained ones fire tonically; bursting
neurons bind into gamma-synchronous ensembles, the dominant ensemble is
written to an episodic store, and neuromodulator-gated STDP plus REM
replay move bursting up the abstraction hierarchy.
"""

from importlib.resources import files

from .binding import Ensemble, form_ensembles, select_dominant
from .dynamics import ClockParams, FiringMode, SpikeEvent, Stimulus, assign_modes, emit_spikes, forward_pass
from .episodic import EpisodicStore, encode, recall
from .netcore import Network, build_network, load_network, parse_network_spec, strong_subgraph
from .neuromod import ModulatorState, Scenario, classify_scenario, compute_pe, update_modulators
from .plasticity import StdpParams, accumulate, apply_gates, consolidate, rem_replay, stdp_delta

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path to a bundled network spec or config, e.g. ``fixture_path("canonical_931.net")``."""
    return files(__package__).joinpath("fixtures", name)


__all__ = [
    "ClockParams",
    "Ensemble",
    "EpisodicStore",
    "FiringMode",
    "ModulatorState",
    "Network",
    "Scenario",
    "SpikeEvent",
    "StdpParams",
    "Stimulus",
    "accumulate",
    "apply_gates",
    "assign_modes",
    "build_network",
    "classify_scenario",
    "compute_pe",
    "consolidate",
    "emit_spikes",
    "encode",
    "fixture_path",
    "form_ensembles",
    "forward_pass",
    "load_network",
    "parse_network_spec",
    "recall",
    "rem_replay",
    "select_dominant",
    "stdp_delta",
    "strong_subgraph",
    "update_modulators",
]
