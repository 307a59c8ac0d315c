"""Impedance model of a RIS-assisted link and load optimizers with and without mutual coupling."""
from .channel import RisLoad, end_to_end_channel
from .em_model import Scenario, WireElement, assemble_network, paper_scenario
from .optimizer_mc import McConfig, run as optimize_coupled
from .optimizer_nc import solve_no_coupling

__all__ = [
    "McConfig",
    "RisLoad",
    "Scenario",
    "WireElement",
    "assemble_network",
    "end_to_end_channel",
    "optimize_coupled",
    "paper_scenario",
    "solve_no_coupling",
]
