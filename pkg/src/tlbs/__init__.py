"""Joint multi-UAV coverage trajectories and battery-swap station placement."""
from .scenario import CellIndex, Grid, Scenario, UavConfig, dist, generate_random, generate_semi_random
from .energy_sim import Kind, Solution, ValidationReport, Waypoint, simulate, step_energy
from .aco import Colony, PheromoneMatrix, SolverParams, solve

__version__ = "0.1.0"
