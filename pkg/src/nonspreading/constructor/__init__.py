"""Construction of nonspreading packets: V_eff, consistency, shape, motion, phase."""

from .effective import ConsistencyReport, EffectivePotential, consistency_check, effective_potential
from .kinematics import (
    PhaseTrack,
    build_phase,
    force_double_integrals,
    motion_from_constraint,
    time_lattice,
    uniform_force_track,
)
from .packets import airy_reference, airy_values, assemble_packet, gaussian_packet, packet_values, sho_reference
from .shape import ShapeSolution, count_nodes, solve_shape

__all__ = [
    "ConsistencyReport",
    "EffectivePotential",
    "PhaseTrack",
    "ShapeSolution",
    "airy_reference",
    "airy_values",
    "assemble_packet",
    "build_phase",
    "consistency_check",
    "count_nodes",
    "effective_potential",
    "force_double_integrals",
    "gaussian_packet",
    "motion_from_constraint",
    "packet_values",
    "sho_reference",
    "solve_shape",
    "time_lattice",
    "uniform_force_track",
]
