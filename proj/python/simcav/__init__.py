"""Atom-cavity wave-packet dynamics in bare and dressed bases."""

from ._simcav import (
    BoundaryContact,
    DegenerateFrame,
    DressedFrame,
    Grid,
    GridTooCoarse,
    InitialCondition,
    InvalidArgument,
    IoError,
    LinearSolveFailure,
    ModeProfile,
    PacketNotCleared,
    SimcavError,
    SystemParams,
    __version__,
    coherent_sector_weights,
    double_angle,
    eigenvalues,
    final_state,
    identity_tan_forms,
    mixing_angle,
    potential_matrix,
    rabi_radical,
    run_config,
    scenarios,
    simulate,
)

__all__ = [
    "BoundaryContact",
    "DegenerateFrame",
    "DressedFrame",
    "Grid",
    "GridTooCoarse",
    "InitialCondition",
    "InvalidArgument",
    "IoError",
    "LinearSolveFailure",
    "ModeProfile",
    "PacketNotCleared",
    "SimcavError",
    "SystemParams",
    "__version__",
    "coherent_sector_weights",
    "double_angle",
    "eigenvalues",
    "final_state",
    "identity_tan_forms",
    "mixing_angle",
    "potential_matrix",
    "rabi_radical",
    "run_config",
    "scenarios",
    "simulate",
]
