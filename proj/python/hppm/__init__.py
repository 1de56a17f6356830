"""Part-based human body model toolkit."""

from ._hppm import (
    JOINT_NAMES,
    PART_NAMES,
    ConfigError,
    DataError,
    Error,
    Model,
    NumericError,
    box_visible,
    fit_transform,
    load_mesh,
    matrix_to_rot6d,
    mpjpe,
    mpve,
    project,
    rot6d_to_matrix,
    run_cli,
    save_mesh,
    synth_body,
)

__all__ = [
    "JOINT_NAMES",
    "PART_NAMES",
    "ConfigError",
    "DataError",
    "Error",
    "Model",
    "NumericError",
    "box_visible",
    "fit_transform",
    "load_mesh",
    "matrix_to_rot6d",
    "mpjpe",
    "mpve",
    "project",
    "rot6d_to_matrix",
    "run_cli",
    "save_mesh",
    "synth_body",
]
