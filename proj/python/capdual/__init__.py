"""Capillary L_p dual Minkowski solver on a spherical cap.

The heavy lifting lives in the compiled ``_core`` module; this package
re-exports it and adds a couple of conveniences for building densities.
"""

import json

import numpy as np

from ._core import (
    CapdualError,
    CapSpec,
    ConfigError,
    ExponentPair,
    InvalidArgument,
    InvalidExponents,
    NonConvex,
    NotAxisymmetric,
    PolarGrid,
    Solution,
    SolverConfig,
    c0_bounds,
    oracle_compare,
    radial_solve,
    radial_start_profile,
    solve,
    solve_config,
)

__all__ = [
    "CapdualError",
    "CapSpec",
    "ConfigError",
    "ExponentPair",
    "InvalidArgument",
    "InvalidExponents",
    "NonConvex",
    "NotAxisymmetric",
    "PolarGrid",
    "Solution",
    "SolverConfig",
    "c0_bounds",
    "node_coordinates",
    "oracle_compare",
    "radial_solve",
    "radial_start_profile",
    "run",
    "solve",
    "solve_config",
]


def node_coordinates(grid):
    """(r, phi) arrays of shape (nr, nphi)."""
    return np.meshgrid(grid.r, grid.phi, indexing="ij")


def run(config):
    """Solve a run config given as a dict or a path to a JSON file."""
    if isinstance(config, dict):
        return solve_config(json.dumps(config))
    with open(config) as fh:
        return solve_config(fh.read())
