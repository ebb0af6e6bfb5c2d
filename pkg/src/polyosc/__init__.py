"""Transition matrices between Cartesian and hyperspherical eigenbases of
the D-dimensional singular oscillator, built from analytically continued
Clebsch-Gordan coefficients on binary coordinate trees."""

from .bases import (
    CartesianState,
    HypersphericalState,
    ModelParams,
    angular_function,
    cartesian_wavefunction,
    energy,
    enumerate_cartesian,
    enumerate_hyperspherical,
    hyperspherical_wavefunction,
    node_momenta,
    radial_function,
)
from .cg import CGArgs, cg_continued
from .matrix_io import load_matrix, dump_matrix
from .special import ConvergenceError, PoleError
from .transition import (
    TransitionMatrix,
    oracle_matrix,
    oracle_transition,
    transition_coefficient,
    transition_matrix,
)
from .tree import Tree, TreeSyntaxError, parse_tree, render_tree

__version__ = "0.1.0"
