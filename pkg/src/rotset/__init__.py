"""Rotation sets, epsilon-chains and periodic orbits for lifts of torus maps."""

from .torus import (Compose, ExternalMap, HShear, LiftMap, MapSpecError, Power, Shift, Translate,
                    VShear, identity, parse_map, power_shift)
from .zoo import ZOO, sine_shear_h, sine_shear_v, translation, two_shear
from .estimators import (birkhoff_rotation_vector, check_additivity, hull_with_ball,
                         mean_rotation_vector, sample_rotation_set)
from .chains import (build_chain_graph, find_chain_to_target, find_periodic_chain,
                     rotation_set_outer, steinitz_combination)
from .graphs import max_cycle_mean, tarjan_scc
from .periodic import RationalVector, locate_fixed_points, realize_rational_vector

__all__ = [
    "Compose", "ExternalMap", "HShear", "LiftMap", "MapSpecError", "Power", "Shift", "Translate",
    "VShear", "identity", "parse_map", "power_shift",
    "ZOO", "sine_shear_h", "sine_shear_v", "translation", "two_shear",
    "birkhoff_rotation_vector", "check_additivity", "hull_with_ball", "mean_rotation_vector",
    "sample_rotation_set",
    "build_chain_graph", "find_chain_to_target", "find_periodic_chain", "rotation_set_outer",
    "steinitz_combination", "max_cycle_mean", "tarjan_scc",
    "RationalVector", "locate_fixed_points", "realize_rational_vector",
]
