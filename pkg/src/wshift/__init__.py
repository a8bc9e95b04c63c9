"""Weighted backward shifts on l^p: exact orbits, density tools and certified criteria."""

__version__ = "0.1.0"

from .constructions import (example8_k_sequence, example8_weights, example_a_set, geometric_markers,
                            menet_c_rule, menet_weights, verify_example8_conditions, verify_menet_identities)
from .criteria import (Verdict, check_fhc_subspace, check_frequent_hypercyclicity, check_hypercyclic,
                       check_hypercyclic_subspace, check_no_fhc_subspace, replay_verdict)
from .density import DensityProfile, IntSet, density_profile, g_set, intersect_g_sets
from .magnitude import LogMagnitude
from .specfile import load_spec, parse_spec
from .weights import PrefixTable, SparseVector, WeightSpec, basis_orbit_norm, prefix_product

__all__ = [
    "DensityProfile", "IntSet", "LogMagnitude", "PrefixTable", "SparseVector", "Verdict", "WeightSpec",
    "basis_orbit_norm", "check_fhc_subspace", "check_frequent_hypercyclicity", "check_hypercyclic",
    "check_hypercyclic_subspace", "check_no_fhc_subspace", "density_profile", "example8_k_sequence",
    "example8_weights", "example_a_set", "g_set", "geometric_markers", "intersect_g_sets", "load_spec",
    "menet_c_rule", "menet_weights", "parse_spec", "prefix_product", "replay_verdict",
    "verify_example8_conditions", "verify_menet_identities",
]
