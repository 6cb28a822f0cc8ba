"""Critical (sandpile) groups of graphs via exact Smith normal form."""

from .graphs import Graph, LayeredSpec, laplacian, layered_kpartite, layered_laplacian_direct, n_coefficient, standard_family
from .groups import AbelianGroup, canonicalize_cyclic, closed_form, group_order, spanning_trees_formula
from .matrix import IntMatrix, det, is_unimodular, mat_from_rows, mat_mul
from .snf import SnfResult, cokernel, invariant_factors, smith_normal_form, snf_naive_oracle

__all__ = [
    "AbelianGroup",
    "Graph",
    "IntMatrix",
    "LayeredSpec",
    "SnfResult",
    "canonicalize_cyclic",
    "closed_form",
    "cokernel",
    "det",
    "group_order",
    "invariant_factors",
    "is_unimodular",
    "laplacian",
    "layered_kpartite",
    "layered_laplacian_direct",
    "mat_from_rows",
    "mat_mul",
    "n_coefficient",
    "smith_normal_form",
    "snf_naive_oracle",
    "spanning_trees_formula",
    "standard_family",
]
