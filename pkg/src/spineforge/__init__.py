"""Regular simplicial and cubical spines over random one-relator presentations."""

from .coxeter import CoxeterDiagram, classify, gram_matrix
from .pipeline import BuildParams, BuildResult, StageError, build_spine, make_relator
from .rosegraph import CircleFamily, EdgePartition, LabeledGraph, apply_partition, is_immersed
from .spine import Spine, check_regularity, cocycle_holonomy
from .words import Presentation, ReducedWord, random_cyclically_reduced_word

__version__ = "0.1.0"

__all__ = [
    "BuildParams", "BuildResult", "CircleFamily", "CoxeterDiagram", "EdgePartition",
    "LabeledGraph", "Presentation", "ReducedWord", "Spine", "StageError", "apply_partition",
    "build_spine", "check_regularity", "classify", "cocycle_holonomy", "gram_matrix",
    "is_immersed", "make_relator", "random_cyclically_reduced_word",
]
