"""Concrete semigroup realizations and finite-dimensional decompositions."""
from .decompositions import (
    Cogenerator,
    FoguelSplit,
    JGdLSplit,
    MeanErgodicResult,
    cayley,
    cogenerator_of,
    foguel_split,
    jgdl_split,
    mean_ergodic_projection,
    spectral_projection,
)
from .koopman import (
    FLOW_PRESETS,
    Bump,
    Character,
    Coordinate,
    Flow,
    IntegrationError,
    KoopmanSemigroup,
    homoclinic,
    homoclinic_radius,
    koopman_observe,
    torus_rotation,
)
from .matrix import TOL_IM, Certificate, MatrixGenerator, MatrixSemigroup, UnboundedSemigroupError, matrix_apply
from .multiplication import DiscreteMeasure, MultiplicationSemigroup, multiplication_apply
