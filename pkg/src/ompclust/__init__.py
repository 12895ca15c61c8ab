"""Greedy endogenous sparse recovery for subspace clustering.

Feature selection with orthogonal matching pursuit and nearest neighbors,
geometric certificates for exact feature selection, synthetic unions of
subspaces with controlled cross-spectra, spectral clustering, and a
seeded Monte Carlo experiment harness.
"""

__version__ = "0.1.0"

from .clustering import (Partition, affinity, clustering_error,
                         coefficient_matrix, graph_laplacian,
                         spectral_bipartition)
from .experiments import (GridSpec, PhaseGrid, bounded_energy_sweep,
                          efs_probability, omp_vs_nn, phase_boundary,
                          phase_transition)
from .geometry import (CoveringEstimate, CrossSpectrum, EfsCertificate,
                       SubspaceBasis, bounding_constant, covering_diameter,
                       covering_diameter_full, covering_diameter_proxy,
                       efs_condition_cor1, efs_condition_thm1,
                       efs_condition_thm3, erc, inradius_from_diameter,
                       lemma1_gap, max_mutual_coherence, mutual_coherence,
                       principal_angles, projective_distance)
from .selection import (FeatureSet, OmpStallError, StoppingRule, efs_check,
                        efs_fraction, nn_feature_sets, omp, omp_feature_sets)
from .synth import (Ensemble, UnionSpec, build_subspace_pair, generate_union,
                    sample_m1, sample_m2)
