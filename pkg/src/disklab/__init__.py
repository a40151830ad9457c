"""Numerical lab for diskcyclic operators on truncated sequence spaces."""

__version__ = "0.1.0"

from .errors import (CapacityError, ConfigurationError, ContractError, DimensionError,
                     DisklabError, HypothesisViolation, InvalidSpecError, NumericError,
                     OrbitOverflowError, UnsupportedFamilyError)
from .operators import (OperatorSpec, TruncatedOperator, Weights, adjoint, apply, backward_shift,
                        canonical_basis_vector, dense_matrix, diagonal, direct_sum_scalar,
                        forward_shift, make_operator, operator_norm_estimate, scalar_multiple)
from .dense_sets import DenseSetEnumerator, dense_sequence_enumerator, random_unit_vectors
from .orbits import (DensityReport, best_disk_coefficient, best_scaled_coefficient, default_targets,
                     density_report, disk_orbit_distance, hierarchy_check, orbit, orbit_distance)
from .numrange import (convex_hull, disk_range_coverage, hermitian_max_eigen,
                       numerical_range_boundary, square_grid)
from .criterion import (build_diskcyclic_vector, criterion_residuals, equivalence_sequence,
                        equivalence_transform, lambda_criterion_residuals, reduce_to_plain,
                        right_inverse_map)
from .constructions import (PolynomialSpec, adjoint_point_spectrum, certified_transfer,
                            counterexample_vector, direct_sum_with_scalar, polynomial_vector,
                            transfer_vector)
