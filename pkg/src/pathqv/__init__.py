"""Pathwise quadratic variation and discrete local time along partition sequences."""

from .calculus import (C2Function, CovCheck, Mollifier, TestFunction, abs_function,
                       change_of_variable_check, default_mollifier, follmer_integral,
                       follmer_sum, ito_residual, mollified_profile_pairing, mollify,
                       occupation_residual, power4, quadratic_function, tanaka_residual,
                       time_change_check)
from .errors import ConfigError, DomainError, UnsupportedOperation
from .local_time import (CrossingCounts, CrossingRecord, LocalTimeProfile,
                         crossing_counts, crossing_decomposition, discrete_local_time,
                         levy_downcross_estimate, local_time_curve, local_time_value,
                         lp_norm, pair_against, profile_from_cells)
from .partitions import (Partition, ValueGrid, dyadic_partition, freedman_scale,
                         lebesgue_partition, merge, oscillation, partition, restrict)
from .paths import (AnalyticPath, BridgePath, DriftedPath, Path, TimeChangedPath,
                    TransformedPath, constant, linear, path_from_spec, zigzag)
from .piecewise import CurvatureMeasure, PiecewisePoly
from .quadvar import QvCurve, qv, qv_curve, qv_increment, qv_many, weighted_qv_sum

__version__ = "0.1.0"
