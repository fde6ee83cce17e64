"""Median-of-replicates randomized quasi-Monte Carlo over base-2 digital nets."""

from .estimate import EstimatorConfig, RmseRecord, median_estimate, quantile_estimate, rmse_study, sample_mean, slope_fit
from .nets import NetDefinition, generate_point, generate_pointset, load_joe_kuo, sobol_net, to_unit, verify_net
from .randomize import completely_random_design, linear_scramble
from .testfns import f_alpha_star, f_c, mean_dimension

__version__ = "0.1.0"
