"""Fractional-order P-I-Q epidemic model with Atangana-Baleanu-Caputo derivatives.

Series solutions by Laplace-Adomian decomposition, a product-integration
Volterra solver, R0 sensitivity, stability constants and calibration.
"""

from .analysis import (
    contraction_constant,
    lipschitz_estimate,
    sensitivity_indices,
    stability_report,
    ulam_bound,
)
from .calibrate import CalibrationSpec, CaseSeries, fit, residual_report
from .errors import *  # noqa: F403
from .ladm import SeriesSolution, adomian_product, ladm_expand, series_eval, truncation_estimate
from .model import (
    TABLE2,
    TABLE2_INIT,
    TABLE3,
    TABLE3_INIT,
    FractionalOrder,
    ModelParams,
    State,
    r0,
    total_population_rate,
    vector_field,
)
from .solver import Grid, Trajectory, compare_series, solve_abc, solve_volterra
from .special import MLParams, gamma, mittag_leffler
from .thetapoly import ThetaPolynomial, abc_inverse, poly_add, poly_eval, poly_mul, poly_scale

__version__ = "0.1.0"
