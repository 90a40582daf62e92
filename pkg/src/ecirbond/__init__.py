"""Zero-coupon bond prices under the extended CIR short-rate model.

The price is built from a series whose terms are iterated integrals of the
G_n^m polynomials; Monte Carlo and a Riccati ODE solve serve as references.
"""

from .errors import (CapacityError, CoefficientError, ConfigError, ECIRError, ExpressionError,
                     QuadratureError, SeriesDivergenceError, StructuralError)
from .expression import compile_expression, parse as parse_expression, render
from .model import (CoefficientFunction, ECIRModel, PricingWindow, kappa_tilde, ou_path_x,
                    time_factor)
from .gnm import GnmConfig, g_const, g_timedep
from .symbolic import classify, differentiate, freeze_and_collect
from .quadrature import QuadratureRule, TensorGrid, integrate_hypercube
from .series import (BondPrice, SeriesCoefficients, compute_A, price, price_const_k, price_timedep,
                     riccati_from_series, series_coefficients, truncation_bound)
from .oracles import McConfig, McEstimate, mc_price, riccati_price, riccati_solve
from .config import RunConfig, parse_config

__version__ = "0.1.0"

__all__ = [
    "BondPrice", "CapacityError", "CoefficientError", "CoefficientFunction", "ConfigError",
    "ECIRError", "ECIRModel", "ExpressionError", "GnmConfig", "McConfig", "McEstimate",
    "PricingWindow", "QuadratureError", "QuadratureRule", "RunConfig", "SeriesCoefficients",
    "SeriesDivergenceError", "StructuralError", "TensorGrid", "classify", "compile_expression",
    "compute_A", "differentiate", "freeze_and_collect", "g_const", "g_timedep",
    "integrate_hypercube", "kappa_tilde", "mc_price", "ou_path_x", "parse_config",
    "parse_expression", "price", "price_const_k", "price_timedep", "render", "riccati_from_series",
    "riccati_price", "riccati_solve", "series_coefficients", "time_factor", "truncation_bound",
]
