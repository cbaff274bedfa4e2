"""q-dependent detrended cross-correlation matrices, spectra, PMFG networks and portfolios."""

from .errors import ConfigError, DataError, DegeneracyError, DegenerateCovarianceError, DegenerateSeriesError, QCorrError
from .qdcca import DetrendConfig, QCorrMatrix, corr_grid, corr_matrix, rho_q
from .seriesio import PricePanel, ReturnPanel, load_prices, log_returns

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "DegeneracyError",
    "DegenerateCovarianceError",
    "DegenerateSeriesError",
    "DetrendConfig",
    "PricePanel",
    "QCorrError",
    "QCorrMatrix",
    "ReturnPanel",
    "corr_grid",
    "corr_matrix",
    "load_prices",
    "log_returns",
    "rho_q",
]
