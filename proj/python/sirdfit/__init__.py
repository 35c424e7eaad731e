"""SIRD epidemic model calibration: windowed PSO fits and forecasts."""

from ._core import (
    EpiSeries,
    FitAllResult,
    FitResult,
    Forecast,
    SirdParams,
    SirdState,
    Trajectory,
    Window,
    __version__,
    basic_reproduction_number,
    beta_at,
    fit_all_windows,
    fit_window,
    forecast_extension,
    integrate,
    load_raw_csv,
    make_windows,
)

__all__ = [
    "EpiSeries",
    "FitAllResult",
    "FitResult",
    "Forecast",
    "SirdParams",
    "SirdState",
    "Trajectory",
    "Window",
    "__version__",
    "basic_reproduction_number",
    "beta_at",
    "fit_all_windows",
    "fit_window",
    "forecast_extension",
    "integrate",
    "load_raw_csv",
    "make_windows",
]
