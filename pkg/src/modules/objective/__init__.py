from .data import TDistForecast, PointMetrics, IntervalReport, TFit
from .loss import t_nll, t_nll_elements, gaussian_nll, LOSSES
from .metrics import (
    point_metrics,
    metrics_by_speed_bin,
    metrics_by_horizon,
    MAPE_EPSILON_MPH,
    SPEED_BINS,
)
from .intervals import intervals, interval_eval
from .diagnostics import fit_t_errors, error_histogram, qq_frame
from .report import EvaluationReport
