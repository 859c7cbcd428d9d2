"""
Prometheus Metrics

Process-wide counters for fits, jitter escalation and BO iterations. The
HTTP exporter is only started when EIGN_METRICS_ENABLED is true.
"""

import logging

from prometheus_client import Counter, Histogram, start_http_server

from .config import get_settings

logger = logging.getLogger(__name__)

GP_FITS = Counter(
    'eign_gp_fits_total',
    'Number of GP surrogate fits',
    ['kind']
)

CHOLESKY_JITTER = Counter(
    'eign_cholesky_jitter_total',
    'Cholesky factorizations by jitter level used',
    ['level']
)

BO_ITERATIONS = Counter(
    'eign_bo_iterations_total',
    'BO iterations completed',
    ['problem', 'acquisition']
)

FALLBACK_QUERIES = Counter(
    'eign_fallback_queries_total',
    'Iterations that fell back to a Sobol query after a numerical failure',
    ['problem', 'acquisition']
)

ITERATION_SECONDS = Histogram(
    'eign_iteration_seconds',
    'Wall-clock seconds per BO iteration',
    buckets=(0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0, 300.0)
)

_exporter_started = False


def start_metrics_server() -> bool:
    """Start the exporter once per process if metrics are enabled."""
    global _exporter_started
    settings = get_settings()
    if not settings.metrics_enabled or _exporter_started:
        return _exporter_started
    try:
        start_http_server(settings.metrics_port)
        _exporter_started = True
        logger.info(f"Prometheus metrics server started on port {settings.metrics_port}")
    except OSError as e:
        logger.warning(f"Failed to start metrics server on port {settings.metrics_port}: {e}")
    return _exporter_started
