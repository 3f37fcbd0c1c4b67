import math

from qsatlink.exceptions import InsufficientDataException, InvalidArgumentException
from qsatlink.timing.types import GatedCounts


def qber_bayesian(n_corr: float, n_wrong: float) -> float:
    """
    QBER estimate (n_wrong + 1) / (n_corr + n_wrong + 2).

    Uniform prior on the error rate, so the estimate stays in (0, 1) and equals
    0.5 without data. Background-subtracted residuals may be fractional.
    """
    for name, value in (("n_corr", n_corr), ("n_wrong", n_wrong)):
        if not (math.isfinite(value) and value >= 0):
            raise InvalidArgumentException(f"{name} must be a non-negative count, got {value}")
    return (n_wrong + 1) / (n_corr + n_wrong + 2)


def background_residuals(counts: GatedCounts):
    """
    Signal counts of the correct and wrong channel after removing the expected in-gate background.

    :raises InsufficientDataException: Without exterior span to estimate the background from
    """
    b = counts.expected_background_in_gate
    if b is None:
        raise InsufficientDataException(
            "no exterior background span to estimate the in-gate background"
        )
    return max(counts.n_signal_correct - b, 0.0), max(counts.n_signal_wrong - b, 0.0)


def qber_background_subtracted(counts: GatedCounts) -> float:
    """
    QBER after subtracting the background expected inside the signal gates.

    The exterior background is scaled by gate_span / exterior_span, split evenly
    across the channels, subtracted from each channel's signal (floored at 0),
    and the residuals go through `qber_bayesian`.

    :raises InsufficientDataException: If the exterior span is zero
    """
    residual_corr, residual_wrong = background_residuals(counts)
    return qber_bayesian(residual_corr, residual_wrong)


def exceeds_background(n_signal: float, background: float, n_sigma: float = 5.0) -> bool:
    """
    Whether a signal count is more than n_sigma Poisson deviations above the background.

    Strict: n_signal > b + n_sigma sqrt(b).
    """
    return n_signal > background + n_sigma * math.sqrt(max(background, 0.0))
