import math

from qsatlink.consts import MU_THRESHOLD, QBER_THRESHOLD
from qsatlink.exceptions import InvalidArgumentException
from qsatlink.protocol.types import FeasibilityVerdict


def feasibility_verdict(
    qber: float,
    mu_sat: float,
    qber_threshold: float = QBER_THRESHOLD,
    mu_threshold: float = MU_THRESHOLD,
) -> FeasibilityVerdict:
    """
    Check a pass against the BB84 error threshold and the decoy-state photon-number guideline.

    qber_ok requires qber < qber_threshold (strict); mu_ok requires mu_sat <= mu_threshold.
    An unknown mu_sat (nan) fails the photon-number check.

    :param qber: Quantum bit error rate in [0, 1]
    :param mu_sat: Mean photons per pulse leaving the satellite
    """
    if not 0.0 <= qber <= 1.0:
        raise InvalidArgumentException(f"qber must be in [0, 1], got {qber}")
    if mu_sat < 0 or math.isinf(mu_sat):
        raise InvalidArgumentException(f"mu_sat must be non-negative, got {mu_sat}")
    qber_ok = qber < qber_threshold
    mu_ok = not math.isnan(mu_sat) and mu_sat <= mu_threshold
    return FeasibilityVerdict(
        qber=qber,
        mu_sat=mu_sat,
        qber_ok=qber_ok,
        mu_ok=mu_ok,
        overall=qber_ok and mu_ok,
        qber_threshold=qber_threshold,
        mu_threshold=mu_threshold,
    )
