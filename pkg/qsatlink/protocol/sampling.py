import math
from typing import Tuple

import numpy as np
from scipy.stats import poisson

from qsatlink.exceptions import InvalidArgumentException

"""
Substream of the one-way pass simulation.
"""
PASS_STREAM = 0

"""
Substream of the two-way key session.
"""
TWO_WAY_STREAM = 1


def slot_rng(seed: int, slot: int, stream: int = PASS_STREAM) -> np.random.Generator:
    """
    Random generator of one slot.

    Each (seed, stream, slot) key gets its own Philox counter stream, so slots can be
    simulated in any order or in parallel with identical results.
    """
    if seed < 0 or slot < 0 or stream < 0:
        raise InvalidArgumentException("seed, stream and slot must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, slot])))


def _detection_probability(mu: float) -> float:
    if not (math.isfinite(mu) and mu >= 0):
        raise InvalidArgumentException(f"mean photon number must be non-negative, got {mu}")
    return -math.expm1(-mu)


def detecting_pulses(rng: np.random.Generator, n_pulses: int, mu: float) -> np.ndarray:
    """
    Indices of the pulses with at least one detected photon.

    A pulse is detected with probability 1 - exp(-mu), so the gaps between detected
    pulses are geometric; drawing the gaps costs time in the number of detections
    rather than in the number of pulses.

    :param n_pulses: Pulses arriving while the receiver is open
    :param mu: Mean detected photons per pulse
    """
    p = _detection_probability(mu)
    if n_pulses <= 0 or p == 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(n_pulses, dtype=np.int64)

    chunks = []
    position = -1
    while True:
        remaining = n_pulses - 1 - position
        expected = remaining * p
        size = int(math.ceil(expected + 5.0 * math.sqrt(expected) + 16))
        indices = position + np.cumsum(rng.geometric(p, size=size))
        inside = indices[indices < n_pulses]
        chunks.append(inside)
        if len(inside) < size:
            break
        position = int(inside[-1])
    return np.concatenate(chunks).astype(np.int64)


def detecting_pulses_naive(rng: np.random.Generator, n_pulses: int, mu: float) -> np.ndarray:
    """
    Reference draw of `detecting_pulses` with one Poisson variate per pulse.
    """
    _detection_probability(mu)
    if n_pulses <= 0:
        return np.empty(0, dtype=np.int64)
    return np.flatnonzero(rng.poisson(mu, size=n_pulses) > 0).astype(np.int64)


def zero_truncated_poisson(rng: np.random.Generator, mu: float, size: int) -> np.ndarray:
    """
    Photon numbers of detected pulses, Poisson(mu) conditioned on at least one photon.

    Drawn by inversion, one uniform per pulse.
    """
    p = _detection_probability(mu)
    u = rng.random(size)
    if size == 0 or p == 0.0:
        return np.ones(size, dtype=np.int64)
    q = np.minimum(math.exp(-mu) + u * p, np.nextafter(1.0, 0.0))
    return np.maximum(poisson.ppf(q, mu), 1).astype(np.int64)


def route_photons(
    rng: np.random.Generator, photons: np.ndarray, p_channel0: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Send every photon of every pulse to channel 0 with probability p_channel0.

    Detectors are threshold detectors: a channel clicks once per pulse however
    many photons it receives. One uniform is drawn per photon whatever the
    probability, so the random stream does not depend on it.

    :return: Per pulse, whether channel 0 and channel 1 clicked
    """
    if not 0.0 <= p_channel0 <= 1.0:
        raise InvalidArgumentException(f"routing probability must be in [0, 1], got {p_channel0}")
    photons = np.asarray(photons, dtype=np.int64)
    u = rng.random(int(photons.sum()))
    if len(photons) == 0:
        empty = np.zeros(0, dtype=bool)
        return empty, empty
    starts = np.concatenate([[0], np.cumsum(photons)[:-1]])
    to_channel0 = np.add.reduceat((u < p_channel0).astype(np.int64), starts)
    return to_channel0 > 0, to_channel0 < photons
