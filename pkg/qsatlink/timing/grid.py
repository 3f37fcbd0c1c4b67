from abc import ABC, abstractmethod
from collections.abc import Sequence
from typing import Union, overload

import numpy as np

from qsatlink.consts import SUBDIVISIONS
from qsatlink.exceptions import InvalidArgumentException


def _check_increasing(name: str, values: np.ndarray, minimum: int = 2) -> np.ndarray:
    values = np.array(values, dtype=float).reshape(-1)
    if len(values) < minimum:
        raise InvalidArgumentException(
            f"{name} needs at least {minimum} points, got {len(values)}"
        )
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentException(f"{name} must be finite")
    if np.any(np.diff(values) <= 0):
        raise InvalidArgumentException(f"{name} must be strictly increasing")
    values.setflags(write=False)
    return values


class Grid(Sequence, ABC):
    """
    Ordered expected arrival times with nearest-point lookup.
    """

    @property
    @abstractmethod
    def start(self) -> float:
        ...

    @property
    @abstractmethod
    def extent(self) -> float:
        """
        Observation time in **seconds** covered by the grid, one pitch per point.
        """

    @abstractmethod
    def points_at(self, indices: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def offsets(self, times) -> np.ndarray:
        """
        Signed distance of each time from its nearest grid point.

        Ties between two grid points resolve to the earlier one.
        """

    @property
    def end(self) -> float:
        return self.start + self.extent

    @property
    def mean_pitch(self) -> float:
        return self.extent / len(self)

    @overload
    def __getitem__(self, index: int) -> float: ...

    @overload
    def __getitem__(self, index: slice) -> np.ndarray: ...

    def __getitem__(self, index: Union[int, slice]):
        n = len(self)
        if isinstance(index, slice):
            return self.points_at(np.asarray(range(n)[index], dtype=np.int64))
        if index < 0:
            index += n
        if not 0 <= index < n:
            raise IndexError("grid index out of range")
        return float(self.points_at(np.array([index], dtype=np.int64))[0])

    def __array__(self, dtype=None, copy=None):
        points = self.points_at(np.arange(len(self), dtype=np.int64))
        return points if dtype is None else points.astype(dtype)


class ArrivalGrid(Grid):
    """
    Qubit arrival times interpolated between consecutive SLR epochs.

    Each epoch interval is divided into `subdivisions` equal steps, so the grid
    follows the Doppler stretch of the range without knowing the orbit. Points are
    computed on demand; the grid is never materialized for lookups.
    """

    def __init__(self, epochs, subdivisions: int = SUBDIVISIONS):
        if int(subdivisions) != subdivisions or subdivisions < 1:
            raise InvalidArgumentException(
                f"subdivisions must be a positive integer, got {subdivisions}"
            )
        self.epochs = _check_increasing("SLR epochs", epochs)
        self.subdivisions = int(subdivisions)
        self.pitches = np.diff(self.epochs) / self.subdivisions

    def __len__(self) -> int:
        return self.subdivisions * (len(self.epochs) - 1)

    @property
    def start(self) -> float:
        return float(self.epochs[0])

    @property
    def extent(self) -> float:
        return float(self.epochs[-1] - self.epochs[0])

    def points_at(self, indices: np.ndarray) -> np.ndarray:
        i, k = np.divmod(np.asarray(indices, dtype=np.int64), self.subdivisions)
        return self.epochs[i] + k * self.pitches[i]

    def offsets(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        n_pairs = len(self.epochs) - 1
        i = np.clip(np.searchsorted(self.epochs, t, side="right") - 1, 0, n_pairs - 1)
        base = self.epochs[i]
        pitch = self.pitches[i]
        k = np.clip(np.floor((t - base) / pitch), 0, self.subdivisions - 1)
        lower = base + k * pitch

        last_step = k + 1 >= self.subdivisions
        upper = np.where(last_step, self.epochs[np.minimum(i + 1, n_pairs)], lower + pitch)
        # The final epoch closes the grid but is not itself a grid point.
        has_upper = ~(last_step & (i + 1 >= n_pairs))

        d_lower = np.abs(t - lower)
        d_upper = np.abs(upper - t)
        take_upper = has_upper & (d_upper < d_lower)
        return t - np.where(take_upper, upper, lower)


class PointGrid(Grid):
    """
    Grid given by explicit arrival times.

    A single arrival has no pitch; its extent is zero.
    """

    def __init__(self, points):
        self.points = _check_increasing("arrival grid", points, minimum=1)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def start(self) -> float:
        return float(self.points[0])

    @property
    def extent(self) -> float:
        n = len(self.points)
        if n == 1:
            return 0.0
        return float(self.points[-1] - self.points[0]) * n / (n - 1)

    def points_at(self, indices: np.ndarray) -> np.ndarray:
        return self.points[np.asarray(indices, dtype=np.int64)]

    def offsets(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        j = np.searchsorted(self.points, t, side="left")
        lower = self.points[np.clip(j - 1, 0, len(self.points) - 1)]
        upper = self.points[np.clip(j, 0, len(self.points) - 1)]
        take_upper = np.abs(upper - t) < np.abs(t - lower)
        return t - np.where(take_upper, upper, lower)


def as_grid(grid) -> Grid:
    """
    Wrap an ordered sequence of arrival times, leaving grids untouched.
    """
    if isinstance(grid, Grid):
        return grid
    points = np.asarray(grid, dtype=float).reshape(-1)
    if len(points) == 0:
        raise InvalidArgumentException("arrival grid is empty")
    return PointGrid(points)


def expected_arrivals(slr_epochs, subdivisions: int = SUBDIVISIONS) -> ArrivalGrid:
    """
    Expected qubit arrival times from the detected SLR epochs.

    For each pair of consecutive epochs (t_i, t_i+1) the grid holds
    t_i + k (t_i+1 - t_i) / subdivisions for k = 0 .. subdivisions - 1.

    :param slr_epochs: Strictly increasing detection times in **seconds**, at least two
    :param subdivisions: Steps per epoch interval, 1e7 for a 100 MHz comb and 10 Hz SLR

    :raises InvalidArgumentException: With fewer than two epochs or non-increasing epochs
    """
    return ArrivalGrid(slr_epochs, subdivisions)
