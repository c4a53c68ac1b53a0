"""Clocks, stopwatches, and computations that can be stopped mid-way."""

from time import monotonic_ns
from typing import Any, Iterator, Optional


def get_msec():
    # type: () -> int
    """Return a millisecond-level time."""
    return monotonic_ns() // 1_000_000


def get_nsec():
    # type: () -> int
    """Return a nanosecond-level time."""
    return monotonic_ns()


class Stopwatch:
    """Accumulate the wall time spent inside `with` blocks."""

    def __init__(self):
        # type: () -> None
        self.elapsed_nsec = 0
        self.laps = 0
        self._started = None # type: Optional[int]

    def __enter__(self):
        # type: () -> Stopwatch
        if self._started is not None:
            raise RuntimeError('stopwatch is already running')
        self._started = get_nsec()
        return self

    def __exit__(self, *exc_info):
        # type: (Any) -> None
        assert self._started is not None
        self.elapsed_nsec += get_nsec() - self._started
        self._started = None
        self.laps += 1

    @property
    def mean_nsec(self):
        # type: () -> float
        """The average time per lap."""
        return self.elapsed_nsec / self.laps if self.laps else 0.0


class InterruptibleAlgorithm:
    """Abstract base class for a computation that yields once per unit of work.

    Subclasses write the computation as the generator units_of_work(); the
    caller decides how much of it to run, by steps or by time, and may come
    back later to run more.
    """

    def __init__(self):
        # type: () -> None
        self._process = None # type: Optional[Iterator[None]]
        self.steps_taken = 0

    @property
    def completed(self):
        # type: () -> bool
        """Return whether the computation has finished."""
        raise NotImplementedError()

    def restart(self):
        # type: () -> None
        """Reset any state as necessary."""
        raise NotImplementedError()

    def units_of_work(self):
        # type: () -> Iterator[None]
        """Run the computation, yielding after every unit of work."""
        raise NotImplementedError()

    def step(self):
        # type: () -> bool
        """Do one unit of work; return False if there was none left."""
        if self.completed:
            return False
        if self._process is None:
            self._process = self.units_of_work()
        try:
            next(self._process)
        except StopIteration:
            self._process = None
            return False
        self.steps_taken += 1
        return True

    def run_for_steps(self, budget):
        # type: (int) -> bool
        """Do at most budget more units of work; return whether the computation finished."""
        for _ in range(budget):
            if not self.step():
                break
        return self.completed

    def run_for_msec(self, msecs):
        # type: (int) -> bool
        """Work until a deadline; return whether the computation finished."""
        deadline = get_nsec() + msecs * 1_000_000
        while get_nsec() < deadline and self.step():
            pass
        return self.completed

    def run(self):
        # type: () -> int
        """Run the computation to the end and return the total steps taken."""
        while self.step():
            pass
        return self.steps_taken
