"""Bounded-recourse wrappers around a dynamic set cover algorithm."""

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from math import ceil, inf as INF
from typing import Optional

from .core import TOLERANCE, at_most, ceil_guarded
from .core import CoverSolution, UpdateStep, UpdateKind, UniverseState, AuditReport
from .core import apply_update, covered_by, is_cover
from .dynamic_algorithms import DynamicAlgorithm, LevelGreedy
from .errors import ParameterError, ConsistencyError


LOGGER = logging.getLogger(__name__)


class TransformMode(Enum):
    """How interval lengths are scaled."""
    LOW_FREQUENCY = 'lf'
    HIGH_FREQUENCY = 'hf'


class Phase(Enum):
    """The half of an interval a transform is in."""
    ADDING = 'adding'
    REMOVING = 'removing'


@dataclass
class StepReport:
    """What happened to the output during one update."""
    step: int
    kind: UpdateKind
    element: int
    recourse: int
    output_size: int
    output_cost: float
    background_cost: float
    interval: int
    phase: Optional[Phase]
    interval_start: bool = False
    stretched: bool = False
    optimum: Optional[float] = None
    lower_bound: Optional[float] = None

    @property
    def opt_or_lb(self):
        # type: () -> Optional[float]
        """The exact optimum if known, else the certified lower bound."""
        return self.optimum if self.optimum is not None else self.lower_bound

    @property
    def ratio(self):
        # type: () -> Optional[float]
        """The output cost over the optimum (or its lower bound)."""
        denominator = self.opt_or_lb
        if denominator is None:
            return None
        if denominator <= TOLERANCE:
            return 1.0 if self.output_cost <= TOLERANCE else INF
        return self.output_cost / denominator


class Pipeline:
    """Abstract base class for the object a harness feeds updates to.

    A pipeline owns the background algorithm and its own copy of the
    universe, which it uses to reject illegal updates before the background
    sees them.
    """

    def __init__(self, background):
        # type: (DynamicAlgorithm) -> None
        self.background = background
        self.system = background.system
        self.universe = UniverseState(
            self.system.capacity,
            set(background.alive),
            lifespan={element: 1 for element in background.alive},
        )
        self.steps = 0

    @property
    def recourse_cap(self):
        # type: () -> Optional[int]
        """The largest recourse a single step may have, if bounded."""
        return None

    def step(self, update):
        # type: (UpdateStep) -> StepReport
        """Apply an update and report the change to the output."""
        raise NotImplementedError()

    def output_cover(self):
        # type: () -> CoverSolution
        """Return the current output."""
        raise NotImplementedError()

    def check_containment(self):
        # type: () -> AuditReport
        """Check that the output is legal and consistent with the schedule."""
        report = AuditReport()
        if not is_cover(self.system, self.universe, self.output_cover()):
            uncovered = sorted(
                element for element in self.universe.alive
                if not covered_by(self.system, element, self.output_cover().members)
            )
            report.flag('legality', self.steps, f'uncovered elements {uncovered}')
        return report


class Passthrough(Pipeline):
    """Output whatever the background algorithm maintains."""

    def __init__(self, background):
        # type: (DynamicAlgorithm) -> None
        super().__init__(background)
        self._members = set(background.current_cover().members)

    def step(self, update):
        # type: (UpdateStep) -> StepReport
        apply_update(self.universe, update)
        self.background.apply(update)
        self.steps += 1
        cover = self.background.current_cover()
        recourse = len(cover.members ^ self._members)
        self._members = set(cover.members)
        return StepReport(
            step=self.steps,
            kind=update.kind,
            element=update.element,
            recourse=recourse,
            output_size=len(cover),
            output_cost=cover.total_cost,
            background_cost=cover.total_cost,
            interval=0,
            phase=None,
        )

    def output_cover(self):
        # type: () -> CoverSolution
        return self.background.current_cover()


class RecourseTransform(Pipeline):
    """Follow a background algorithm with bounded recourse per update.

    Time is split into intervals. At the start of interval i the output X_i
    and the background cover B_i are frozen. During the first half of the
    interval the sets of B_i missing from the output are added a few per
    step; during the second half the sets of X_i outside B_i are removed the
    same way. Elements inserted meanwhile are covered naively by adding a
    containing set, which is kept until the interval ends. Interval
    halves last h = max(1, ceil(epsilon / (12 * scale) * max(cost(X_i), cost(B_i))))
    steps, where the scale is the background's approximation factor in the
    low-frequency mode and 1 in the high-frequency mode.
    """

    def __init__(self, background, epsilon, mode=TransformMode.LOW_FREQUENCY, strict_naive=False):
        # type: (DynamicAlgorithm, float, TransformMode, bool) -> None
        super().__init__(background)
        self.epsilon = epsilon
        self.mode = mode
        self.strict_naive = strict_naive
        self.alpha = background.approx_alpha()
        if mode == TransformMode.LOW_FREQUENCY:
            if not 0 < epsilon <= 0.5:
                raise ParameterError(f'epsilon must be in (0, 0.5], but got {epsilon}')
            if not at_most(2, self.alpha):
                raise ParameterError(
                    f'the low-frequency transform needs alpha >= 2, but the background has alpha = {self.alpha}'
                )
            self.scale = self.alpha
        else:
            if not isinstance(background, LevelGreedy):
                raise ParameterError(
                    f'the high-frequency transform needs a level greedy background, not {type(background).__name__}'
                )
            if not 0 < epsilon < 0.25:
                raise ParameterError(f'epsilon must be in (0, 1/4), but got {epsilon}')
            self.scale = 1.0
        self.output = background.current_cover().copy()
        self.interval = -1
        self.phase = Phase.ADDING
        self.snapshot_output = CoverSolution()
        self.snapshot_background = CoverSolution()
        self.naive_added = set() # type: set[int]
        self.pending_add = deque() # type: deque[int]
        self.pending_remove = deque() # type: deque[int]
        self.half_length = 1
        self.stretched = False
        self.quota = 0
        self.steps_into_phase = 0
        self.last_step_recourse = 0
        self.begin_interval()

    def __repr__(self):
        # type: () -> str
        return (
            f'RecourseTransform({self.mode.value}, epsilon={self.epsilon},'
            f' interval={self.interval}, phase={self.phase.value}, output={self.output})'
        )

    @property
    def recourse_cap(self):
        # type: () -> int
        return ceil_guarded(12 * self.scale * self.system.aspect_ratio / self.epsilon) + 1

    def begin_interval(self):
        # type: () -> None
        """Freeze the output and the background cover and schedule the changes."""
        self.interval += 1
        self.snapshot_output = self.output.copy()
        self.snapshot_background = self.background.current_cover().copy()
        output_members = self.snapshot_output.members
        background_members = self.snapshot_background.members
        self.pending_add = deque(sorted(background_members - output_members))
        self.pending_remove = deque(sorted(output_members - background_members))
        self.naive_added = set()
        largest = max(self.snapshot_output.total_cost, self.snapshot_background.total_cost)
        length = self.epsilon / (12 * self.scale) * largest
        self.half_length = max(1, ceil_guarded(length))
        # a one-step half is longer than the schedule asks for
        self.stretched = length < 1
        self.phase = Phase.ADDING
        self.steps_into_phase = 0
        self.quota = ceil(len(self.pending_add) / self.half_length)
        LOGGER.debug(
            'interval %d: h = %d, %d sets to add, %d to remove',
            self.interval, self.half_length, len(self.pending_add), len(self.pending_remove),
        )

    def _survives(self, element):
        # type: (int) -> bool
        """Check if a set that stays until the interval ends covers the element."""
        return any(
            set_id in self.snapshot_background or set_id in self.naive_added
            for set_id in self.system.incidence[element]
        )

    def _cover_naively(self, element):
        # type: (int) -> int
        if not self.strict_naive:
            if covered_by(self.system, element, self.output.members) and self._survives(element):
                return 0
        set_id = self.system.cheapest_set(element)
        self.naive_added.add(set_id)
        return int(self.output.include(self.system, set_id))

    def _emit(self):
        # type: () -> int
        recourse = 0
        if self.phase == Phase.ADDING:
            for _ in range(min(self.quota, len(self.pending_add))):
                recourse += self.output.include(self.system, self.pending_add.popleft())
        else:
            for _ in range(min(self.quota, len(self.pending_remove))):
                set_id = self.pending_remove.popleft()
                if set_id in self.snapshot_background or set_id in self.naive_added:
                    continue
                recourse += self.output.exclude(self.system, set_id)
        return recourse

    def _advance(self):
        # type: () -> bool
        """Move the schedule forward one step; return whether a new interval began."""
        self.steps_into_phase += 1
        if self.steps_into_phase < self.half_length:
            return False
        if self.phase == Phase.ADDING:
            if self.pending_add:
                raise ConsistencyError(f'{len(self.pending_add)} additions left at the end of the adding phase')
            self.phase = Phase.REMOVING
            self.steps_into_phase = 0
            self.quota = ceil(len(self.pending_remove) / self.half_length)
            return False
        if self.pending_remove:
            raise ConsistencyError(f'{len(self.pending_remove)} removals left at the end of the removing phase')
        expected = self.snapshot_background.members | self.naive_added
        if self.output.members != expected:
            raise ConsistencyError(
                f'interval {self.interval} ended with output {sorted(self.output.members)},'
                f' expected {sorted(expected)}'
            )
        self.begin_interval()
        return True

    def step(self, update):
        # type: (UpdateStep) -> StepReport
        apply_update(self.universe, update)
        self.background.apply(update)
        self.steps += 1
        recourse = 0
        if update.kind == UpdateKind.INSERT:
            recourse += self._cover_naively(update.element)
        recourse += self._emit()
        interval = self.interval
        phase = self.phase
        stretched = self.stretched
        interval_start = self._advance()
        if recourse > self.recourse_cap:
            raise ConsistencyError(f'step {self.steps} has recourse {recourse} > cap {self.recourse_cap}')
        self.last_step_recourse = recourse
        background_cover = self.background.current_cover()
        return StepReport(
            step=self.steps,
            kind=update.kind,
            element=update.element,
            recourse=recourse,
            output_size=len(self.output),
            output_cost=self.output.total_cost,
            background_cost=background_cover.total_cost,
            interval=interval,
            phase=phase,
            interval_start=interval_start,
            stretched=stretched,
        )

    def output_cover(self):
        # type: () -> CoverSolution
        return self.output

    def check_containment(self):
        # type: () -> AuditReport
        report = super().check_containment()
        output = self.output.members
        frozen = self.snapshot_output.members
        target = self.snapshot_background.members
        naive = self.naive_added
        if not output <= frozen | target | naive:
            extra = sorted(output - (frozen | target | naive))
            report.flag('containment', self.steps, f'output has unscheduled sets {extra}')
        if self.phase == Phase.ADDING:
            required = frozen | naive
        else:
            required = target | naive
        if not required <= output:
            missing = sorted(required - output)
            report.flag('containment', self.steps, f'{self.phase.value} phase is missing sets {missing}')
        return report


def wrap(background, epsilon, mode=TransformMode.LOW_FREQUENCY, strict_naive=False):
    # type: (DynamicAlgorithm, float, TransformMode, bool) -> RecourseTransform
    """Wrap a background algorithm in a bounded-recourse transform."""
    return RecourseTransform(background, epsilon, mode, strict_naive)
