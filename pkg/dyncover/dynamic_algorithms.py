"""Fully dynamic set cover algorithms behind a common interface."""

import logging
from collections import defaultdict
from heapq import heappush, heappop
from math import fsum, log
from operator import mul, sub
from typing import Optional

from .core import TOLERANCE, at_most, approx_equal, ceil_guarded
from .core import SetSystem, CoverSolution, UpdateStep, UpdateKind, AuditReport, is_cover
from .errors import TraceError, ParameterError, ConsistencyError
from .static_solvers import harmonic, greedy_cover, greedy_picks, primal_dual_cover, PDMode


LOGGER = logging.getLogger(__name__)


class DynamicAlgorithm:
    """Abstract base class for an algorithm that maintains a cover under updates.

    After every insert or delete, current_cover() covers every alive element.
    Both updates return the number of sets that entered or left the cover.
    """

    def __init__(self, system):
        # type: (SetSystem) -> None
        self.system = system
        self.alive = set() # type: set[int]
        self.work_counter = 0

    def insert(self, element):
        # type: (int) -> int
        """Insert an element and return the recourse."""
        raise NotImplementedError()

    def delete(self, element):
        # type: (int) -> int
        """Delete an element and return the recourse."""
        raise NotImplementedError()

    def current_cover(self):
        # type: () -> CoverSolution
        """Return the maintained cover."""
        raise NotImplementedError()

    def approx_alpha(self):
        # type: () -> float
        """Return the approximation guarantee of this configuration."""
        raise NotImplementedError()

    def lower_bound(self):
        # type: () -> float
        """Return a certified lower bound on the current optimum."""
        raise NotImplementedError()

    def apply(self, step):
        # type: (UpdateStep) -> int
        """Apply an update step."""
        if step.kind == UpdateKind.INSERT:
            return self.insert(step.element)
        return self.delete(step.element)

    def _check_insert(self, element):
        # type: (int) -> None
        if element in self.alive:
            raise TraceError(f'element {element} inserted while alive')
        if not 0 <= element < self.system.num_elements:
            raise TraceError(f'element {element} is not in the set system')

    def _check_delete(self, element):
        # type: (int) -> None
        if element not in self.alive:
            raise TraceError(f'element {element} deleted while not alive')


class RecomputeGreedy(DynamicAlgorithm):
    """Rerun static greedy from scratch after every update."""

    def __init__(self, system):
        # type: (SetSystem) -> None
        super().__init__(system)
        self.cover = CoverSolution()
        self.charges = greedy_cover(system, ())[1]

    def _recompute(self):
        # type: () -> int
        cover, self.charges = greedy_cover(self.system, self.alive)
        recourse = len(cover.members ^ self.cover.members)
        self.cover = cover
        self.work_counter += self.system.total_size
        return recourse

    def insert(self, element):
        # type: (int) -> int
        self._check_insert(element)
        self.alive.add(element)
        return self._recompute()

    def delete(self, element):
        # type: (int) -> int
        self._check_delete(element)
        self.alive.remove(element)
        return self._recompute()

    def current_cover(self):
        # type: () -> CoverSolution
        return self.cover

    def approx_alpha(self):
        # type: () -> float
        return harmonic(self.system.capacity)

    def lower_bound(self):
        # type: () -> float
        return self.charges.total / harmonic(self.system.capacity)


class LazyPrimalDual(DynamicAlgorithm):
    """Primal-dual that keeps the duals of deleted elements until they pile up.

    An inserted element that is already covered gets a zero dual; otherwise
    its dual is raised until some containing set is tight, and the lowest id
    tight set joins the cover. Deleted elements keep their duals. Once the
    dead dual mass exceeds epsilon times the alive dual mass, the structure
    is rebuilt with static primal-dual over the alive elements, so the cover
    stays within (1 + epsilon) * f of the alive duals.
    """

    def __init__(self, system, epsilon):
        # type: (SetSystem, float) -> None
        super().__init__(system)
        if not 0 < epsilon < 1:
            raise ParameterError(f'epsilon must be in (0, 1), but got {epsilon}')
        self.epsilon = epsilon
        self.cover = CoverSolution()
        self.duals = {} # type: dict[int, float]
        self.dead = set() # type: set[int]
        self.slack = list(system.costs)
        self.dead_mass = 0.0
        self.total_mass = 0.0
        self.rebuilds = 0

    def insert(self, element):
        # type: (int) -> int
        self._check_insert(element)
        self.alive.add(element)
        sets = self.system.incidence[element]
        self.work_counter += len(sets)
        if element in self.dead:
            # still retained, so still covered and its dual still counts
            self.dead.remove(element)
            self.dead_mass -= self.duals[element]
            return 0
        if any(set_id in self.cover for set_id in sets):
            self.duals[element] = 0.0
            return 0
        raise_by = max(0.0, min(self.slack[set_id] for set_id in sets))
        self.duals[element] = raise_by
        self.total_mass += raise_by
        tight = []
        for set_id in sets:
            self.slack[set_id] -= raise_by
            if self.slack[set_id] <= TOLERANCE * self.system.costs[set_id]:
                self.slack[set_id] = 0.0
                tight.append(set_id)
        self.cover.include(self.system, min(tight))
        return 1

    def delete(self, element):
        # type: (int) -> int
        self._check_delete(element)
        self.alive.remove(element)
        self.dead.add(element)
        self.dead_mass += self.duals[element]
        self.work_counter += 1
        if self.dead_mass > self.epsilon * (self.total_mass - self.dead_mass) + TOLERANCE:
            return self._rebuild()
        return 0

    def _rebuild(self):
        # type: () -> int
        cover, duals = primal_dual_cover(self.system, self.alive, PDMode.FIRST_TIGHT)
        recourse = len(cover.members ^ self.cover.members)
        self.cover = cover
        self.duals = dict(duals.duals)
        self.dead.clear()
        self.slack = list(self.system.costs)
        for element, value in self.duals.items():
            for set_id in self.system.incidence[element]:
                self.slack[set_id] -= value
        self.slack = [
            slack if slack > TOLERANCE * cost else 0.0
            for slack, cost in zip(self.slack, self.system.costs)
        ]
        self.dead_mass = 0.0
        self.total_mass = fsum(self.duals.values())
        self.rebuilds += 1
        self.work_counter += self.system.total_size
        LOGGER.debug('lazy primal-dual rebuild %d: %d sets, recourse %d', self.rebuilds, len(cover), recourse)
        return recourse

    def current_cover(self):
        # type: () -> CoverSolution
        return self.cover

    def approx_alpha(self):
        # type: () -> float
        return (1 + self.epsilon) * self.system.frequency

    def lower_bound(self):
        # type: () -> float
        return fsum(self.duals[element] for element in self.alive)


def top_level(epsilon, capacity, aspect_ratio=1.0):
    # type: (float, int, float) -> int
    """Return L = ceil(log_beta(C * n)) + ceil(10 * log_beta(1 / epsilon)) for beta = 1 + epsilon."""
    beta = 1 + epsilon
    return ceil_guarded(log(aspect_ratio * capacity, beta)) + ceil_guarded(10 * log(1 / epsilon, beta))


class LevelGreedy(DynamicAlgorithm):
    """Level-based dynamic greedy with passive levels.

    Every set has a level in [-1, L], where -1 means the set is not in the
    cover. Every retained element (alive or dead) is assigned to one cover
    set and takes its level; its passive level is at least its level. An
    element is k-active if lev(e) <= k < plev(e) and k-passive if
    plev(e) <= k. The structure maintains:

    1. for every set s and level k, |N_k(s)| < beta^(k+1) * cost(s), where
       N_k(s) are the k-active elements of s;
    2. every cover set s has |cov(s)| >= beta^lev(s) * cost(s);
    3. the weighted passive mass is at most 2 * epsilon times the weighted
       active mass.

    Insertions are repaired by promoting sets that break (1) and demoting
    sets that then break (2). Deletions only flag the element as dead. When
    (3) breaks, the structure is rebuilt from a static greedy pass.
    """

    def __init__(self, system, epsilon):
        # type: (SetSystem, float) -> None
        super().__init__(system)
        if not 0 < epsilon < 0.25:
            raise ParameterError(f'epsilon must be in (0, 1/4), but got {epsilon}')
        self.epsilon = epsilon
        self.beta = 1 + epsilon
        self.max_level = top_level(epsilon, system.capacity, system.aspect_ratio)
        self._powers = [self.beta ** level for level in range(self.max_level + 2)]
        self._inverse_powers = [1 / power for power in self._powers]
        self.set_levels = [-1] * system.num_sets
        self.assignment = {} # type: dict[int, int]
        self.passive_levels = {} # type: dict[int, int]
        self.covering = [set() for _ in range(system.num_sets)] # type: list[set[int]]
        self.dead = set() # type: set[int]
        self.cover = CoverSolution()
        # number of retained elements per level and per passive level
        self._level_counts = [0] * (self.max_level + 1)
        self._passive_counts = [0] * (self.max_level + 1)
        self._dirty = [] # type: list[int]
        self._dirty_set = set() # type: set[int]
        self.rebuilds = 0
        self._recourse = 0

    def __repr__(self):
        # type: () -> str
        return f'LevelGreedy(epsilon={self.epsilon}, L={self.max_level}, cover={self.cover})'

    # queries

    def level(self, element):
        # type: (int) -> int
        """Return the level of a retained element."""
        return self.set_levels[self.assignment[element]]

    def active_counts(self, set_id):
        # type: (int) -> list[int]
        """Return |N_k(s)| for every level k in [0, L]."""
        deltas = [0] * (self.max_level + 2)
        for element in self._retained_members(set_id):
            level = self.level(element)
            passive_level = self.passive_levels[element]
            if level < passive_level:
                deltas[level] += 1
                deltas[passive_level] -= 1
        counts = []
        running = 0
        for level in range(self.max_level + 1):
            running += deltas[level]
            counts.append(running)
        return counts

    @property
    def weighted_active(self):
        # type: () -> float
        """The sum of beta^-lev(e) - beta^-plev(e) over retained elements."""
        return fsum(map(mul, map(sub, self._level_counts, self._passive_counts), self._inverse_powers))

    @property
    def weighted_passive(self):
        # type: () -> float
        """The sum of beta^-plev(e) - beta^-(L+1) over retained elements."""
        retained = len(self.assignment)
        return fsum(map(mul, self._passive_counts, self._inverse_powers)) - retained * self._inverse_powers[-1]

    def current_cover(self):
        # type: () -> CoverSolution
        return self.cover

    def approx_alpha(self):
        # type: () -> float
        return (1 + self.epsilon) * log(self.system.capacity)

    def lower_bound(self):
        # type: () -> float
        return self.dual_lower_bound()

    def dual_lower_bound(self):
        # type: () -> float
        """Return a lower bound on the optimum from the level duals."""
        if not self.alive:
            return 0.0
        scale = self.epsilon * (log(self.system.capacity, self.beta) + 2 + 1 / self.epsilon)
        return fsum(
            1 / self._powers[self.level(element)] - 1 / self._powers[self.passive_levels[element]]
            for element in self.alive
        ) / scale

    # thresholds

    def _meets(self, count, set_id, level):
        # type: (int, int, int) -> bool
        """Check count >= beta^level * cost(s), guarding near-integer products."""
        threshold = self._powers[level] * self.system.costs[set_id]
        return count >= threshold - TOLERANCE * max(1.0, threshold)

    def _fitting_level(self, count, set_id):
        # type: (int, int) -> int
        """Return the largest level j <= L with count >= beta^j * cost(s)."""
        level = 0
        while level < self.max_level and self._meets(count, set_id, level + 1):
            level += 1
        return level

    # bookkeeping

    def _retained_members(self, set_id):
        # type: (int) -> list[int]
        self.work_counter += len(self.system.members[set_id])
        return [element for element in self.system.members[set_id] if element in self.assignment]

    def _enter(self, set_id, level):
        # type: (int, int) -> None
        if self.set_levels[set_id] == -1:
            self.cover.include(self.system, set_id)
            self._recourse += 1
        self.set_levels[set_id] = level

    def _leave(self, set_id):
        # type: (int) -> None
        assert not self.covering[set_id]
        self.set_levels[set_id] = -1
        if self.cover.exclude(self.system, set_id):
            self._recourse += 1

    def _move(self, element, set_id):
        # type: (int, int) -> int
        """Reassign a retained element; return the owner it left."""
        owner = self.assignment[element]
        self._level_counts[self.set_levels[owner]] -= 1
        self.covering[owner].discard(element)
        self.covering[set_id].add(element)
        self.assignment[element] = set_id
        self._level_counts[self.set_levels[set_id]] += 1
        self.work_counter += 1
        return owner

    def _set_passive_level(self, element, passive_level):
        # type: (int, int) -> None
        self._passive_counts[self.passive_levels[element]] -= 1
        self.passive_levels[element] = passive_level
        self._passive_counts[passive_level] += 1

    def _relevel(self, set_id, level):
        # type: (int, int) -> None
        """Change the level of a cover set and everything it covers."""
        old = self.set_levels[set_id]
        count = len(self.covering[set_id])
        self._level_counts[old] -= count
        self._level_counts[level] += count
        self.set_levels[set_id] = level

    def _attach(self, element, set_id):
        # type: (int, int) -> None
        self.assignment[element] = set_id
        self.covering[set_id].add(element)
        self.passive_levels[element] = self.max_level
        self._level_counts[self.set_levels[set_id]] += 1
        self._passive_counts[self.max_level] += 1

    def _detach(self, element):
        # type: (int) -> int
        owner = self.assignment.pop(element)
        self.covering[owner].remove(element)
        self._level_counts[self.set_levels[owner]] -= 1
        self._passive_counts[self.passive_levels.pop(element)] -= 1
        return owner

    def _queue(self, set_id):
        # type: (int) -> None
        if set_id not in self._dirty_set:
            self._dirty_set.add(set_id)
            heappush(self._dirty, set_id)

    def _mark_dirty(self, element):
        # type: (int) -> None
        for set_id in self.system.incidence[element]:
            self._queue(set_id)

    # updates

    def insert(self, element):
        # type: (int) -> int
        self._check_insert(element)
        self._recourse = 0
        if element in self.dead:
            self.dead.remove(element)
            owner = self._detach(element)
            self._settle(owner)
        sets = self.system.incidence[element]
        in_cover = [set_id for set_id in sets if self.set_levels[set_id] >= 0]
        if in_cover:
            owner = max(in_cover, key=(lambda set_id: (self.set_levels[set_id], -set_id)))
        else:
            owner = self.system.cheapest_set(element)
            self._enter(owner, 0)
        self.alive.add(element)
        self._attach(element, owner)
        self._mark_dirty(element)
        self._repair()
        self._enforce_passive_bound()
        return self._recourse

    def delete(self, element):
        # type: (int) -> int
        self._check_delete(element)
        self._recourse = 0
        self.alive.remove(element)
        self.dead.add(element)
        self._set_passive_level(element, self.level(element))
        self.work_counter += 1
        self._enforce_passive_bound()
        return self._recourse

    def _passive_bound_holds(self):
        # type: () -> bool
        return at_most(self.weighted_passive, 2 * self.epsilon * self.weighted_active)

    def _enforce_passive_bound(self):
        # type: () -> None
        if not self._passive_bound_holds():
            self.rebuild()

    def _repair(self):
        # type: () -> None
        """Promote and demote sets until every dirty set satisfies both level invariants."""
        cap = (self.max_level + 1) * max(1, self.system.num_sets) * max(1, len(self.assignment)) + 1
        iterations = 0
        while self._dirty:
            iterations += 1
            if iterations > cap:
                raise ConsistencyError(f'level repair exceeded {cap} iterations')
            set_id = heappop(self._dirty)
            self._dirty_set.remove(set_id)
            level = self._violated_level(set_id)
            if level is not None:
                self._promote(set_id, level)

    def _violated_level(self, set_id):
        # type: (int) -> Optional[int]
        """Return the smallest k with |N_k(s)| >= beta^(k+1) * cost(s), if any.

        |N_k(s)| is constant between the levels where a member turns active
        or passive, and the threshold grows with k, so only those levels are
        checked.
        """
        deltas = defaultdict(int) # type: dict[int, int]
        for element in self._retained_members(set_id):
            level = self.level(element)
            passive_level = self.passive_levels[element]
            if level < passive_level:
                deltas[level] += 1
                deltas[passive_level] -= 1
        count = 0
        for level in sorted(deltas):
            count += deltas[level]
            if level < self.max_level and count > 0 and self._meets(count, set_id, level + 1):
                return level
        return None

    def _promote(self, set_id, level):
        # type: (int, int) -> None
        """Raise a set to level + 1, taking every element of it at or below level.

        Dead elements can make a cover set violate below its own level; the
        set then keeps its level and just takes those elements.
        """
        new_level = max(level + 1, self.set_levels[set_id])
        if self.set_levels[set_id] >= 0:
            self._relevel(set_id, new_level)
        else:
            self._enter(set_id, new_level)
        victims = set()
        for element in self._retained_members(set_id):
            if self.level(element) <= level:
                victims.add(self._move(element, set_id))
            if self.passive_levels[element] < new_level and self.assignment[element] == set_id:
                self._set_passive_level(element, new_level)
        victims.discard(set_id)
        for victim in sorted(victims):
            self._settle(victim)
        self._queue(set_id)

    def _settle(self, set_id):
        # type: (int) -> None
        """Restore the coverage invariant of a set that lost elements."""
        if self.set_levels[set_id] < 0:
            return
        covering = self.covering[set_id]
        if covering and self._meets(len(covering), set_id, self.set_levels[set_id]):
            return
        target = self._fitting_level(len(covering), set_id)
        lowered = []
        changed = True
        while changed and covering:
            changed = False
            for element in sorted(covering):
                alternatives = [
                    other for other in self.system.incidence[element]
                    if other != set_id and self.set_levels[other] > target
                ]
                if alternatives:
                    best = max(alternatives, key=(lambda other: (self.set_levels[other], -other)))
                    self._move(element, best)
                    if self.passive_levels[element] < self.set_levels[best]:
                        self._set_passive_level(element, self.set_levels[best])
                    lowered.append(element)
                    changed = True
            target = self._fitting_level(len(covering), set_id)
        if not covering:
            self._leave(set_id)
        else:
            lowered.extend(covering)
            self._relevel(set_id, target)
        for element in lowered:
            self._mark_dirty(element)

    def rebuild(self):
        # type: () -> None
        """Purge dead elements and recompute the levels with static greedy."""
        old_members = set(self.cover.members)
        self.dead.clear()
        self.assignment.clear()
        self.passive_levels.clear()
        for covering in self.covering:
            covering.clear()
        self.set_levels = [-1] * self.system.num_sets
        self._level_counts = [0] * (self.max_level + 1)
        self._passive_counts = [0] * (self.max_level + 1)
        self.cover = CoverSolution()
        for set_id, newly_covered in greedy_picks(self.system, sorted(self.alive)):
            self.cover.include(self.system, set_id)
            self.set_levels[set_id] = self._fitting_level(len(newly_covered), set_id)
            for element in newly_covered:
                self._attach(element, set_id)
        self.work_counter += self.system.total_size
        self._recourse += len(old_members ^ self.cover.members)
        for element in sorted(self.alive):
            self._mark_dirty(element)
        self._repair()
        self.rebuilds += 1
        LOGGER.debug(
            'level greedy rebuild %d: %d alive, %d sets in cover',
            self.rebuilds, len(self.alive), len(self.cover),
        )

    # auditing

    def audit(self):
        # type: () -> AuditReport
        """Recount every invariant from scratch and report each violation."""
        report = AuditReport()
        system = self.system
        retained = set(self.assignment)
        if self.alive | self.dead != retained or self.alive & self.dead:
            report.flag('retained', None, 'alive and dead elements do not partition the assignment')
        for element, owner in self.assignment.items():
            if element not in self.covering[owner]:
                report.flag('assignment', element, f'assigned to {owner} but not in its covering set')
            if element not in system.members[owner]:
                report.flag('assignment', element, f'assigned to {owner}, which does not contain it')
        for set_id, covering in enumerate(self.covering):
            for element in covering:
                if self.assignment.get(element) != set_id:
                    report.flag('assignment', element, f'in cov({set_id}) but assigned elsewhere')
        # levels
        for set_id, level in enumerate(self.set_levels):
            in_cover = set_id in self.cover
            if not -1 <= level <= self.max_level:
                report.flag('set-level', set_id, f'level {level} outside [-1, {self.max_level}]')
            if in_cover != (level >= 0):
                report.flag('set-level', set_id, f'level {level} but in cover is {in_cover}')
            if level < 0:
                if self.covering[set_id]:
                    report.flag('invariant-2', set_id, 'set outside the cover covers elements')
                continue
            count = len(self.covering[set_id])
            if not self._meets(count, set_id, level):
                threshold = self._powers[level] * system.costs[set_id]
                report.flag('invariant-2', set_id, f'|cov| = {count} < beta^{level} * cost', count - threshold)
        for element in self.alive:
            highest = max(self.set_levels[set_id] for set_id in system.incidence[element])
            if self.level(element) != highest:
                report.flag('lev-max', element, f'level {self.level(element)} but a containing set is at {highest}')
        for element in retained:
            level = self.set_levels[self.assignment[element]]
            passive_level = self.passive_levels[element]
            if not 0 <= level <= passive_level <= self.max_level:
                report.flag('plev-bounds', element, f'lev {level}, plev {passive_level}, L {self.max_level}')
        for set_id in range(system.num_sets):
            counts = [0] * (self.max_level + 1)
            for element in system.members[set_id]:
                if element not in self.assignment:
                    continue
                level = self.set_levels[self.assignment[element]]
                for k in range(max(level, 0), min(self.passive_levels[element], self.max_level + 1)):
                    counts[k] += 1
            for k, count in enumerate(counts):
                if count and k < self.max_level and self._meets(count, set_id, k + 1):
                    threshold = self._powers[k + 1] * system.costs[set_id]
                    report.flag('invariant-1', (set_id, k), f'|N_k| = {count} >= {threshold}', threshold - count)
        # aggregates
        level_counts = [0] * (self.max_level + 1)
        passive_counts = [0] * (self.max_level + 1)
        active = [0] * (self.max_level + 2)
        for element in retained:
            level = min(max(self.set_levels[self.assignment[element]], 0), self.max_level)
            passive_level = min(max(self.passive_levels[element], 0), self.max_level)
            level_counts[level] += 1
            passive_counts[passive_level] += 1
            if level < passive_level:
                active[level] += 1
                active[passive_level] -= 1
        if level_counts != self._level_counts or passive_counts != self._passive_counts:
            report.flag('aggregate', None, 'level histograms disagree with a recount')
        at_or_below = 0
        passive_at_or_below = 0
        active_running = 0
        for k in range(self.max_level + 1):
            at_or_below += level_counts[k]
            passive_at_or_below += passive_counts[k]
            active_running += active[k]
            if active_running + passive_at_or_below != at_or_below:
                report.flag('active-passive', k, f'|A_k| + |P_k| = {active_running + passive_at_or_below} != {at_or_below}')
        weighted_active = fsum(
            1 / self._powers[self.level(element)] - 1 / self._powers[self.passive_levels[element]]
            for element in retained
        )
        weighted_passive = fsum(
            1 / self._powers[self.passive_levels[element]] - 1 / self._powers[self.max_level + 1]
            for element in retained
        )
        if not (approx_equal(weighted_active, self.weighted_active, 1e-7)
                and approx_equal(weighted_passive, self.weighted_passive, 1e-7)):
            report.flag('aggregate', None, 'weighted masses disagree with a recount')
        if not at_most(weighted_passive, 2 * self.epsilon * weighted_active):
            report.flag(
                'invariant-3', None,
                f'W_P = {weighted_passive} > 2 * epsilon * W_A = {2 * self.epsilon * weighted_active}',
                2 * self.epsilon * weighted_active - weighted_passive,
            )
        if not is_cover(system, self.alive, self.cover):
            report.flag('feasible', None, 'an alive element is uncovered')
        if not approx_equal(self.cover.total_cost, fsum(system.costs[set_id] for set_id in self.cover.members)):
            report.flag('cost', None, f'cached cost {self.cover.total_cost} is stale')
        report.stats['weighted_active'] = weighted_active
        report.stats['weighted_passive'] = weighted_passive
        report.stats['max_level'] = max(self.set_levels, default=-1)
        return report

    def level_view(self):
        # type: () -> dict[int, tuple[list[int], list[int]]]
        """Return the sets and the retained elements at each non-empty level."""
        view = defaultdict(lambda: ([], [])) # type: dict[int, tuple[list[int], list[int]]]
        for set_id, level in enumerate(self.set_levels):
            if level >= 0:
                view[level][0].append(set_id)
        for element in sorted(self.assignment):
            view[self.level(element)][1].append(element)
        return dict(sorted(view.items()))
