"""Static set cover solvers, dual certificates, and robustness checks."""

import logging
from collections.abc import Collection, Iterable, Iterator
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from heapq import heapify, heappop, heappush
from math import fsum, inf as INF
from typing import Optional, Union

from .core import TOLERANCE, at_most
from .core import SetSystem, UniverseState, CoverSolution, AuditReport
from .errors import InfeasibleError, ParameterError, BudgetExhausted, AuditFailure
from .timing import InterruptibleAlgorithm


LOGGER = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 10**7
ORACLE_MAX_SETS = 22

Universe = Union[UniverseState, Collection[int]]


@lru_cache(maxsize=None)
def harmonic(n):
    # type: (int) -> float
    """Return the n-th harmonic number H_n (H_0 = 0)."""
    return fsum(1 / k for k in range(1, n + 1))


def alive_elements(universe):
    # type: (Universe) -> list[int]
    """Get the alive elements in increasing id order."""
    if isinstance(universe, UniverseState):
        return sorted(universe.alive)
    return sorted(universe)


@dataclass
class ChargeVector:
    """The weight q(e) greedy assigns to each element it covers."""
    charges: dict[int, float] = field(default_factory=dict)

    def __getitem__(self, element):
        # type: (int) -> float
        return self.charges.get(element, 0.0)

    def __len__(self):
        # type: () -> int
        return len(self.charges)

    @property
    def total(self):
        # type: () -> float
        """The total charge, equal to greedy's cost."""
        return fsum(self.charges.values())

    def to_duals(self, scale):
        # type: (float) -> DualVector
        """Divide every charge by scale to get a dual vector."""
        return DualVector({element: charge / scale for element, charge in self.charges.items()})


@dataclass
class DualVector:
    """A dual solution y of the covering LP."""
    duals: dict[int, float] = field(default_factory=dict)

    def __getitem__(self, element):
        # type: (int) -> float
        return self.duals.get(element, 0.0)

    def __len__(self):
        # type: () -> int
        return len(self.duals)

    @property
    def total(self):
        # type: () -> float
        """The dual objective."""
        return fsum(self.duals.values())

    def restricted(self, elements):
        # type: (Collection[int]) -> DualVector
        """Keep only the duals of the given elements."""
        return DualVector({
            element: value for element, value in self.duals.items()
            if element in elements
        })

    def feasibility(self, system):
        # type: (SetSystem) -> AuditReport
        """Check every set constraint sum(y(e), e in S) <= cost(S)."""
        report = AuditReport()
        loads = {} # type: dict[int, list[float]]
        for element, value in self.duals.items():
            if value < -TOLERANCE:
                report.flag('dual-nonnegative', element, f'y = {value}', value)
            for set_id in system.incidence[element]:
                loads.setdefault(set_id, []).append(value)
        for set_id, values in loads.items():
            load = fsum(values)
            cost = system.costs[set_id]
            report.slacks[set_id] = cost - load
            if not at_most(load, cost):
                report.flag('dual-feasible', set_id, f'load {load} > cost {cost}', cost - load)
        return report


def greedy_picks(system, elements):
    # type: (SetSystem, Iterable[int]) -> Iterator[tuple[int, list[int]]]
    """Run greedy, yielding each picked set with the elements it newly covers.

    Picks the set minimizing cost per newly covered element, ties by lowest
    set id. Uses a heap with lazy re-evaluation: a popped entry whose count
    is stale is pushed back with its current ratio.
    """
    uncovered = set(elements)
    for element in uncovered:
        if not system.incidence[element]:
            raise InfeasibleError(element)
    counts = {} # type: dict[int, int]
    for element in uncovered:
        for set_id in system.incidence[element]:
            counts[set_id] = counts.get(set_id, 0) + 1
    heap = [
        (system.costs[set_id] / count, set_id, count)
        for set_id, count in counts.items()
    ]
    heapify(heap)
    while uncovered:
        _, set_id, count = heappop(heap)
        current = counts[set_id]
        if current == 0:
            continue
        if current != count:
            heappush(heap, (system.costs[set_id] / current, set_id, current))
            continue
        newly_covered = [element for element in system.members[set_id] if element in uncovered]
        for element in newly_covered:
            uncovered.remove(element)
            for other in system.incidence[element]:
                counts[other] -= 1
        yield set_id, newly_covered


def greedy_cover(system, universe):
    # type: (SetSystem, Universe) -> tuple[CoverSolution, ChargeVector]
    """Compute the greedy cover and its dual-fitting charges."""
    cover = CoverSolution()
    charges = ChargeVector()
    for set_id, newly_covered in greedy_picks(system, alive_elements(universe)):
        cover.include(system, set_id)
        charge = system.costs[set_id] / len(newly_covered)
        for element in newly_covered:
            charges.charges[element] = charge
    cover.total_cost = fsum(system.costs[set_id] for set_id in cover.members)
    return cover, charges


def charge_audit(system, charges):
    # type: (SetSystem, ChargeVector) -> AuditReport
    """Verify the per-set harmonic bound and dual feasibility of q/H_n.

    For every set S, sum(q(e), e in S alive) <= H_|S| * cost(S); the slack of
    each set is recorded. Raises AuditFailure on any violation.
    """
    report = AuditReport()
    h_n = harmonic(system.capacity)
    largest = 0
    for set_id, elements in enumerate(system.members):
        alive = [element for element in elements if element in charges.charges]
        if not alive:
            continue
        largest = max(largest, len(alive))
        load = fsum(charges.charges[element] for element in alive)
        bound = harmonic(len(alive)) * system.costs[set_id]
        report.slacks[set_id] = bound - load
        if not at_most(load, bound):
            report.flag('harmonic-charge', set_id, f'charge {load} > H_{len(alive)} * cost = {bound}', bound - load)
    feasibility = charges.to_duals(h_n).feasibility(system)
    report.findings.extend(feasibility.findings)
    report.stats['h_n'] = h_n
    report.stats['h_d'] = harmonic(largest)
    report.stats['total_charge'] = charges.total
    report.raise_if_failed('charge audit')
    return report


class PDMode(Enum):
    """Which tight sets primal-dual adds."""
    ALL_TIGHT = 'all'
    FIRST_TIGHT = 'first'


def primal_dual_cover(system, universe, mode=PDMode.FIRST_TIGHT):
    # type: (SetSystem, Universe, PDMode) -> tuple[CoverSolution, DualVector]
    """Compute the primal-dual cover, raising duals in element id order."""
    cover = CoverSolution()
    duals = DualVector()
    slack = {} # type: dict[int, float]
    for element in alive_elements(universe):
        sets = system.incidence[element]
        if not sets:
            raise InfeasibleError(element)
        if any(set_id in cover.members for set_id in sets):
            duals.duals[element] = 0.0
            continue
        for set_id in sets:
            if set_id not in slack:
                slack[set_id] = system.costs[set_id]
        raise_by = min(slack[set_id] for set_id in sets)
        duals.duals[element] = raise_by
        tight = []
        for set_id in sets:
            slack[set_id] -= raise_by
            if slack[set_id] <= TOLERANCE * system.costs[set_id]:
                slack[set_id] = 0.0
                tight.append(set_id)
        if mode == PDMode.FIRST_TIGHT:
            tight = [min(tight)]
        for set_id in tight:
            cover.include(system, set_id)
    cover.total_cost = fsum(system.costs[set_id] for set_id in cover.members)
    return cover, duals


def dual_lower_bound(system, duals):
    # type: (SetSystem, DualVector) -> float
    """Return the dual objective, a lower bound on OPT by weak duality."""
    report = duals.feasibility(system)
    if not report.ok:
        worst = min(report.findings, key=(lambda finding: finding.slack))
        raise AuditFailure(f'refusing infeasible duals: {worst}', report.findings)
    return duals.total


class ExactCoverSearch(InterruptibleAlgorithm):
    """Branch and bound over include/exclude decisions for each set.

    The greedy cover is the initial incumbent. Each node is pruned with the
    dual bound sum(min cost(S)/|S & R|, S containing e) over the uncovered
    elements R, which is feasible for the covering LP restricted to the sets
    still available. Branches on the available set covering the most
    uncovered elements per unit cost, including it first.
    """

    def __init__(self, system, universe):
        # type: (SetSystem, Universe) -> None
        super().__init__()
        self.system = system
        self.elements = alive_elements(universe)
        bits = {element: 1 << index for index, element in enumerate(self.elements)}
        self.masks = {} # type: dict[int, int]
        for element in self.elements:
            if not system.incidence[element]:
                raise InfeasibleError(element)
            for set_id in system.incidence[element]:
                self.masks[set_id] = self.masks.get(set_id, 0) | bits[element]
        self.element_sets = [
            [set_id for set_id in system.incidence[element]]
            for element in self.elements
        ]
        self.incumbent = CoverSolution()
        self.root_bound = 0.0
        self.nodes = 0
        self._completed = False
        self.restart()

    @property
    def completed(self):
        # type: () -> bool
        return self._completed

    def restart(self):
        # type: () -> None
        self.incumbent, _ = greedy_cover(self.system, self.elements)
        self.nodes = 0
        self._completed = False
        full = (1 << len(self.elements)) - 1
        bound = self._lower_bound(full, frozenset(self.masks))
        self.root_bound = 0.0 if bound is None else bound

    def _lower_bound(self, uncovered, available):
        # type: (int, frozenset[int]) -> Optional[float]
        """Return the dual bound for the uncovered elements, None if infeasible."""
        total = []
        remaining = uncovered
        while remaining:
            low = remaining & -remaining
            index = low.bit_length() - 1
            remaining ^= low
            best = INF
            for set_id in self.element_sets[index]:
                if set_id in available:
                    ratio = self.system.costs[set_id] / (self.masks[set_id] & uncovered).bit_count()
                    best = min(best, ratio)
            if best == INF:
                return None
            total.append(best)
        return fsum(total)

    def units_of_work(self):
        # type: () -> Iterator[None]
        full = (1 << len(self.elements)) - 1
        yield from self._branch(full, frozenset(self.masks), [], 0.0)
        self._completed = True
        LOGGER.debug('exact search finished after %d nodes, cost %s', self.nodes, self.incumbent.total_cost)

    def _branch(self, uncovered, available, chosen, cost):
        # type: (int, frozenset[int], list[int], float) -> Iterator[None]
        self.nodes += 1
        yield
        if not uncovered:
            if cost < self.incumbent.total_cost - TOLERANCE * max(1.0, cost):
                self.incumbent = CoverSolution.of(self.system, chosen)
            return
        available = frozenset(set_id for set_id in available if self.masks[set_id] & uncovered)
        bound = self._lower_bound(uncovered, available)
        if bound is None or at_most(self.incumbent.total_cost, cost + bound):
            return
        pivot = min(
            available,
            key=(lambda set_id: (
                -(self.masks[set_id] & uncovered).bit_count() / self.system.costs[set_id],
                set_id,
            )),
        )
        rest = available - {pivot}
        chosen.append(pivot)
        yield from self._branch(uncovered & ~self.masks[pivot], rest, chosen, cost + self.system.costs[pivot])
        chosen.pop()
        yield from self._branch(uncovered, rest, chosen, cost)


def exact_cover(system, universe, budget=DEFAULT_NODE_BUDGET):
    # type: (SetSystem, Universe, int) -> CoverSolution
    """Compute a minimum cost cover, or raise BudgetExhausted."""
    search = ExactCoverSearch(system, universe)
    if not search.run_for_steps(budget):
        raise BudgetExhausted(search.incumbent, search.root_bound, budget)
    return search.incumbent


@dataclass
class RobustnessReport:
    """The outcome of checking a greedy cover against deletions."""
    delta: float
    cost: float
    removed_charge: float
    lower_bound: float
    optimum: Optional[float]
    bound: float
    h_n: float
    h_d: float

    @property
    def ratio(self):
        # type: () -> Optional[float]
        """cost(X) / OPT', if OPT' is known."""
        if self.optimum is None:
            return None
        if self.optimum == 0:
            return INF if self.cost > 0 else 1.0
        return self.cost / self.optimum

    @property
    def certified_ratio(self):
        # type: () -> float
        """cost(X) divided by the certified lower bound on OPT'."""
        if self.lower_bound == 0:
            return INF if self.cost > 0 else 1.0
        return self.cost / self.lower_bound

    @property
    def holds(self):
        # type: () -> bool
        """Whether cost(X)/OPT' <= H_n/(1 - delta)."""
        ratio = self.ratio if self.ratio is not None else self.certified_ratio
        return ratio == 1.0 or at_most(ratio, self.bound)


def robustness_check(system, cover, charges, deleted, exact_limit=ORACLE_MAX_SETS, budget=DEFAULT_NODE_BUDGET):
    # type: (SetSystem, CoverSolution, ChargeVector, Collection[int], int, int) -> RobustnessReport
    """Check the greedy robustness bound after deleting the given elements."""
    alive = set(charges.charges)
    deleted = set(deleted)
    if not deleted <= alive:
        raise ParameterError(f'deleted elements {sorted(deleted - alive)} are not alive')
    cost = fsum(system.costs[set_id] for set_id in cover.members)
    if deleted and at_most(cost, len(deleted)):
        raise ParameterError(f'|D| = {len(deleted)} reaches cost(X) = {cost}; delta >= 1 is not covered')
    delta = len(deleted) / cost if cost > 0 else 0.0
    h_n = harmonic(system.capacity)
    remaining = alive - deleted
    removed = fsum(charges.charges[element] for element in deleted)
    lower_bound = fsum(charges.charges[element] for element in remaining) / h_n
    optimum = None # type: Optional[float]
    if system.num_sets <= exact_limit:
        try:
            optimum = exact_cover(system, remaining, budget).total_cost
        except BudgetExhausted:
            LOGGER.info('exact oracle exhausted its budget; reporting the dual bound only')
    largest = max(
        (sum(1 for element in elements if element in remaining) for elements in system.members),
        default=0,
    )
    return RobustnessReport(
        delta=delta,
        cost=cost,
        removed_charge=removed,
        lower_bound=lower_bound,
        optimum=optimum,
        bound=h_n / (1 - delta),
        h_n=h_n,
        h_d=harmonic(largest),
    )
