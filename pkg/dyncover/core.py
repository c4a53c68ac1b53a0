"""Set systems, universes, covers, and instance files."""

import json
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum
from math import ceil, fsum, isfinite
from pathlib import Path
from typing import Any, Optional, Union

from .errors import ParseError, ValidationError, TraceError, AuditFailure


TOLERANCE = 1e-9

HEADER_MAGIC = 'setcover'
HEADER_VERSION = 'v1'
TRACE_MARKER = 'TRACE'


def at_most(value, bound, tol=TOLERANCE):
    # type: (float, float, float) -> bool
    """Check value <= bound up to a relative tolerance."""
    return value <= bound + tol * max(1.0, abs(bound))


def approx_equal(value1, value2, tol=TOLERANCE):
    # type: (float, float, float) -> bool
    """Check two values are equal up to a relative tolerance."""
    return abs(value1 - value2) <= tol * max(1.0, abs(value1), abs(value2))


def ceil_guarded(value, tol=TOLERANCE):
    # type: (float, float) -> int
    """Round up, ignoring floating point noise just above an integer."""
    return ceil(value - tol * max(1.0, abs(value)))


class SetSystem:
    """A fixed family of weighted sets over dense element ids."""

    def __init__(
            self,
            costs,
            members,
            capacity,
            aspect_ratio=1.0,
            declared_frequency=None,
            set_labels=None,
            element_labels=None,
        ): # pylint: disable = too-many-arguments
        # type: (Sequence[float], Sequence[Iterable[int]], int, float, Optional[int], Optional[Sequence[str]], Optional[Sequence[str]]) -> None
        """Initialize and validate the SetSystem."""
        self.costs = tuple(float(cost) for cost in costs)
        self.members = tuple(tuple(sorted(set(elements))) for elements in members)
        self.capacity = capacity
        self.aspect_ratio = float(aspect_ratio)
        self.declared_frequency = declared_frequency
        for set_id, elements in enumerate(self.members):
            if elements and elements[0] < 0:
                raise ValidationError(f'set {set_id} has a negative element id {elements[0]}')
        num_elements = 1 + max(
            (element for elements in self.members for element in elements),
            default=-1,
        )
        incidence = [[] for _ in range(num_elements)] # type: list[list[int]]
        for set_id, elements in enumerate(self.members):
            for element in elements:
                incidence[element].append(set_id)
        self.incidence = tuple(tuple(sets) for sets in incidence)
        if set_labels is None:
            set_labels = [f'S{set_id}' for set_id in range(len(self.costs))]
        if element_labels is None:
            element_labels = [str(element) for element in range(num_elements)]
        self.set_labels = tuple(set_labels)
        self.element_labels = tuple(element_labels)
        self.validate()

    def __repr__(self):
        # type: () -> str
        return (
            f'SetSystem(m={self.num_sets}, elements={self.num_elements},'
            f' n={self.capacity}, f={self.frequency}, C={self.aspect_ratio})'
        )

    @property
    def num_sets(self):
        # type: () -> int
        """The number of sets, m."""
        return len(self.costs)

    @property
    def num_elements(self):
        # type: () -> int
        """The number of distinct element ids."""
        return len(self.incidence)

    @property
    def frequency(self):
        # type: () -> int
        """The frequency bound f."""
        if self.declared_frequency is not None:
            return self.declared_frequency
        return max((len(sets) for sets in self.incidence), default=1)

    @property
    def total_size(self):
        # type: () -> int
        """The sum of all set sizes."""
        return sum(len(elements) for elements in self.members)

    def validate(self):
        # type: () -> None
        """Check every SetSystem invariant, naming the first offender."""
        if self.capacity < 1:
            raise ValidationError(f'capacity n must be positive, got {self.capacity}')
        if not isfinite(self.aspect_ratio) or self.aspect_ratio < 1:
            raise ValidationError(f'aspect ratio C must be >= 1, got {self.aspect_ratio}')
        if len(self.members) != len(self.costs):
            raise ValidationError(f'{len(self.costs)} costs for {len(self.members)} sets')
        if len(self.set_labels) != self.num_sets:
            raise ValidationError(f'{len(self.set_labels)} labels for {self.num_sets} sets')
        if len(self.element_labels) != self.num_elements:
            raise ValidationError(f'{len(self.element_labels)} labels for {self.num_elements} elements')
        if self.declared_frequency is not None and self.declared_frequency < 1:
            raise ValidationError(f'frequency f must be positive, got {self.declared_frequency}')
        lower = 1 / self.aspect_ratio
        for set_id, cost in enumerate(self.costs):
            if not (isfinite(cost) and at_most(lower, cost) and at_most(cost, 1.0)):
                raise ValidationError(
                    f'set {self.set_labels[set_id]} has cost {cost} outside [{lower}, 1]'
                )
        for element, sets in enumerate(self.incidence):
            if not 1 <= len(sets) <= self.frequency:
                raise ValidationError(
                    f'element {self.element_labels[element]} belongs to {len(sets)} sets;'
                    f' frequency must be in [1, {self.frequency}]'
                )

    def cheapest_set(self, element):
        # type: (int) -> int
        """Get the cheapest set containing an element, ties by lowest id."""
        return min(self.incidence[element], key=(lambda set_id: (self.costs[set_id], set_id)))


class UpdateKind(Enum):
    """The kind of an adversarial update."""
    INSERT = '+'
    DELETE = '-'


@dataclass(frozen=True)
class UpdateStep:
    """A single element insertion or deletion."""
    kind: UpdateKind
    element: int

    @classmethod
    def insert(cls, element):
        # type: (int) -> UpdateStep
        """Create an insertion."""
        return cls(UpdateKind.INSERT, element)

    @classmethod
    def delete(cls, element):
        # type: (int) -> UpdateStep
        """Create a deletion."""
        return cls(UpdateKind.DELETE, element)


@dataclass
class UniverseState:
    """The alive elements, plus deleted elements an algorithm still retains."""
    capacity: int
    alive: set[int] = field(default_factory=set)
    dead: set[int] = field(default_factory=set)
    lifespan: dict[int, int] = field(default_factory=dict)

    def copy(self):
        # type: () -> UniverseState
        """Create an independent copy."""
        return UniverseState(
            self.capacity,
            set(self.alive),
            set(self.dead),
            dict(self.lifespan),
        )

    def purge(self, elements=None):
        # type: (Optional[Iterable[int]]) -> None
        """Forget dead elements (all of them by default)."""
        if elements is None:
            self.dead.clear()
        else:
            self.dead.difference_update(elements)


class CoverSolution:
    """A set of set ids with a cached total cost."""

    def __init__(self, members=(), total_cost=0.0):
        # type: (Iterable[int], float) -> None
        self.members = set(members)
        self.total_cost = total_cost

    def __len__(self):
        # type: () -> int
        return len(self.members)

    def __iter__(self):
        # type: () -> Iterator[int]
        yield from sorted(self.members)

    def __contains__(self, set_id):
        # type: (Any) -> bool
        return set_id in self.members

    def __eq__(self, other):
        # type: (Any) -> bool
        return isinstance(other, CoverSolution) and self.members == other.members

    def __repr__(self):
        # type: () -> str
        return f'CoverSolution({sorted(self.members)}, cost={self.total_cost:.6g})'

    @classmethod
    def of(cls, system, members):
        # type: (SetSystem, Iterable[int]) -> CoverSolution
        """Create a solution and compute its cost."""
        solution = cls(members)
        solution_cost(system, solution)
        return solution

    def copy(self):
        # type: () -> CoverSolution
        """Create an independent copy."""
        return CoverSolution(self.members, self.total_cost)

    def include(self, system, set_id):
        # type: (SetSystem, int) -> bool
        """Add a set; return whether the solution changed."""
        if set_id in self.members:
            return False
        self.members.add(set_id)
        self.total_cost += system.costs[set_id]
        return True

    def exclude(self, system, set_id):
        # type: (SetSystem, int) -> bool
        """Remove a set; return whether the solution changed."""
        if set_id not in self.members:
            return False
        self.members.remove(set_id)
        self.total_cost -= system.costs[set_id]
        if not self.members:
            self.total_cost = 0.0
        return True


@dataclass(frozen=True)
class Finding:
    """A single violated property found by an audit."""
    prop: str
    subject: Any
    detail: str
    slack: float = 0.0

    def __str__(self):
        # type: () -> str
        return f'{self.prop} @ {self.subject}: {self.detail} (slack {self.slack:.3g})'


@dataclass
class AuditReport:
    """The findings of an audit; clean when there are none."""
    findings: list[Finding] = field(default_factory=list)
    slacks: dict[Any, float] = field(default_factory=dict)
    stats: dict[str, float] = field(default_factory=dict)

    def __bool__(self):
        # type: () -> bool
        return self.ok

    @property
    def ok(self):
        # type: () -> bool
        """Whether the audit found nothing."""
        return not self.findings

    def flag(self, prop, subject, detail, slack=0.0):
        # type: (str, Any, str, float) -> None
        """Record a violation."""
        self.findings.append(Finding(prop, subject, detail, slack))

    def extend(self, other):
        # type: (AuditReport) -> None
        """Merge another report into this one."""
        self.findings.extend(other.findings)
        self.slacks.update(other.slacks)
        self.stats.update(other.stats)

    def raise_if_failed(self, what='audit'):
        # type: (str) -> None
        """Raise AuditFailure if anything was found."""
        if self.findings:
            summary = '; '.join(str(finding) for finding in self.findings[:5])
            raise AuditFailure(f'{what} failed with {len(self.findings)} finding(s): {summary}', self.findings)


def covered_by(system, element, members):
    # type: (SetSystem, int, Union[set[int], CoverSolution]) -> bool
    """Check if an element has a containing set among members."""
    return any(set_id in members for set_id in system.incidence[element])


def is_cover(system, universe, sol):
    # type: (SetSystem, Union[UniverseState, Iterable[int]], CoverSolution) -> bool
    """Check that every alive element is in some member set."""
    alive = universe.alive if isinstance(universe, UniverseState) else universe
    members = sol.members
    return all(covered_by(system, element, members) for element in alive)


class CoverageCounter:
    """Track how many sets of a changing solution contain each element.

    Each sync only looks at the sets that entered or left the solution, so
    checking legality after every update costs the recourse, not the universe.
    """

    def __init__(self, system):
        # type: (SetSystem) -> None
        self.system = system
        self.counts = [0] * system.num_elements
        self.members = set() # type: set[int]
        self.uncovered = set() # type: set[int]

    def sync(self, sol, alive, touched=()):
        # type: (CoverSolution, Union[set[int], frozenset[int]], Iterable[int]) -> list[int]
        """Catch up with a solution; return the alive elements it leaves uncovered.

        Only elements in touched, elements uncovered at the last sync, and
        elements that lost their last set are examined, so every element that
        became alive since the last sync must be in touched.
        """
        suspects = set(touched) | self.uncovered
        removed = self.members - sol.members
        added = sol.members - self.members
        for set_id in added:
            for element in self.system.members[set_id]:
                self.counts[element] += 1
        for set_id in removed:
            for element in self.system.members[set_id]:
                self.counts[element] -= 1
                if not self.counts[element]:
                    suspects.add(element)
        self.members -= removed
        self.members |= added
        uncovered = sorted(element for element in suspects if element in alive and not self.counts[element])
        self.uncovered = set(uncovered)
        return uncovered


def solution_cost(system, sol):
    # type: (SetSystem, CoverSolution) -> float
    """Compute the total cost of a solution and refresh its cache."""
    for set_id in sol.members:
        if not 0 <= set_id < system.num_sets:
            raise KeyError(f'unknown set id {set_id}')
    sol.total_cost = fsum(system.costs[set_id] for set_id in sol.members)
    return sol.total_cost


def apply_update(universe, step):
    # type: (UniverseState, UpdateStep) -> UniverseState
    """Apply an update to the universe in place and return it."""
    element = step.element
    if step.kind == UpdateKind.INSERT:
        if element in universe.alive:
            raise TraceError(f'element {element} inserted while alive')
        if len(universe.alive) >= universe.capacity:
            raise TraceError(f'inserting {element} exceeds capacity n={universe.capacity}')
        universe.dead.discard(element)
        universe.alive.add(element)
        universe.lifespan[element] = universe.lifespan.get(element, 0) + 1
    else:
        if element not in universe.alive:
            raise TraceError(f'element {element} deleted while not alive')
        universe.alive.remove(element)
        universe.dead.add(element)
    return universe


def replay(system, trace, universe=None):
    # type: (SetSystem, Iterable[UpdateStep], Optional[UniverseState]) -> UniverseState
    """Apply a whole trace to a (fresh) universe."""
    if universe is None:
        universe = UniverseState(system.capacity)
    for step in trace:
        apply_update(universe, step)
    return universe


# instance files

_UPDATE_REGEX = re.compile(r'([+-])\s*(\S+)')


def _format_number(value):
    # type: (float) -> str
    if value == int(value):
        return str(int(value))
    return repr(value)


def _parse_cost(token, line_number):
    # type: (str, Optional[int]) -> float
    try:
        cost = float(token)
    except ValueError as err:
        raise ParseError(f'invalid cost "{token}"', line_number) from err
    if not isfinite(cost):
        raise ParseError(f'invalid cost "{token}"', line_number)
    return cost


def _build(header, set_lines, trace_lines):
    # type: (dict[str, Any], list[tuple[Optional[int], str, float, list[str]]], list[tuple[Optional[int], str, str]]) -> tuple[SetSystem, list[UpdateStep]]
    """Assign dense ids, validate the system, and replay the trace."""
    set_labels = [] # type: list[str]
    element_ids = {} # type: dict[str, int]
    costs = []
    members = []
    seen_sets = set() # type: set[str]
    for line_number, label, cost, elements in set_lines:
        if label in seen_sets:
            raise ParseError(f'duplicate set "{label}"', line_number)
        seen_sets.add(label)
        set_labels.append(label)
        costs.append(cost)
        ids = []
        for element in elements:
            if element not in element_ids:
                element_ids[element] = len(element_ids)
            ids.append(element_ids[element])
        members.append(ids)
    system = SetSystem(
        costs,
        members,
        capacity=header['n'],
        aspect_ratio=header['C'],
        declared_frequency=header.get('f'),
        set_labels=set_labels,
        element_labels=list(element_ids),
    )
    trace = []
    universe = UniverseState(system.capacity)
    for line_number, sign, label in trace_lines:
        if label not in element_ids:
            raise ValidationError(f'element {label} in the trace belongs to no set')
        step = UpdateStep(UpdateKind(sign), element_ids[label])
        try:
            apply_update(universe, step)
        except TraceError as err:
            raise TraceError(f'line {line_number}: {err}') from err
        trace.append(step)
    return system, trace


def _parse_header(line, line_number):
    # type: (str, int) -> dict[str, Any]
    tokens = line.split()
    if tokens[:2] != [HEADER_MAGIC, HEADER_VERSION]:
        raise ParseError(f'expected header "{HEADER_MAGIC} {HEADER_VERSION} n=<int> C=<decimal>"', line_number)
    header = {} # type: dict[str, Any]
    for token in tokens[2:]:
        key, sep, value = token.partition('=')
        if not sep:
            raise ParseError(f'malformed header field "{token}"', line_number)
        try:
            if key in ('n', 'f'):
                header[key] = int(value)
            elif key == 'C':
                header[key] = _parse_cost(value, line_number)
            else:
                raise ParseError(f'unknown header field "{key}"', line_number)
        except ValueError as err:
            if isinstance(err, ParseError):
                raise
            raise ParseError(f'malformed header field "{token}"', line_number) from err
    if 'n' not in header or 'C' not in header:
        raise ParseError('header must declare n and C', line_number)
    return header


def parse_instance(text):
    # type: (str) -> tuple[SetSystem, list[UpdateStep]]
    """Parse the text instance format."""
    header = None # type: Optional[dict[str, Any]]
    set_lines = [] # type: list[tuple[Optional[int], str, float, list[str]]]
    trace_lines = [] # type: list[tuple[Optional[int], str, str]]
    in_trace = False
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if header is None:
            header = _parse_header(line, line_number)
        elif line == TRACE_MARKER:
            if in_trace:
                raise ParseError(f'second {TRACE_MARKER} marker', line_number)
            in_trace = True
        elif in_trace:
            match = _UPDATE_REGEX.fullmatch(line)
            if not match:
                raise ParseError(f'expected "+ <elem>" or "- <elem>", got "{line}"', line_number)
            trace_lines.append((line_number, match.group(1), match.group(2)))
        else:
            tokens = line.split()
            if tokens[0] != 'S' or len(tokens) < 3:
                raise ParseError(f'expected "S <id> <cost> <elem> ...", got "{line}"', line_number)
            set_lines.append((line_number, tokens[1], _parse_cost(tokens[2], line_number), tokens[3:]))
    if header is None:
        raise ParseError('missing header')
    return _build(header, set_lines, trace_lines)


def parse_json_instance(text):
    # type: (str) -> tuple[SetSystem, list[UpdateStep]]
    """Parse the JSON mirror of the instance format."""
    try:
        data = json.loads(text)
        header = {'n': int(data['n']), 'C': float(data['C'])}
        if data.get('f') is not None:
            header['f'] = int(data['f'])
        set_lines = [
            (None, str(entry['id']), _parse_cost(str(entry['cost']), None), [str(element) for element in entry['elements']])
            for entry in data['sets']
        ]
        trace_lines = []
        for update in data.get('trace', []):
            match = _UPDATE_REGEX.fullmatch(str(update).strip())
            if not match:
                raise ParseError(f'malformed update "{update}"')
            trace_lines.append((None, match.group(1), match.group(2)))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as err:
        raise ParseError(f'malformed JSON instance: {err}') from err
    if data.get('format', HEADER_MAGIC) != HEADER_MAGIC:
        raise ParseError(f'unknown format "{data.get("format")}"')
    return _build(header, set_lines, trace_lines)


def format_instance(system, trace=()):
    # type: (SetSystem, Iterable[UpdateStep]) -> str
    """Format an instance in the text format."""
    header = f'{HEADER_MAGIC} {HEADER_VERSION} n={system.capacity} C={_format_number(system.aspect_ratio)}'
    if system.declared_frequency is not None:
        header += f' f={system.declared_frequency}'
    lines = [header]
    for set_id, elements in enumerate(system.members):
        lines.append(' '.join([
            'S',
            system.set_labels[set_id],
            _format_number(system.costs[set_id]),
            *(system.element_labels[element] for element in elements),
        ]))
    lines.append(TRACE_MARKER)
    for step in trace:
        lines.append(f'{step.kind.value} {system.element_labels[step.element]}')
    return '\n'.join(lines) + '\n'


def format_json_instance(system, trace=()):
    # type: (SetSystem, Iterable[UpdateStep]) -> str
    """Format an instance in the JSON format."""
    data = {
        'format': HEADER_MAGIC,
        'version': 1,
        'n': system.capacity,
        'C': system.aspect_ratio,
        'sets': [
            {
                'id': system.set_labels[set_id],
                'cost': system.costs[set_id],
                'elements': [system.element_labels[element] for element in elements],
            }
            for set_id, elements in enumerate(system.members)
        ],
        'trace': [f'{step.kind.value}{system.element_labels[step.element]}' for step in trace],
    } # type: dict[str, Any]
    if system.declared_frequency is not None:
        data['f'] = system.declared_frequency
    return json.dumps(data, indent=2) + '\n'


def load_instance(path):
    # type: (Union[str, Path]) -> tuple[SetSystem, list[UpdateStep]]
    """Load an instance and its trace from a text or JSON file."""
    path = Path(path)
    text = path.read_text(encoding='utf-8')
    if path.suffix == '.json':
        return parse_json_instance(text)
    return parse_instance(text)


def save_instance(path, system, trace=()):
    # type: (Union[str, Path], SetSystem, Iterable[UpdateStep]) -> None
    """Save an instance and its trace as text, or JSON by suffix."""
    path = Path(path)
    if path.suffix == '.json':
        text = format_json_instance(system, trace)
    else:
        text = format_instance(system, trace)
    path.write_text(text, encoding='utf-8')
