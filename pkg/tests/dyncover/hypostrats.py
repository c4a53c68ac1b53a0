"""Shared Hypothesis strategies."""

from hypothesis import strategies as strats

from dyncover.core import SetSystem, UpdateStep


@strats.composite
def set_systems(draw, max_sets=6, max_elements=8, aspect_ratio=4.0, unit_costs=False, min_capacity=2):
    # type: (strats.DrawFn, int, int, float, bool, int) -> SetSystem
    """Generate small set systems in which every element has a containing set."""
    num_sets = draw(strats.integers(min_value=1, max_value=max_sets))
    num_elements = draw(strats.integers(min_value=1, max_value=max_elements))
    members = [set() for _ in range(num_sets)] # type: list[set[int]]
    for element in range(num_elements):
        sets = draw(strats.sets(
            strats.integers(min_value=0, max_value=num_sets - 1),
            min_size=1,
            max_size=min(3, num_sets),
        ))
        for set_id in sets:
            members[set_id].add(element)
    # empty sets are legal but dull; give each one an element
    for set_id, elements in enumerate(members):
        if not elements:
            elements.add(draw(strats.integers(min_value=0, max_value=num_elements - 1)))
    if unit_costs:
        costs = [1.0] * num_sets
    else:
        costs = draw(strats.lists(
            strats.floats(min_value=1 / aspect_ratio, max_value=1.0, allow_nan=False),
            min_size=num_sets,
            max_size=num_sets,
        ))
    frequency = max(sum(1 for elements in members if element in elements) for element in range(num_elements))
    capacity = draw(strats.integers(
        min_value=max(min_capacity, num_elements // 2),
        max_value=max(min_capacity, num_elements),
    ))
    return SetSystem(costs, members, capacity, aspect_ratio=1.0 if unit_costs else aspect_ratio, declared_frequency=frequency)


@strats.composite
def traces(draw, system, max_length=30):
    # type: (strats.DrawFn, SetSystem, int) -> list[UpdateStep]
    """Generate a legal trace over the elements of a set system."""
    length = draw(strats.integers(min_value=0, max_value=max_length))
    alive = set() # type: set[int]
    trace = []
    for _ in range(length):
        absent = sorted(set(range(system.num_elements)) - alive)
        can_insert = bool(absent) and len(alive) < system.capacity
        if can_insert and (not alive or draw(strats.booleans())):
            element = draw(strats.sampled_from(absent))
            alive.add(element)
            trace.append(UpdateStep.insert(element))
        elif alive:
            element = draw(strats.sampled_from(sorted(alive)))
            alive.remove(element)
            trace.append(UpdateStep.delete(element))
    return trace


@strats.composite
def instances(draw, max_sets=6, max_elements=8, max_length=30, unit_costs=False, min_capacity=2):
    # type: (strats.DrawFn, int, int, int, bool, int) -> tuple[SetSystem, list[UpdateStep]]
    """Generate a set system together with a legal trace."""
    system = draw(set_systems(
        max_sets=max_sets,
        max_elements=max_elements,
        unit_costs=unit_costs,
        min_capacity=min_capacity,
    ))
    return system, draw(traces(system, max_length=max_length))
