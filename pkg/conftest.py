"""PyTest configuration."""

import re
from collections import defaultdict
from pathlib import Path
from typing import Any


SOURCE_PATH = Path(__file__).parent / 'dyncover'
TEST_PATH = Path(__file__).parent / 'tests' / 'dyncover'

RELATIVE_IMPORT = re.compile(r'from \.(\.*)([a-z0-9_]*) import .*')


def _source_module(test_path):
    # type: (Path) -> Path
    """Map tests/dyncover/foo_test.py to foo.py; leave other paths alone."""
    if TEST_PATH not in test_path.parents:
        return test_path
    module = test_path.relative_to(TEST_PATH)
    return module.with_stem(module.stem.removesuffix('_test'))


def _import_graph():
    # type: () -> tuple[set[Path], dict[Path, set[Path]], dict[Path, set[Path]]]
    """Find the package-relative imports between source modules."""
    modules = set()
    importees_of = defaultdict(set) # type: dict[Path, set[Path]]
    importers_of = defaultdict(set) # type: dict[Path, set[Path]]
    for source_path in SOURCE_PATH.glob('**/*.py'):
        importer = source_path.relative_to(SOURCE_PATH)
        modules.add(importer)
        for line in source_path.read_text(encoding='utf-8').splitlines():
            match = RELATIVE_IMPORT.fullmatch(line.strip())
            if not match:
                continue
            parent = source_path.parents[len(match.group(1))]
            if (parent / match.group(2)).is_dir():
                importee_path = parent / match.group(2) / '__init__.py'
            else:
                importee_path = parent / (match.group(2) + '.py')
            importee = importee_path.relative_to(SOURCE_PATH)
            importees_of[importer].add(importee)
            importers_of[importee].add(importer)
    return modules, importees_of, importers_of


def pytest_collection_modifyitems(session, config, items): # pylint: disable = unused-argument
    # type: (Any, Any, list[Any]) -> None
    """Run the tests of low-level modules before the modules that import them."""
    num_items = len(items)
    tests = defaultdict(list)
    for item in items:
        test_path_str, *_ = item.reportinfo()
        tests[_source_module(Path(test_path_str))].append(item)
    modules, importees_of, importers_of = _import_graph()
    items.clear()
    # Kahn's algorithm, with ties broken by path
    queue = sorted(modules - set(importees_of))
    while queue:
        importee = queue.pop(0)
        items.extend(tests.pop(importee, []))
        ready = []
        for importer in sorted(importers_of.get(importee, ())):
            importees_of[importer].discard(importee)
            if not importees_of[importer]:
                ready.append(importer)
                del importees_of[importer]
        queue.extend(ready)
    for leftover in tests.values():
        items.extend(leftover)
    assert len(items) == num_items
