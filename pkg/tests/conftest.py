"""Independent brute-force oracles over plain strings.

Nothing here imports the package's move generator or Grundy engine, so the
tests compare two separate implementations.
"""
from functools import lru_cache
from itertools import product

import pytest


def naive_successors(rules, w):
    out = set()
    for lhs, rhs in rules:
        for i in range(len(w) - len(lhs) + 1):
            if w[i:i + len(lhs)] == lhs:
                out.add(w[:i] + rhs + w[i + len(lhs):])
    return out


def naive_grundy_fn(rules):
    rules = tuple(rules)

    @lru_cache(maxsize=None)
    def g(w):
        vals = {g(v) for v in naive_successors(rules, w)}
        m = 0
        while m in vals:
            m += 1
        return m

    return g


def words(alphabet, n):
    """All strings over ``alphabet`` of length <= n, length-lex."""
    for m in range(n + 1):
        for t in product(alphabet, repeat=m):
            yield "".join(t)


def erasures(*blocks):
    return [(b, "") for b in blocks]


GAMES = {
    "a2b": erasures("aa", "b"),
    "a3b": erasures("aaa", "b"),
    "a12b": erasures("a", "aa", "b"),
    "a123b": erasures("a", "aa", "aaa", "b"),
    "a1234b": erasures("a", "aa", "aaa", "aaaa", "b"),
    "a14b": erasures("a", "aaaa", "b"),
    "a13b": erasures("a", "aaa", "b"),
    "a12b12": erasures("a", "aa", "b", "bb"),
    "a2b2": erasures("aa", "bb"),
    "a3b2": erasures("aaa", "bb"),
}


@pytest.fixture(scope="session")
def oracle():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = naive_grundy_fn(GAMES[name])
        return cache[name]

    return get


_criteria: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        label = str(marker.args[0])
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        lines = [x for x in report.capstdout.splitlines() if x.startswith(f"criterion {label}:")]
        _criteria[label] = (status, lines[-1].split(" ", 3)[-1] if lines else item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=lambda x: (int(x.split("-")[0]), x)):
        status, detail = _criteria[label]
        terminalreporter.write_line(f"criterion {label}: {status} {detail}")
