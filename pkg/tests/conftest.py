import pytest
from hypothesis import settings

from apartlearn.mealy import MealyMachine
from apartlearn.obstree import ROOT, ObservationTree

settings.register_profile("repro", derandomize=True, print_blob=True)
settings.load_profile("repro")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    results = item.config._criteria
    number, title = mark.args
    entry = results.setdefault(number, {"title": title, "ok": True, "notes": []})
    if rep.failed:
        entry["ok"] = False
    elif rep.skipped and rep.when != "teardown":
        entry["ok"] = None
    for key, value in item.user_properties:
        if key == "note" and rep.when == "call":
            entry["notes"].append(value)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config._criteria
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        entry = results[number]
        status = {True: "PASS", False: "FAIL", None: "SKIP"}[entry["ok"]]
        terminalreporter.write_line(f"criterion {number}: {status}  {entry['title']}")
        for note in entry["notes"]:
            terminalreporter.write_line(f"    {note}")


@pytest.fixture
def abc_machine():
    return MealyMachine.from_transitions([
        ("q0", "a", "A", "q0"), ("q0", "b", "B", "q1"),
        ("q1", "a", "A", "q0"), ("q1", "b", "B", "q2"),
        ("q2", "a", "C", "q1"), ("q2", "b", "B", "q2"),
    ])


def _abc_tree():
    tree = ObservationTree(["a", "b"])
    a, b = 0, 1
    t1 = tree.extend(ROOT, (a,), ("A",))
    t4 = tree.extend(ROOT, (b, b, a), ("B", "B", "C"))
    t2 = tree.run((b,))
    t5 = tree.extend(t2, (a,), ("A",))
    t3 = tree.run((b, b))
    assert (t1, t2, t3, t4, t5) == (1, 2, 3, 4, 5)
    return tree


@pytest.fixture
def abc_tree():
    """t0 -a/A-> t1, t0 -b/B-> t2 -b/B-> t3 -a/C-> t4, t2 -a/A-> t5."""
    return _abc_tree()


def _chain_tree():
    tree = ObservationTree(["a", "b"])
    a, b = 0, 1
    tree.extend(ROOT, (b, b, b, b, a), tuple("01012"))
    tree.extend(ROOT, (a, a), tuple("00"))
    tree.extend(1, (a, b), tuple("10"))
    tree.extend(2, (a, a), tuple("01"))
    tree.extend(3, (a, b), tuple("11"))
    for q in (1, 2, 3, 4):
        tree.promote(q)
    return tree


@pytest.fixture
def chain_tree():
    """Basis t0..t4 along b b b b, with t5 = t4 -a/2->."""
    return _chain_tree()
