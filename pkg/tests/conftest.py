import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def within_sigmas(est, value, k=4.0, floor=1e-12):
    return abs(est.mean - value) <= k * est.stderr + floor * max(abs(value), 1.0)


def joint_sigma(a, b):
    return (a.stderr ** 2 + b.stderr ** 2) ** 0.5


# ---------------------------------------------------------------- acceptance report

_criteria = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("acceptance")
    if mark is None or not mark.args:
        return
    number, title = mark.args
    failed = call.excinfo is not None and not call.excinfo.errisinstance(
        __import__("pytest").skip.Exception)
    if call.when == "call" or failed:
        prev = _criteria.get(number, (title, True))
        _criteria[number] = (title, prev[1] and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
