from collections import defaultdict

from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")

_CRITERIA = defaultdict(list)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _CRITERIA[props["criterion"]].append((report.nodeid.split("::")[-1], report.passed,
                                              props.get("measured", "")))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        parts = _CRITERIA[num]
        ok = all(p for _, p, _ in parts)
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}")
        for name, passed, measured in parts:
            mark = "ok  " if passed else "FAIL"
            terminalreporter.write_line(f"    {mark} {name}  {measured}")
