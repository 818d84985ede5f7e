import sys
from pathlib import Path

from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CRITERIA = {
    "1": "intro tightness",
    "2": "homogeneous reserve bound",
    "3": "homogeneous second-price bound",
    "4": "regular impossibility",
    "5": "few-distributions lemma suite",
    "6": "few-distributions end to end",
    "7": "engine oracle equivalence",
    "8": "helper inequalities",
}
_outcomes: dict[str, list[tuple[str, bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id): acceptance criterion this test belongs to")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    _outcomes.setdefault(str(marker.args[0]), []).append((item.name, call.excinfo is None))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for cid, title in CRITERIA.items():
        results = _outcomes.get(cid)
        if not results:
            continue
        failed = [name for name, ok in results if not ok]
        status = "PASS" if not failed else "FAIL"
        extra = f" (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {cid} {title}: {status}{extra}")
