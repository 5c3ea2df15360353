import pytest

from ffmwrc.field import make_field

SMALL_ORDERS = [(2, 1), (3, 1), (2, 2), (5, 1), (2, 3), (7, 1), (3, 2), (2, 4)]
ACCEPTANCE_COUNT = 9
_verdicts = pytest.StashKey[dict]()


@pytest.fixture(params=SMALL_ORDERS, ids=lambda pz: f"GF({pz[0]}^{pz[1]})")
def small_field(request):
    return make_field(*request.param)


def pytest_configure(config):
    config.stash[_verdicts] = {}


@pytest.fixture
def verdict(request):
    """``verdict(k, ok, detail)`` records and prints criterion k's line, then asserts ``ok``."""
    store = request.config.stash[_verdicts]

    def record(k: int, ok: bool, detail: str):
        line = f"criterion {k}: {'PASS' if ok else 'FAIL'} ({detail})"
        store[k] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_verdicts, {})
    if not store:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in range(1, ACCEPTANCE_COUNT + 1):
        terminalreporter.write_line(store.get(k, f"criterion {k}: NOT RUN (deselected, or raised before reaching a verdict)"))
