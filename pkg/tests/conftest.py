import pytest

_OUTCOMES = pytest.StashKey[dict]()


class _Criterion:
    def __init__(self, store: dict, number: int, title: str):
        self.store, self.number, self.title = store, number, title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        reason = self.detail if ok else f"{exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        self.store.setdefault(self.number, []).append((ok, self.title, reason))
        return False


@pytest.fixture
def criterion(request):
    """``with criterion(n, title) as c:`` records one acceptance outcome for the summary."""
    store = request.config.stash.setdefault(_OUTCOMES, {})
    return lambda number, title: _Criterion(store, number, title)


def pytest_terminal_summary(terminalreporter, config):
    store = config.stash.get(_OUTCOMES, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        parts = store[number]
        ok = all(p[0] for p in parts)
        title = parts[0][1]
        details = "; ".join(p[2] for p in parts if p[2])
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}"
        terminalreporter.write_line(line + (f" ({details})" if details else ""))
