import threading

import pytest

from tetramesh._parallel import WORKERS_ENV, chunk_bounds, pmap, resolve_workers


def test_chunks_cover_the_range_in_order():
    assert chunk_bounds(10, 4) == [(0, 4), (4, 8), (8, 10)]
    assert chunk_bounds(0, 4) == []


def test_results_keep_input_order():
    items = list(range(50))
    assert pmap(lambda x: x * x, items, 1) == pmap(lambda x: x * x, items, 8) == [x * x for x in items]


def test_several_threads_are_used():
    seen = set()
    barrier = threading.Barrier(3, timeout=5)

    def work(_):
        barrier.wait()
        seen.add(threading.get_ident())

    pmap(work, range(3), 3)
    assert len(seen) == 3


def test_environment_fallback(monkeypatch):
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    assert resolve_workers() == 1
    monkeypatch.setenv(WORKERS_ENV, "6")
    assert resolve_workers() == 6
    assert resolve_workers(2) == 2
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ValueError):
        resolve_workers()
    with pytest.raises(ValueError):
        resolve_workers(0)
