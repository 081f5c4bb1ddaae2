"""Shared helpers: gap convention, thread resolution, ordered map."""
import numpy as np
import pytest

from riskshed.util import THREADS_ENV_VAR, gap_percent, map_ordered, resolve_threads


def test_gap_percent_anchors_on_lower_bound():
    assert gap_percent(-100.0, -95.0) == pytest.approx(5.0)
    assert gap_percent(100.0, 104.0) == pytest.approx(4.0)
    assert gap_percent(-50.0, -50.0) == 0.0
    assert gap_percent(0.0, 0.0) == 0.0
    assert np.isinf(gap_percent(0.0, 3.0))


def test_resolve_threads_precedence(monkeypatch):
    monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
    assert resolve_threads() == 1
    monkeypatch.setenv(THREADS_ENV_VAR, "6")
    assert resolve_threads() == 6
    assert resolve_threads(threads=2) == 2      # explicit wins over env
    monkeypatch.setenv(THREADS_ENV_VAR, "junk")
    assert resolve_threads() == 1
    assert resolve_threads(threads=0) == 1      # floor at one worker


def test_map_ordered_preserves_order():
    items = list(range(20))
    fn = lambda k: k * k
    assert map_ordered(fn, items, threads=1) == [k * k for k in items]
    assert map_ordered(fn, items, threads=4) == [k * k for k in items]
