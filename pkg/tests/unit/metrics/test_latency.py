"""
Unit tests for Average Lagging.
"""

import numpy as np
import pytest

from opseq.metrics.latency import LatencyTrace, average_lagging, combine_lagging


class TestLatencyTrace:
    """Test the trace invariants."""

    def test_valid(self):
        """Test that delays are stored as floats."""
        trace = LatencyTrace([1, 2, 2], src_len=2, tgt_len=3)

        assert trace.delays == [1.0, 2.0, 2.0]

    @pytest.mark.parametrize("delays,src_len,tgt_len", [
        ([2, 1], 2, 2),
        ([1, 3], 2, 2),
        ([-1, 1], 2, 2),
        ([1], 0, 1),
        ([1], 1, 0),
    ])
    def test_invalid(self, delays, src_len, tgt_len):
        """Test decreasing, out-of-range and empty-length traces."""
        with pytest.raises(ValueError):
            LatencyTrace(delays, src_len=src_len, tgt_len=tgt_len)


class TestAverageLagging:
    """Test the lagging computation."""

    def test_wait_k(self):
        """Test that a wait-3 policy on equal lengths lags by 3."""
        trace = LatencyTrace([3, 4, 5, 6, 6, 6], src_len=6, tgt_len=6)

        # tau = 4: (3 + 3 + 3 + 3) / 4
        assert average_lagging(trace) == pytest.approx(3.0)

    def test_offline(self):
        """Test that waiting for the whole source lags by the source length."""
        trace = LatencyTrace([4, 4, 4], src_len=4, tgt_len=3)

        assert average_lagging(trace) == pytest.approx(4.0)

    def test_length_ratio(self):
        """Test the oracle rate for a longer target."""
        trace = LatencyTrace([1, 1, 2, 2], src_len=2, tgt_len=4)

        # tau = 3: (1 - 0 + 1 - 0.5 + 2 - 1) / 3
        assert average_lagging(trace) == pytest.approx(2.5 / 3)

    def test_source_never_finished(self):
        """Test that all delays count when none reaches the source length."""
        trace = LatencyTrace([1, 1], src_len=3, tgt_len=2)

        assert average_lagging(trace) == pytest.approx((1 + 1 - 1.5) / 2)

    def test_empty(self):
        """Test that an empty trace is rejected."""
        with pytest.raises(ValueError):
            average_lagging(LatencyTrace([], src_len=1, tgt_len=1))

    @pytest.mark.parametrize("shift", [0.5, 1, 2])
    def test_uncapped_shift(self, shift):
        """Test that delaying every word while none reaches the source end adds the delay."""
        delays = np.array([1, 2, 2, 3])
        base = average_lagging(LatencyTrace(delays, src_len=6, tgt_len=4))

        shifted = average_lagging(LatencyTrace(delays + shift, src_len=6, tgt_len=4))

        assert shifted == pytest.approx(base + shift)

    def test_later_delays_lag_more(self):
        """Test that pointwise later delays never lower AL while the cut-off word stays the same."""
        rng = np.random.default_rng(0)
        checked = 0
        for _ in range(500):
            src_len, tgt_len = int(rng.integers(1, 9)), int(rng.integers(1, 9))
            delays = np.sort(rng.integers(0, src_len + 1, size=tgt_len))
            later = np.minimum(np.maximum.accumulate(delays + rng.integers(0, 3, size=tgt_len)), src_len)
            if _cut_off(delays, src_len) != _cut_off(later, src_len):
                continue
            checked += 1
            assert average_lagging(LatencyTrace(later, src_len, tgt_len)) >= \
                average_lagging(LatencyTrace(delays, src_len, tgt_len)) - 1e-12
        assert checked > 0

    def test_capped_shift_can_lower_lagging(self):
        """Test that capping at the source end moves the cut-off earlier and can lower AL."""
        before = LatencyTrace([0, 9, 9, 9, 10], src_len=10, tgt_len=10)
        after = LatencyTrace([1, 10, 10, 10, 10], src_len=10, tgt_len=10)

        # tau drops from 5 to 2: (0 + 8 + 7 + 6 + 6) / 5 against (1 + 9) / 2
        assert average_lagging(before) == pytest.approx(5.4)
        assert average_lagging(after) == pytest.approx(5.0)


def _cut_off(delays, src_len):
    reached = np.nonzero(np.asarray(delays) >= src_len)[0]
    return int(reached[0]) if reached.size else len(delays)


class TestCombineLagging:
    """Test aggregation of cascaded systems."""

    def test_modes(self):
        """Test sequential and parallel aggregation."""
        assert combine_lagging([1.5, 2.0]) == pytest.approx(3.5)
        assert combine_lagging([1.5, 2.0], mode="max") == pytest.approx(2.0)

    def test_errors(self):
        """Test unknown modes and empty input."""
        with pytest.raises(ValueError):
            combine_lagging([1.0], mode="mean")
        with pytest.raises(ValueError):
            combine_lagging([])
