"""
Unit tests for streaming sessions.
"""

import pytest

from conftest import MONOTONE_REL, SWAP_ABS, SWAP_REL
from opseq.codecs.base import Variant
from opseq.core.errors import DecodeError, SessionError
from opseq.engine.session import EventKind, StreamSession, feed, partial_hypotheses, replay
from opseq.metrics.latency import average_lagging


class TestStreamSession:
    """Test feeding tokens one at a time."""

    def test_events(self):
        """Test the event of every token of the swap stream."""
        session = StreamSession("rel")
        kinds = [session.feed(token).kind for token in SWAP_REL.split()]

        assert kinds == [EventKind.NONE, EventKind.NONE, EventKind.NONE, EventKind.TUPLE,
                         EventKind.NONE, EventKind.NONE, EventKind.NONE, EventKind.TUPLE, EventKind.END]
        assert session.ended
        assert session.variant is Variant.RELATIVE

    def test_partial_hypotheses(self):
        """Test the display translation after every tuple."""
        assert replay(SWAP_REL).partial_hypotheses() == [(3, "x"), (7, "y x")]
        assert partial_hypotheses(replay(MONOTONE_REL)) == [(3, "x"), (7, "x y")]

    def test_absolute_snapshots(self):
        """Test that absolute snapshots show placeholders for unwritten cells."""
        session = replay(SWAP_ABS, codec="abs")

        assert [s.buffer for s in session.snapshots] == [("_", "x"), ("y", "x")]
        assert session.final().target_text == "y x"

    def test_snapshot_dict(self):
        """Test the JSON form of a snapshot."""
        session = replay(SWAP_REL, timestamps=list(range(0, 900, 100)))

        assert session.snapshots[1].to_dict() == {
            "index": 7, "S": "a b", "T": "y x", "buffer": ["*", "y", "x"], "timestamp": 700,
        }

    def test_error_poisons_session(self):
        """Test that an infeasible jump fails where it is fed and poisons the session."""
        session = StreamSession(Variant.RELATIVE)
        events = [feed(session, token) for token in "a [JB]".split()]

        assert [e.kind for e in events] == [EventKind.NONE, EventKind.ERROR]
        assert isinstance(events[-1].error, DecodeError)
        assert events[-1].error.token_index == 1
        assert session.poisoned
        with pytest.raises(SessionError):
            session.feed("x")

    def test_jump_as_first_token(self):
        """Test that [JB] as the very first token is an error event."""
        session = StreamSession("rel")
        event = session.feed("[JB]")

        assert event.kind is EventKind.ERROR
        assert event.token_index == 0
        assert session.poisoned

    @pytest.mark.parametrize("variant, stream, index", [
        ("rel", "a x", 1),
        ("rel", "a [NO_OPS] x [EOP] ##y", 4),
        ("abs", "[BL]", 0),
        ("abs", "a [BL] x [2] [3]", 4),
    ])
    def test_grammar_error_at_offending_token(self, variant, stream, index):
        """Test that a token that cannot continue the stream fails immediately."""
        session = StreamSession(variant)
        events = [session.feed(token) for token in stream.split()]

        assert events[-1].kind is EventKind.ERROR
        assert events[-1].token_index == index
        assert all(e.kind is not EventKind.ERROR for e in events[:-1])

    def test_illegal_surface(self):
        """Test that an illegal surface becomes an error event."""
        session = StreamSession()
        event = session.feed("[foo]")

        assert event.kind is EventKind.ERROR
        assert event.token_index == 0

    def test_feed_after_end(self):
        """Test that feeding an ended session raises."""
        session = replay(SWAP_REL)

        with pytest.raises(SessionError):
            session.feed("a")

    def test_tail_of_truncated_stream(self):
        """Test that a truncated stream keeps its completed tuples."""
        session = replay("a [SM] x [EOP] b [JB]")

        assert not session.ended
        assert session.partial_hypotheses() == [(3, "x")]
        assert [t.surface for t in session.tail()] == ["b", "[JB]"]
        assert not session.final().complete


class TestReplay:
    """Test whole-stream replay."""

    def test_timestamp_mismatch(self):
        """Test that timestamps must match the tokens one to one."""
        with pytest.raises(SessionError):
            replay(SWAP_REL, timestamps=[0, 1])

    def test_error_raised(self):
        """Test that replay raises the first decode failure."""
        with pytest.raises(DecodeError) as excinfo:
            replay("a [JB] x [EOP] [EOS]")

        assert excinfo.value.token_index == 1

    def test_token_after_end(self):
        """Test that tokens after [EOS] are rejected."""
        with pytest.raises(DecodeError) as excinfo:
            replay(SWAP_REL + " b")

        assert excinfo.value.token_index == 9

    def test_feed_all_keeps_fed_prefix(self):
        """Test that feed_all stops at the first error with the earlier snapshots kept."""
        session = StreamSession(Variant.RELATIVE)

        with pytest.raises(DecodeError) as excinfo:
            session.feed_all("a [SM] x [EOP] b [JF] y [EOP] [EOS]".split())

        assert excinfo.value.token_index == 5
        assert session.poisoned
        assert session.partial_hypotheses() == [(3, "x")]


class TestLatencyTrace:
    """Test delays measured from a session."""

    def test_monotone(self):
        """Test that monotone output lags one word per word."""
        trace = replay(MONOTONE_REL).latency_trace()

        assert trace.delays == [1.0, 2.0]
        assert average_lagging(trace) == pytest.approx(1.0)

    def test_swap(self):
        """Test that a swap waits for the whole source."""
        trace = replay(SWAP_REL).latency_trace()

        assert trace.delays == [2.0, 2.0]
        assert average_lagging(trace) == pytest.approx(2.0)

    def test_requires_ended_session(self):
        """Test that a truncated session has no latency trace."""
        with pytest.raises(SessionError):
            replay("a [SM] x [EOP]").latency_trace()
