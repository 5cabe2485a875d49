import json

import pytest

from densedyn.stream import (
    RunConfig,
    StreamFormatError,
    StreamRunError,
    oracle_replay,
    parse_stream,
    random_stream_text,
    run,
    verify,
)


class TestParse:
    def test_basic(self):
        header, events = parse_stream("h 3 ddsg 0.1\n+ 0 1\n?\n")
        assert header.n == 3 and header.mode == "ddsg" and header.epsilon == 0.1
        assert [e.kind for e in events] == ["insert", "query"]
        assert (events[0].u, events[0].v) == (0, 1)

    def test_self_loop_rejected(self):
        with pytest.raises(StreamFormatError, match="line 2"):
            parse_stream("h 3 ddsg 0.1\n+ 0 0\n")

    def test_delete_before_insert_parses(self):
        header, events = parse_stream("h 3 ddsg 0.1\n- 0 1\n")
        assert events[0].kind == "delete"

    def test_malformed_line_reports_number(self):
        with pytest.raises(StreamFormatError, match="line 3"):
            parse_stream("h 3 ddsg 0.1\n+ 0 1\n+ zero 1\n")

    def test_out_of_range_vertex(self):
        with pytest.raises(StreamFormatError, match="line 2"):
            parse_stream("h 3 ddsg 0.1\n+ 0 7\n")

    def test_missing_header(self):
        with pytest.raises(StreamFormatError):
            parse_stream("+ 0 1\n")

    def test_duplicate_header(self):
        with pytest.raises(StreamFormatError, match="line 2"):
            parse_stream("h 3 ddsg 0.1\nh 3 ddsg 0.1\n")

    def test_weights_vwdsg_only(self):
        header, _ = parse_stream("h 3 vwdsg 0.2\nw 1 2.5\n+ 0 1\n")
        assert header.weight_list() == [1.0, 2.5, 1.0]
        with pytest.raises(StreamFormatError):
            parse_stream("h 3 ddsg 0.2\nw 1 2.5\n")

    def test_weights_must_precede_updates(self):
        with pytest.raises(StreamFormatError, match="line 3"):
            parse_stream("h 3 vwdsg 0.2\n+ 0 1\nw 1 2.5\n")

    def test_blank_lines_skipped(self):
        _, events = parse_stream("h 2 ddsg 0.3\n\n+ 0 1\n\n?\n")
        assert len(events) == 2

    def test_bad_epsilon(self):
        with pytest.raises(StreamFormatError):
            parse_stream("h 3 ddsg 1.5\n")


class TestRun:
    def test_single_edge_query(self):
        header, events = parse_stream("h 3 ddsg 0.2\n+ 0 1\n?\n")
        report = run(header, events)
        assert len(report.queries) == 1
        q = report.queries[0]
        assert q["estimate"] == pytest.approx(1.0, rel=0.25)
        assert q["sources"] == [0] and q["sinks"] == [1]

    def test_empty_stream(self):
        header, events = parse_stream("h 3 ddsg 0.2\n")
        report = run(header, events)
        assert report.queries == [] and report.events == 0

    def test_vwdsg_mode_with_weights(self):
        text = "h 3 vwdsg 0.2\nw 0 2.0\n+ 0 1\n+ 1 2\n?\n"
        header, events = parse_stream(text)
        report = run(header, events)
        q = report.queries[0]
        assert q["estimate"] > 0
        assert "vertices" in q

    def test_delete_absent_reports_event_index(self):
        header, events = parse_stream("h 3 ddsg 0.2\n- 0 1\n")
        with pytest.raises(StreamRunError, match="event 0"):
            run(header, events)

    def test_determinism(self):
        text = random_stream_text(6, "ddsg", 0.3, 40, seed=5, query_every=10)
        header, events = parse_stream(text)
        a = run(header, events, RunConfig(seed=1)).to_jsonl()
        b = run(header, events, RunConfig(seed=1)).to_jsonl()
        assert a == b

    def test_counter_conservation(self):
        text = random_stream_text(6, "ddsg", 0.3, 30, seed=2, query_every=0)
        header, events = parse_stream(text)
        report = run(header, events)
        c = report.counters
        assert c["flips"] <= c["arcs_inc"] + c["arcs_dec"]
        assert c["label_resets"] <= c["arcs_inc"] + c["arcs_dec"]

    def test_jsonl_shape(self):
        header, events = parse_stream("h 3 ddsg 0.2\n+ 0 1\n?\n")
        text = run(header, events).to_jsonl()
        lines = text.strip().split("\n")
        assert len(lines) == 2
        assert json.loads(lines[0])["type"] == "query"
        summary = json.loads(lines[1])
        assert summary["type"] == "summary"
        assert "timings" not in summary
        timed = run(header, events).to_jsonl(include_timings=True)
        assert "timings" in json.loads(timed.strip().split("\n")[-1])


class TestVerify:
    def test_single_edge_ratio_one(self):
        header, events = parse_stream("h 2 ddsg 0.2\n+ 0 1\n?\n")
        report = verify(header, events)
        assert report.ok
        assert report.worst_ratio == pytest.approx(1.0)

    def test_empty_query_both_zero(self):
        header, events = parse_stream("h 2 ddsg 0.2\n?\n")
        report = verify(header, events)
        assert report.ok
        assert report.queries[0]["estimate"] == 0.0
        assert report.queries[0]["optimum"] == 0.0

    def test_random_stream_clean(self):
        text = random_stream_text(5, "ddsg", 0.25, 24, seed=9, query_every=8)
        header, events = parse_stream(text)
        report = verify(header, events)
        assert report.ok
        assert report.worst_ratio >= 1 - 3 * 0.25

    def test_vwdsg_mode(self):
        text = "h 4 vwdsg 0.25\nw 2 3.0\n+ 0 1\n+ 1 2\n+ 0 2\n?\n"
        header, events = parse_stream(text)
        report = verify(header, events)
        assert report.ok

    def test_rejects_large_n(self):
        header, events = parse_stream("h 64 ddsg 0.2\n?\n")
        with pytest.raises(ValueError):
            verify(header, events)


class TestOracleReplay:
    def test_records_optima(self):
        header, events = parse_stream("h 3 ddsg 0.2\n+ 0 1\n?\n+ 1 2\n?\n")
        records = oracle_replay(header, events)
        assert len(records) == 2
        assert records[0]["optimum"] == pytest.approx(1.0)
        assert records[1]["optimum"] >= records[0]["optimum"] - 1e-12

    def test_vwdsg(self):
        header, events = parse_stream("h 3 vwdsg 0.2\n+ 0 1\n+ 1 2\n+ 0 2\n?\n")
        records = oracle_replay(header, events)
        assert records[0]["optimum"] == pytest.approx(1.0)
        assert records[0]["vertices"] == [0, 1, 2]


class TestRandomStream:
    def test_deterministic(self):
        a = random_stream_text(10, "ddsg", 0.2, 100, seed=4, query_every=25)
        b = random_stream_text(10, "ddsg", 0.2, 100, seed=4, query_every=25)
        assert a == b

    def test_parses_and_balances(self):
        text = random_stream_text(10, "vwdsg", 0.2, 200, seed=4)
        header, events = parse_stream(text)
        assert header.mode == "vwdsg"
        assert sum(1 for e in events if e.kind != "query") == 200
        live = 0
        for e in events:
            if e.kind == "insert":
                live += 1
            elif e.kind == "delete":
                live -= 1
                assert live >= 0
