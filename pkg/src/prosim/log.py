"""Event-log parsing, validation, splitting, and summary statistics.

Timestamps are normalized to UTC epoch seconds (integers) at parse time so
that every downstream calendar feature (weekday, time of day) is computed on
one consistent clock.  All log values are immutable after construction.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import LogConfigError, LogParseError, LogValidationError

SECONDS_PER_DAY = 86400
# 1970-01-01 was a Thursday; shift so 0 = Monday like datetime.weekday().
_EPOCH_WEEKDAY = 3


def weekday_of(ts):
    """Weekday of a UTC epoch second, 0 = Monday .. 6 = Sunday."""
    return (ts // SECONDS_PER_DAY + _EPOCH_WEEKDAY) % 7


def time_of_day(ts):
    """Elapsed seconds since the closest preceding UTC midnight."""
    return ts % SECONDS_PER_DAY


def hour_of_week(ts):
    """Linearized (weekday, hour) bin index, 0 = Monday 00h .. 167 = Sunday 23h."""
    return weekday_of(ts) * 24 + time_of_day(ts) // 3600


@dataclass(frozen=True)
class Event:
    activity: str
    start: int
    end: int
    resource: str | None = None

    def __post_init__(self):
        if not self.activity:
            raise LogValidationError("event has an empty activity label")
        if self.end < self.start:
            raise LogValidationError(
                f"event '{self.activity}' ends before it starts")


def _event_key(e):
    return (e.start, e.end, e.activity)


@dataclass(frozen=True)
class Trace:
    case_id: str
    events: tuple[Event, ...]

    def __post_init__(self):
        if not self.events:
            raise LogValidationError(f"trace '{self.case_id}' has no events")
        keys = [_event_key(e) for e in self.events]
        if keys != sorted(keys):
            raise LogValidationError(
                f"trace '{self.case_id}' events are not sorted")

    @classmethod
    def from_events(cls, case_id, events):
        """Build a trace, sorting events by start, then end, then activity."""
        return cls(case_id, tuple(sorted(events, key=_event_key)))

    @property
    def start(self):
        return self.events[0].start

    @property
    def end(self):
        return max(e.end for e in self.events)

    @property
    def cycle_time(self):
        return self.end - self.start

    def activities(self):
        return tuple(e.activity for e in self.events)


@dataclass(frozen=True)
class EventLog:
    traces: tuple[Trace, ...]
    activity_alphabet: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        ids = [t.case_id for t in self.traces]
        if len(set(ids)) != len(ids):
            raise LogValidationError("duplicate case_id in log")
        alphabet = frozenset(e.activity for t in self.traces for e in t.events)
        if self.activity_alphabet != alphabet:
            object.__setattr__(self, "activity_alphabet", alphabet)

    @classmethod
    def from_traces(cls, traces):
        return cls(tuple(traces))

    def __len__(self):
        return len(self.traces)

    def sequences(self):
        """Activity sequences of all traces, in log order."""
        return [t.activities() for t in self.traces]


@dataclass(frozen=True)
class LogStats:
    num_traces: int
    num_events: int
    num_activities: int
    avg_activities_per_trace: float | None
    avg_duration: float | None
    max_duration: int | None


@dataclass(frozen=True)
class LogFormat:
    """Column mapping and timestamp pattern for CSV ingestion.

    timestamp_pattern None means ISO-8601 (the default header layout is
    ``case_id,activity,start_timestamp,end_timestamp,resource``); otherwise a
    strptime pattern.  Naive timestamps are interpreted as UTC.
    """
    case_col: str = "case_id"
    activity_col: str = "activity"
    start_col: str = "start_timestamp"
    end_col: str = "end_timestamp"
    resource_col: str | None = "resource"
    timestamp_pattern: str | None = None


DEFAULT_FORMAT = LogFormat()


def parse_timestamp(text, pattern=None):
    """Parse one timestamp to UTC epoch seconds (sub-second part truncated)."""
    if pattern is None:
        cleaned = text.strip()
        if cleaned.endswith("Z"):
            cleaned = cleaned[:-1] + "+00:00"
        dt = datetime.fromisoformat(cleaned)
    else:
        dt = datetime.strptime(text.strip(), pattern)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp() // 1)


def format_timestamp(ts):
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%S+00:00")


def parse_log(source, fmt=DEFAULT_FORMAT):
    """Parse a CSV byte stream into an EventLog.

    Traces are grouped by case id and their events sorted by start timestamp
    (ties by end, then activity).  Raises LogConfigError for a bad column
    mapping, LogParseError (with row number) for malformed cells, and
    LogValidationError listing every row whose end precedes its start.
    """
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    text = io.TextIOWrapper(source, encoding="utf-8", newline="")
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        raise LogConfigError("input is empty, expected a CSV header") from None
    header = [h.strip() for h in header]
    cols = {}
    for name, col in (("case", fmt.case_col), ("activity", fmt.activity_col),
                      ("start", fmt.start_col), ("end", fmt.end_col)):
        if col not in header:
            raise LogConfigError(f"missing required column '{col}' ({name})")
        cols[name] = header.index(col)
    res_idx = None
    if fmt.resource_col is not None and fmt.resource_col in header:
        res_idx = header.index(fmt.resource_col)

    by_case = {}
    order = []
    bad_rows = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < len(header):
            raise LogParseError(f"expected {len(header)} columns, got {len(row)}",
                                row=row_no)
        case = row[cols["case"]].strip()
        activity = row[cols["activity"]].strip()
        if not case:
            raise LogParseError("empty case id", row=row_no)
        if not activity:
            raise LogParseError("empty activity label", row=row_no)
        try:
            start = parse_timestamp(row[cols["start"]], fmt.timestamp_pattern)
            end = parse_timestamp(row[cols["end"]], fmt.timestamp_pattern)
        except ValueError as exc:
            raise LogParseError(f"malformed timestamp: {exc}", row=row_no) from None
        if end < start:
            bad_rows.append(row_no)
            continue
        resource = None
        if res_idx is not None and row[res_idx].strip():
            resource = row[res_idx].strip()
        if case not in by_case:
            by_case[case] = []
            order.append(case)
        by_case[case].append(Event(activity, start, end, resource))
    if bad_rows:
        raise LogValidationError(
            f"end precedes start in rows: {', '.join(map(str, bad_rows))}",
            rows=bad_rows)
    if not by_case:
        raise LogValidationError("log has no event rows")
    return EventLog.from_traces(
        Trace.from_events(case, by_case[case]) for case in order)


def read_log(path, fmt=DEFAULT_FORMAT):
    with open(path, "rb") as fh:
        return parse_log(fh, fmt)


def serialize_log(log, fmt=DEFAULT_FORMAT):
    """Render an EventLog back to CSV text (inverse of parse_log)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = [fmt.case_col, fmt.activity_col, fmt.start_col, fmt.end_col]
    has_resource = fmt.resource_col is not None
    if has_resource:
        header.append(fmt.resource_col)
    writer.writerow(header)
    for trace in log.traces:
        for e in trace.events:
            row = [trace.case_id, e.activity,
                   format_timestamp(e.start), format_timestamp(e.end)]
            if has_resource:
                row.append(e.resource or "")
            writer.writerow(row)
    return out.getvalue()


def write_log(log, path, fmt=DEFAULT_FORMAT):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(serialize_log(log, fmt))


def temporal_split(log, ratio):
    """Split traces by first-event start time: earliest ceil(ratio*n) train.

    Every train trace starts no later than every test trace; together they
    are exactly the input traces.
    """
    if not 0 < ratio < 1:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    ordered = sorted(log.traces, key=lambda t: (t.start, t.case_id))
    n_train = math.ceil(ratio * len(ordered))
    train = EventLog.from_traces(ordered[:n_train])
    test_traces = ordered[n_train:]
    if test_traces:
        return train, EventLog.from_traces(test_traces)
    return train, EventLog(())


def log_stats(log):
    """Summary statistics; averages are None for an empty log."""
    n_traces = len(log.traces)
    n_events = sum(len(t.events) for t in log.traces)
    if n_traces == 0:
        return LogStats(0, 0, 0, None, None, None)
    durations = [t.cycle_time for t in log.traces]
    return LogStats(
        num_traces=n_traces,
        num_events=n_events,
        num_activities=len(log.activity_alphabet),
        avg_activities_per_trace=n_events / n_traces,
        avg_duration=sum(durations) / n_traces,
        max_duration=max(durations),
    )
