"""Shared fixtures: toy traces, fixture logs, and the ground-truth generator."""

import numpy as np
import pytest

from prosim.log import Event, EventLog, Trace

# Monday 2023-01-02 09:00:00 UTC.
MONDAY_9AM = 1672650000
# Monday 2023-01-02 00:00:00 UTC: a week of arrivals started here stays
# inside one hour-of-week cycle, so holdout histograms do not wrap.
MONDAY_MIDNIGHT = 1672617600


def seq_trace(case_id, labels, t0=MONDAY_9AM, wait=60, proc=120):
    """Sequential trace: each activity waits `wait` after the previous end."""
    events = []
    clock = t0
    for label in labels:
        start = clock + wait
        end = start + proc
        events.append(Event(label, start, end))
        clock = end
    return Trace.from_events(case_id, events)


def variants_log(variants, t0=MONDAY_9AM, gap=600, **kwargs):
    """Log with one trace per (sequence, count) pair, spaced `gap` apart."""
    traces = []
    i = 0
    for labels, count in variants:
        for _ in range(count):
            traces.append(seq_trace(f"c{i:04d}", labels, t0 + i * gap, **kwargs))
            i += 1
    return EventLog.from_traces(traces)


def random_fixture_log(rng, n_traces=12, alphabet="ABCDE"):
    """Small random log for metric identity properties."""
    traces = []
    t0 = MONDAY_9AM
    for i in range(n_traces):
        length = int(rng.integers(1, 6))
        labels = [alphabet[int(rng.integers(len(alphabet)))]
                  for _ in range(length)]
        traces.append(seq_trace(
            f"r{i:03d}", labels, t0 + i * int(rng.integers(60, 7200)),
            wait=int(rng.integers(0, 900)), proc=int(rng.integers(1, 3600))))
    return EventLog.from_traces(traces)


def make_ground_truth_log(n, seed, anchor=MONDAY_MIDNIGHT, xor_p=0.7,
                          arrival_mean=600.0, wait=60, proc=120):
    """Hand-built generator: A, an AND block of B/C in random order, a
    synchronizing F, then an XOR choice of D (p) or E, then G.  Arrivals
    are exponential; activities run sequentially with fixed waiting and
    processing.  Returns (log, truth dict).
    """
    rng = np.random.default_rng(seed)
    traces = []
    clock = anchor
    took_d = 0
    for i in range(n):
        if i > 0:
            clock += int(round(rng.exponential(arrival_mean)))
        order = ["B", "C"] if rng.random() < 0.5 else ["C", "B"]
        choice = "D" if rng.random() < xor_p else "E"
        took_d += choice == "D"
        labels = ["A"] + order + ["F", choice, "G"]
        traces.append(seq_trace(f"gt{i:05d}", labels, clock,
                                wait=wait, proc=proc))
    truth = {"xor_p": xor_p, "arrival_mean": arrival_mean,
             "observed_d_fraction": took_d / n, "anchor": anchor}
    return EventLog.from_traces(traces), truth


@pytest.fixture
def simple_log():
    return variants_log([(("A", "B", "D"), 7), (("A", "C", "D"), 3)])
