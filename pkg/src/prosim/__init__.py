"""prosim: hybrid business-process simulation models learned from event logs.

The pipeline discovers a stochastic process graph from a timestamped event
log, learns generators for case arrivals and activity processing/waiting
times, simulates new logs, and scores their similarity to held-out data.
"""

__version__ = "0.1.0"
