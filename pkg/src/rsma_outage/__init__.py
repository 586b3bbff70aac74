"""Outage and throughput analysis of two-user uplink rate-splitting multiple access."""

__version__ = "0.1.0"
