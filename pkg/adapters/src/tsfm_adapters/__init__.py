"""Forecasting adapters that serve pretrained time-series models over the
stdio JSON-lines protocol.

Each adapter is a long-running child process: it loads one model at
startup, then answers one forecast request per stdin line with one
response per stdout line until its input closes. An `--echo` mode serves
a last-value forecaster with no model dependency, so the protocol path is
testable anywhere.
"""

__version__ = "0.1.0"

from .serve import AdapterConfig, serve

__all__ = ["AdapterConfig", "serve", "__version__"]
