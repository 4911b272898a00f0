"""Accelerator models and the shared run entry point."""
from importlib import import_module

from .common import (ACCEL_FLAGS, ACCEL_PROBLEMS, ACCELERATORS,
                     DEFAULT_CLOCK_MHZ, AccelConfig, ResolvedConfig,
                     RunResult)

__all__ = ["AccelConfig", "ResolvedConfig", "RunResult", "run",
           "ACCELERATORS", "ACCEL_PROBLEMS", "ACCEL_FLAGS",
           "DEFAULT_CLOCK_MHZ"]


def run(g, cfg) -> RunResult:
    """Simulate one accelerator run and return its result record."""
    rc = cfg.resolved() if isinstance(cfg, AccelConfig) else cfg
    mod = import_module(f".{rc.which}", __package__)
    return mod.run(g, rc)
