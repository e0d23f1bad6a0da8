# Copyright 2026  The mhctc Authors
# Licensed under the Apache License, Version 2.0

"""Multiple-hypothesis CTC adaptation toolkit."""

import json as _json

from ._mhctc import *  # noqa: F401,F403
from ._mhctc import default_plan as _default_plan
from ._mhctc import run_experiment as _run_experiment

__all__ = [name for name in dir() if not name.startswith("_")]


def experiment_plan(**overrides):
    """Default plan as a dict, with top-level keys replaced by `overrides`."""
    plan = _json.loads(_default_plan())
    for key, value in overrides.items():
        if key not in plan:
            raise ConfigError(f"unknown plan key '{key}'")  # noqa: F405
        plan[key] = value
    return plan


def run_experiment(plan, out_root):
    """Runs a plan dict; returns (report dict, run directory)."""
    report, run_dir = _run_experiment(_json.dumps(plan), str(out_root))
    return _json.loads(report), run_dir


__all__ += ["experiment_plan", "run_experiment"]
