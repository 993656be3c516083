"""Cut norms, k-samples and sampling-lemma checks for unbounded kernels."""

import json

from . import _core
from ._core import (
    ConfigError,
    Kernel,
    ParameterError,
    cut_norm,
    cut_norm_exact,
    cut_norm_heuristic,
    cut_norm_oracle,
    draw_sample,
    theorem_bound,
    truncation_l1_error_bound,
    truncation_tail_mass,
    vector_cut_norm_exact,
)

__all__ = [
    "ConfigError",
    "Kernel",
    "ParameterError",
    "cut_distance_upper",
    "cut_norm",
    "cut_norm_exact",
    "cut_norm_heuristic",
    "cut_norm_oracle",
    "draw_sample",
    "run_experiment",
    "theorem_bound",
    "truncation_l1_error_bound",
    "truncation_tail_mass",
    "vector_cut_norm_exact",
    "verify_report",
]


def run_experiment(config, write=False):
    """Run a campaign from a config dict (or JSON string); returns the report dict."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_core.run_experiment(text, write))


def cut_distance_upper(u, w, seed=0):
    return json.loads(_core.cut_distance_upper(u, w, seed))


def verify_report(directory):
    ok, differences = _core.verify_report(str(directory))
    return ok, list(differences)
