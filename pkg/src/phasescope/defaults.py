"""Versioned numeric defaults shared by the library and the CLI.

Every CLI output manifest echoes this table, so a result file always
records the exact thresholds it was produced under.
"""

DEFAULTS_VERSION = "1.0"

DEFAULTS = {
    "version": DEFAULTS_VERSION,
    # one-dimensional desk scale
    "grid_d1": {"n": 256, "half_width": 12.0},
    # two-dimensional signals and all R^4 kernel work
    "grid_d2": {"n": 32, "half_width": 8.0},
    "grid_kernel": {"n": 32, "half_width": 6.0},
    "window": {"type": "standard_gaussian"},
    # radial shell fits
    "shell_r_min": 3.0,
    "shell_r_max_fraction": 0.8,
    "shell_count": 8,
    # probe sets exclude this fraction of each axis at either end
    "probe_margin": 0.2,
    # envelope verdicts: constant ceiling and trend-slope tolerance
    "constant_ceiling": 1.0e3,
    "trend_tolerance": 0.2,
    # classicality: defect order must undercut m - N by this margin
    "classical_margin": 0.25,
    # finite differences
    "fd_order": 4,
    # wave front estimation
    "wf_aperture_deg": 10.0,
    "wf_threshold": 4.0,
    "wf_directions_d1": 72,
    "wf_directions_d2": 512,
    "wf_ridge_tolerance": 0.15,
    "wf_angular_slack_deg": 5.0,
    # conormal membership
    "conormal_k_max": 2,
    "conormal_n_decay": 4,
    "inner_product_floor": 1.0e-8,
    "seed": 0,
}


def manifest_block():
    """Return a copy of the defaults table for embedding in manifests."""
    import copy

    return copy.deepcopy(DEFAULTS)
