"""Error-disturbance relations for Gaussian states under heterodyne-style
joint measurement of the amplitude and phase quadratures."""

__version__ = "0.1.0"

from .gaussian import (
    GaussianState,
    PhysicalityError,
    TwoModeState,
    apply_loss,
    beam_split,
    make_coherent,
    make_squeezed_db,
    make_squeezed_pure,
    make_thermal,
    make_vacuum,
    purity,
)
from .metrics import (
    EdrReport,
    branciard_lhs,
    build_report,
    commutator_bound,
    disturbance_phase,
    error_amplitude,
    minimize_branciard,
    ozawa_lhs,
)
from .sampling import SampleBatch, TrialSummary, draw_pairs, run_trials
from .sweep import StateSpec, SweepConfig, SweepResult, compare_analytic_empirical, run_sweep
