"""Service layer for the adcovar experiment harness.

Services take a validated ExperimentConfig (and optionally a FileSystemHandler),
write their result files and return plain dict summaries for the CLI.
"""

from adcovar.services.experiment_service import run_experiment, run_rng
from adcovar.services.linesearch_service import dt_linesearch, sweep_dt
from adcovar.services.scaling_service import fit_inverse_dt_vs_loggap, fit_scaling_file
from adcovar.services.spectrum_service import export_spectrum, write_spectra

__all__ = [
    "run_experiment",
    "run_rng",
    "dt_linesearch",
    "sweep_dt",
    "fit_inverse_dt_vs_loggap",
    "fit_scaling_file",
    "export_spectrum",
    "write_spectra",
]
