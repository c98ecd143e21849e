"""Superradiant criticality of a Dicke ring threaded by a synthetic flux."""
from . import criticality, gaussian, meanfield, model, npspectrum
from .errors import *  # noqa: F401,F403
from .model import (ModelParams, critical_coupling, critical_mode, dispersion,
                    flux_critical_point, flux_critical_points, momentum_grid)
from .npspectrum import np_energies, np_gap, np_spectrum_dense, np_spectrum_quartic
from .meanfield import classify, effective_couplings, minimize
from .gaussian import build_quadratic, observables, symplectic_diagonalize
from .criticality import (classify_cell, fit_exponent, gap_series, observable_series,
                          phase_diagram)

__version__ = "0.1.0"
