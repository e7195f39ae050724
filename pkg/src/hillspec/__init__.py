"""Floquet spectra of Hill operators and asymptotically periodic potentials
with an embedded eigenvalue."""

from .bands import (Band, BandSpectrum, EssentialSpectrum, ThresholdReport, band_edges,
                    essential_spectrum, scan_discriminant, threshold_report)
from .embedder import EmbeddedConstruction, construct
from .errors import DomainError, HillError, NumericError
from .floquet import FloquetData, Monodromy, decaying_solutions, floquet_data, monodromy
from .ode import StateVector, Trajectory, propagate, residual_at, transfer_matrix
from .potentials import (AsymptoticPotential, LocalizedPerturbation, PeriodicPotential,
                         constant_potential, cos_potential, gaussian_bump,
                         make_mode_coefficient, parse_potential_spec, sampled_potential,
                         sech2_bump)
from .verifier import (MatchingFunction, glued_eigenfunction, hellmann_feynman,
                       matching_function, track_eigenvalue)

__version__ = "0.1.0"
