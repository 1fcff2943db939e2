"""Covariance estimation from a single observation by averaging over a finite group."""

from .estimator import (AveragedEstimate, GroupAveragedCovariance, cyclic_estimate_spectrum,
                        group_averaged_estimate, group_averaged_operator,
                        rank_of_signal_estimate, subspace_alignment)
from .exceptions import *  # noqa: F401,F403
from .gevp import (GeneratorBasis, GevpGroupMatcher, GevpSolution, assemble_double_commutator,
                   make_basis, match_group, solve_gevp)
from .groups import GroupRep, make_generator, make_group
from .model import CovarianceModel, Signal
from .residual import (MatchedGeneratorSelector, ResidualReport, classify, delta_generator,
                       delta_operator, fig3_table)
from .transforms import (Periodogram, ScalogramTransformer, Wavelet, ambiguity,
                         autocorrelation, calderon_constant, calderon_reconstruct, dct_spectrum,
                         periodogram, scalogram)

__version__ = "0.1.0"
