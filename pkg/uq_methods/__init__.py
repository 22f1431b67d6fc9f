"""Monte Carlo, LinCov, UT, CUT4, PCE and GMM uncertainty propagation."""

from .beliefs import (
    KIND_SAMPLES,
    KIND_SIGMA,
    CentralMomentSet,
    GaussianBelief,
    GaussianMixture,
    WeightedEnsemble,
    covariance_error,
)
from .sampling import STREAMS, make_generator, mc_run, sample_gaussian
from .propagators import CallablePropagator, DirectPropagator, MappedPropagator, Propagator
from .sigma_points import (
    cut4_parameters,
    cut4_points,
    cut4_run,
    cut4_standard_set,
    default_lambda,
    lincov,
    lincov_run,
    ut_points,
    ut_run,
)
from .moments import weighted_central_moments
from .pce import PceSurrogate, hermite_design, pce_fit, pce_moments, surrogate_samples
from .gmm import gmm_propagate, gmm_split, split_component
