"""Dependent categorical random variables and the generalized multinomial."""

from .distribution import (
    CrossCovarianceMatrix,
    FormulaSource,
    MomentSummary,
    compositions,
    correlation,
    covariance,
    cross_covariance,
    marginal_pmf,
    mean,
    mgf,
    moments,
    pmf,
    pmf_table,
)
from .errors import DCRVError
from .params import (
    ConditionalDistribution,
    IdentityReport,
    MarginalParams,
    ModelParams,
    check_identities,
    conditional_probs,
    marginal_params,
    new_model,
)
from .sampler import (
    SequenceInterval,
    counts,
    lex_index,
    lex_sequence,
    sample_inverse,
    sample_many,
    sequence_interval,
    sequence_probability,
)

__version__ = "0.1.0"
