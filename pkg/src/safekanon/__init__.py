"""Random sampling plus safe k-anonymization, with exact (epsilon, delta) accounting."""

from .binomial import BinomialSpec, cdf, log_pmf, pmf, tail_strict
from .data import Dataset, load_dataset, read_dataset, write_dataset
from .errors import DomainError, ParseError, RecodingError
from .hierarchy import HierarchySpec, RecodingScheme, recode
from .pipeline import (
    AnonymizedDataset,
    Release,
    apply_suppress,
    esafe_publish,
    exp_mech_select,
    quality,
    sample,
    strongly_safe_publish,
)
from .privacy import (
    AmplifiedParams,
    EsafeParams,
    PrivacyParams,
    amplify,
    delta_esafe,
    delta_strongly_safe,
    gamma,
    min_epsilon,
    solve_min_epsilon,
    solve_min_k,
    strongly_safe_bound,
)

__version__ = "0.1.0"
