"""Numerical verification of stability, instability, dichotomy and trichotomy
for discrete-time linear skew-evolution semiflows."""

__version__ = "0.1.0"

from .errors import (DomainError, InconsistencyError, InputError, InvarianceError,
                     PreconditionError, SkewFlowError)
from .core import (LinearOperator, SkewEvolutionSystem, adjoint_apply, evaluate, operator_norm,
                   random_time_grid, restrict, shift, step_system, translation_semiflow,
                   vector_norm, verify_axioms)
from .criteria import (IDENTITY, Certificate, EnvelopeBound, Horizon, MonotoneGauge,
                       adjoint_criterion, datko_criterion, eis_certificate, es_certificate,
                       estimate_exponent, fit_decay, fit_growth, instability_criterion)
from .spectra import (ProjectorFamily, SplitCertificate, check_compatible, check_invariance,
                      check_trichotomy_characteristics, dichotomy_certificate,
                      dichotomy_sum_criterion, four_from_three, four_projector_certificate,
                      three_from_four, trichotomy_certificate, trichotomy_sum_criterion)
from .corpus import FixtureDescriptor, GeneratorSpec, builtin, random_block_cocycle
