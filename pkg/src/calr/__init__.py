"""Quasistatic slab-lens resonance: transforms, potentials, dissipation and bounds."""
from .bounds import (blowup_sequence, classify, lemma_suite, theorem_lower_bound,
                     upper_bound_chain, witness_constant)
from .config import RunConfig, load_config, parse_config, preset
from .dissipation import dissipation, dissipation_lower_bound_tail, integrand_F
from .errors import (DeltaTooLargeError, IntegrationError, InvalidParameterError,
                     NotApplicableError)
from .logval import TransformValue
from .potential import (boundedness_certificates, potential_hat, reconstruct_line,
                        reconstruct_real)
from .slab import SlabConfig, feasible, k0, tau
from .sources import CircleSource, GridSource, RectangleSource, load_grid, validate
from .sweep import evaluate_point, run_sweep
from .verify import run_verify

__version__ = "0.1.0"
