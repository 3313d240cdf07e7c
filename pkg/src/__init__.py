"""
swell: well-balanced high-order shallow water solver
"""
__version__ = '1.0.0'

from .cases import CASES, CaseSpec, get_case, init_case
from .config import RunConfig, load_config
from .core import BoundaryKind, BoundarySpec, ConservedState, FieldSet, Grid2D, PhysParams
from .exceptions import ConfigError, NumericalFault, SwellError
from .mood import MoodLimiter
from .scheme_fo import FirstOrderScheme
from .scheme_ho import HighOrderScheme
from .simulation import Simulation, convergence
from .wb_correction import WellBalancedCorrection

__all__ = [
    'CASES',
    'CaseSpec',
    'get_case',
    'init_case',
    'RunConfig',
    'load_config',
    'BoundaryKind',
    'BoundarySpec',
    'ConservedState',
    'FieldSet',
    'Grid2D',
    'PhysParams',
    'ConfigError',
    'NumericalFault',
    'SwellError',
    'MoodLimiter',
    'FirstOrderScheme',
    'HighOrderScheme',
    'Simulation',
    'convergence',
    'WellBalancedCorrection',
]
