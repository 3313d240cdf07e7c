"""
Error types
Exceptions raised by the solver library and mapped to exit codes by the CLI
"""
from typing import Optional, Sequence, Tuple


class SwellError(Exception):
    """Base class for all solver errors"""


class ConfigError(SwellError, ValueError):
    """Invalid run configuration or case parameters"""


class BoundaryError(ConfigError):
    """Boundary set that cannot be realized"""


class ReconstructionError(SwellError):
    """Stencil whose geometry matrix does not have full column rank"""


class RootFindError(SwellError):
    """Bracketed root search without a sign change or without convergence"""


class NumericalFault(SwellError, RuntimeError):
    """
    Loss of admissibility or finiteness during time stepping

    Carries the step index, simulation time and a few offending cells so
    the failure can be located without re-running.
    """

    def __init__(
        self,
        message: str,
        step: Optional[int] = None,
        time: Optional[float] = None,
        cells: Sequence[Tuple[int, int]] = ()
    ):
        self.step = step
        self.time = time
        self.cells = list(cells)[:10]
        details = []
        if step is not None:
            details.append(f"step={step}")
        if time is not None:
            details.append(f"t={time:.6g}")
        if self.cells:
            details.append(f"cells={self.cells}")
        suffix = f" ({', '.join(details)})" if details else ""
        super().__init__(f"{message}{suffix}")
