from .spectral_kernel import SpectralKernelModel
from .volterra_solver import AmplitudeSolverModel
from .coefficients import MasterEquationCoefficientsModel
from .cat_state import CatStateModel
from .discrete_bath import DiscreteBathModel

__all__ = [
    "SpectralKernelModel",
    "AmplitudeSolverModel",
    "MasterEquationCoefficientsModel",
    "CatStateModel",
    "DiscreteBathModel",
]
