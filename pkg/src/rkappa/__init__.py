"""rkappa: kappa-family models for the r largest values per block.

Densities, marginals and conditionals of the r-largest order statistics, an
exact sampler, maximum-likelihood fitting with delta-method return levels, and
a small command-line front end (``rkappa``).
"""
from __future__ import annotations

from . import errors
from .core_dist import *  # noqa: F401,F403
from .core_dist import __all__ as _core_all
from .data_io import load, save, validate, venice, venice_maxima
from .errors import *  # noqa: F401,F403
from .errors import __all__ as _err_all
from .inference import *  # noqa: F401,F403
from .inference import __all__ as _inf_all
from .returns import *  # noqa: F401,F403
from .returns import __all__ as _ret_all
from .rlargest import *  # noqa: F401,F403
from .rlargest import __all__ as _rl_all
from .sampling import *  # noqa: F401,F403
from .sampling import __all__ as _samp_all

__version__ = "0.1.0"

__all__ = (
    list(_core_all) + list(_err_all) + list(_rl_all) + list(_samp_all) + list(_inf_all) + list(_ret_all)
    + ["load", "save", "validate", "venice", "venice_maxima", "errors", "__version__"]
)
