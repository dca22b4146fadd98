"""Brown measures of ``x0 + c_{alpha,beta}`` computed from the law of ``x0``.

``x0`` is a (possibly unbounded) self-adjoint variable and ``c_{alpha,beta}``
a free elliptic element, the sum of a semicircular of variance ``alpha`` and
``i`` times a semicircular of variance ``beta``.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .measure_core import (  # noqa: F401
    KernelBundle,
    MeasureSpec,
    cauchy_transform,
    check_log_integrability,
    kernel_bundle,
    log_energy,
)
