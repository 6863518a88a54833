"""rnnbench: from-scratch LSTM/GRU forecaster and optimizer benchmark.

Trains small recurrent networks on sliding windows of a scaled daily
price series and compares first-order optimizers (Adam, Nesterov
momentum, classical momentum) under a fixed protocol: one sample per
update, ten epochs, squared-error loss, and RMSE on a held-out test
partition.  Everything numeric is implemented here, on float64 arrays,
with an optional compiled kernel backend that is bit-identical to the
pure-Python one.
"""

from .cells import Forecaster, backward_sequence, forward_sequence, gradient_check
from .kernels import active_name as kernel_backend
from .linalg import Matrix, Rng, Vector

__version__ = "0.1.0"

__all__ = [
    "Forecaster",
    "Matrix",
    "Rng",
    "Vector",
    "backward_sequence",
    "forward_sequence",
    "gradient_check",
    "kernel_backend",
    "__version__",
]
