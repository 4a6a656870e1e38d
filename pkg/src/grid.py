"""Dyadic time-grid helpers shared by the variance and rate simulators."""

from .errors import ParameterError


def is_power_of_two(n: int) -> bool:
    return isinstance(n, int) and n >= 1 and (n & (n - 1)) == 0


def check_dyadic(n_steps: int, name: str = 'n_steps') -> int:
    """Validate a step count that must be 2^m for some m >= 0."""
    if isinstance(n_steps, bool) or not isinstance(n_steps, int) or not is_power_of_two(n_steps):
        raise ParameterError(f"{name} must be a power of two, got {n_steps!r}")
    return n_steps


def level_steps(level: int) -> int:
    if isinstance(level, bool) or not isinstance(level, int) or level < 0:
        raise ParameterError(f"Level must be a nonnegative integer, got {level!r}")
    return 2 ** level


def coarse_is_fine(n_steps: int, coarse_stride: int) -> bool:
    """Coarse sums collapse onto the fine ones for stride 1 or a single-step grid."""
    check_dyadic(coarse_stride, 'coarse_stride')
    return coarse_stride == 1 or coarse_stride > n_steps
