"""Small input checks shared across modules, in the spirit of sklearn.utils.validation."""
import math
from numbers import Real

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import ConfigError, DomainError

FEATURE_NAMES = ("a", "x1", "x2")


def check_probability(value, field):
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ConfigError(f"expected a probability, got {value!r}", field)
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{value} is not in [0, 1]", field)
    return value


def check_positive(value, field, error=ConfigError):
    if isinstance(value, bool) or not isinstance(value, Real):
        raise error(f"{field}: expected a positive real, got {value!r}")
    value = float(value)
    if math.isnan(value) or value <= 0.0:
        raise error(f"{field}: {value} is not > 0")
    return value


def check_binary(value, field):
    if isinstance(value, bool) or value not in (0, 1):
        raise ConfigError(f"expected 0 or 1, got {value!r}", field)
    return int(value)


def check_pair(value, field):
    try:
        items = list(value)
    except TypeError:
        raise ConfigError(f"expected a pair of probabilities, got {value!r}", field) from None
    if len(items) != 2:
        raise ConfigError(f"expected 2 entries, got {len(items)}", field)
    return tuple(check_probability(v, f"{field}[{i}]") for i, v in enumerate(items))


def check_features(X):
    """Validate a feature matrix with columns ``(a, x1, x2)``."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != len(FEATURE_NAMES):
        raise DomainError(
            f"expected {len(FEATURE_NAMES)} feature columns {FEATURE_NAMES}, got {X.shape[1]}"
        )
    for j, name in enumerate(FEATURE_NAMES[:2]):
        col = X[:, j]
        if not np.all((col == 0) | (col == 1)):
            raise DomainError(f"feature {name!r} must be binary")
    return X


def check_binary_array(y, name="y"):
    y = np.asarray(y)
    if y.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional")
    if not np.all((y == 0) | (y == 1)):
        raise DomainError(f"{name} must contain only 0 and 1")
    return y.astype(np.int8)
