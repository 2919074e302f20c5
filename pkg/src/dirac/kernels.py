"""Sampling kernel families and their derivatives.

Two families are supported: the integer (nearest) kernel, which rounds a
coordinate to the nearest grid index via floor(g + 0.5), and the bilinear
kernel max(0, 1 - |g - n|).  Both evaluate and differentiate pointwise and
vectorize over numpy arrays.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import InvalidArgumentError


class Kernel(enum.Enum):
    INTEGER = "integer"
    BILINEAR = "bilinear"

    @classmethod
    def parse(cls, name: str) -> "Kernel":
        try:
            return cls(name.lower())
        except ValueError:
            raise InvalidArgumentError(
                f"unknown kernel {name!r}; expected 'integer' or 'bilinear'"
            ) from None


def _check_finite(g):
    if not np.all(np.isfinite(g)):
        raise InvalidArgumentError("kernel coordinate must be finite")


def kernel_eval(kind: Kernel, g, n):
    """Weight assigned by kernel `kind` to grid index `n` at coordinate `g`.

    Integer: 1 where floor(g + 0.5) == n, else 0 (so 1.5 -> 2, -0.5 -> 0).
    Bilinear: max(0, 1 - |g - n|).
    """
    g = np.asarray(g, dtype=np.float64)
    _check_finite(g)
    n = np.asarray(n, dtype=np.float64)
    if kind is Kernel.INTEGER:
        out = np.where(np.floor(g + 0.5) == n, 1.0, 0.0)
    else:
        out = np.maximum(0.0, 1.0 - np.abs(g - n))
    return out if out.ndim else float(out)


def kernel_derivative(kind: Kernel, g, n):
    """d/dg of kernel_eval.

    Integer is piecewise constant, so 0 everywhere.  Bilinear is -sign(g - n)
    for 0 < |g - n| < 1; the subgradient 0 is chosen at the kinks
    |g - n| in {0, 1}.
    """
    g = np.asarray(g, dtype=np.float64)
    _check_finite(g)
    n = np.asarray(n, dtype=np.float64)
    if kind is Kernel.INTEGER:
        out = np.zeros(np.broadcast(g, n).shape)
    else:
        d = g - n
        out = np.where((np.abs(d) > 0.0) & (np.abs(d) < 1.0), -np.sign(d), 0.0)
    return out if out.ndim else float(out)
