"""Uniform-grid model of complex functions on [0, 1].

Samples live at the right-endpoint nodes x_i = (i+1)/N.  Node 0 sits at
x = 1/N, never at 0, so continuous representatives with f(0) = 0 need no
special casing and the cumulative-integration kernel is exact on constants.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec

DEFAULT_SUPPORT_TOL = 1e-9

MAX_POLY_DEGREE = 64


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def nodes(N):
    """Grid nodes x_i = (i+1)/N for i = 0..N-1."""
    return np.arange(1, N + 1, dtype=np.float64) / N


@dataclass(frozen=True)
class GridFunction:
    """Sampled representative of a function on [0,1].

    values[i] approximates f(x_i) at x_i = (i+1)/N.  Instances are
    immutable (the sample array is marked read-only) and safe to share
    across threads.
    """

    N: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128)
        if vals.shape != (self.N,):
            raise ValueError(f"expected {self.N} samples, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function samples must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def h(self):
        return 1.0 / self.N

    def nodes(self):
        return nodes(self.N)

    def scaled(self, c):
        return GridFunction(self.N, self.values * c)


@dataclass(frozen=True)
class FunctionSpec:
    """Input language for grid functions.

    kind is one of "poly", "power", "shift", "samples":
      poly     -- polynomial with ascending coefficients (degree <= 64)
      power    -- x**gamma with gamma > -1
      shift    -- inner spec translated right by t0, zero on (0, t0]
      samples  -- explicit complex samples (length must match N)
    """

    kind: str
    coeffs: tuple = ()
    gamma: float = 0.0
    t0: float = 0.0
    inner: "FunctionSpec | None" = None
    samples: tuple = ()

    @classmethod
    def poly(cls, coeffs):
        coeffs = tuple(complex(c) for c in coeffs)
        if len(coeffs) == 0:
            raise InvalidSpec("polynomial spec needs at least one coefficient")
        if len(coeffs) - 1 > MAX_POLY_DEGREE:
            raise InvalidSpec(f"polynomial degree limited to {MAX_POLY_DEGREE}")
        return cls(kind="poly", coeffs=coeffs)

    @classmethod
    def power(cls, gamma):
        gamma = float(gamma)
        if gamma <= -1.0:
            raise InvalidSpec("power spec requires gamma > -1")
        return cls(kind="power", gamma=gamma)

    @classmethod
    def shift(cls, inner, t0):
        t0 = float(t0)
        if not 0.0 <= t0 < 1.0:
            raise InvalidSpec("shift offset must lie in [0, 1)")
        return cls(kind="shift", t0=t0, inner=inner)

    @classmethod
    def from_samples(cls, values):
        return cls(kind="samples", samples=tuple(complex(v) for v in values))

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or "type" not in obj:
            raise InvalidSpec("function spec JSON must be an object with a 'type' key")
        kind = obj["type"]
        if kind == "poly":
            return cls.poly([_json_scalar(c) for c in obj["coeffs"]])
        if kind == "power":
            return cls.power(obj["gamma"])
        if kind == "shift":
            return cls.shift(cls.from_json(obj["inner"]), obj["t0"])
        if kind == "samples":
            return cls.from_samples([_json_scalar(v) for v in obj["values"]])
        raise InvalidSpec(f"unknown function spec type {kind!r}")

    @classmethod
    def from_path(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _json_scalar(v):
    """A JSON number or [re, im] pair as a complex scalar."""
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise InvalidSpec(f"expected number or [re, im] pair, got {v!r}")


def _eval_spec(spec, x, N):
    if spec.kind == "poly":
        return np.polynomial.polynomial.polyval(x, np.asarray(spec.coeffs)).astype(
            np.complex128
        )
    if spec.kind == "power":
        return (x.astype(np.complex128)) ** spec.gamma
    if spec.kind == "shift":
        offset = spec.t0 * N
        if abs(offset - round(offset)) > 1e-9:
            raise InvalidSpec(
                f"shift offset {spec.t0} is not grid aligned at N={N} "
                f"(t0*N={offset} must be integral)"
            )
        out = np.zeros(len(x), dtype=np.complex128)
        mask = x > spec.t0 + 1e-15
        out[mask] = _eval_spec(spec.inner, x[mask] - spec.t0, N)
        return out
    if spec.kind == "samples":
        if len(spec.samples) != N:
            raise InvalidSpec(
                f"sample spec holds {len(spec.samples)} values, grid needs {N}"
            )
        return np.asarray(spec.samples, dtype=np.complex128)
    raise InvalidSpec(f"unknown spec kind {spec.kind!r}")


def make_grid_function(spec, N):
    """Sample a FunctionSpec on the N-point grid.

    N must be a power of two (>= 4) so the fast convolution path applies;
    shift offsets must land on grid nodes.
    """
    if not isinstance(N, (int, np.integer)) or not is_power_of_two(int(N)) or N < 4:
        raise InvalidSpec(f"grid size must be a power of two >= 4, got {N}")
    N = int(N)
    return GridFunction(N, _eval_spec(spec, nodes(N), N))


def norm(f, p):
    """Rectangle-rule L^p norm, p in {1, 2, inf}."""
    a = np.abs(f.values)
    if p == 1:
        return float(np.sum(a) / f.N)
    if p == 2:
        return float(math.sqrt(np.sum(a * a) / f.N))
    if p == math.inf:
        return float(np.max(a)) if f.N else 0.0
    raise InvalidSpec(f"norm index must be 1, 2 or inf, got {p!r}")


def inf_support(f, tol=DEFAULT_SUPPORT_TOL):
    """Leftmost node where |f| exceeds tol * max|f|; 1.0 if none.

    The threshold is relative so the answer is scale invariant.
    """
    if tol < 0:
        raise InvalidSpec("support tolerance must be nonnegative")
    a = np.abs(f.values)
    peak = a.max() if f.N else 0.0
    idx = np.nonzero(a > tol * peak)[0]
    if len(idx) == 0:
        return 1.0
    return float((idx[0] + 1) / f.N)


def multiply_by_argument(f):
    """Pointwise multiplication by the grid coordinate: (Mf)(x) = x f(x)."""
    return GridFunction(f.N, f.values * nodes(f.N))


def leading_zero_count(values):
    """Length of the exact-zero prefix of a sample array."""
    nz = np.nonzero(values)[0]
    return int(nz[0]) if len(nz) else len(values)
