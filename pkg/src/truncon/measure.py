"""Finite Borel measures on [0, 1) as grid-alignable atoms plus densities.

A Measure is a sum of point masses and density pieces; a piece is either a
polynomial on a subinterval [lo, hi) of [0, 1) or a scaled fractional
density coeff * x^(z-1)/Gamma(z) with Re z > 0.  This expressible class
covers every symbol the package instantiates; singular-continuous parts are
out of scope.

Symbolic convolution is implemented for atoms and polynomial pieces only
(the convolution of two polynomial pieces is piecewise polynomial with
breakpoints at the pairwise endpoint sums).  Fractional pieces compose at
the kernel level instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gamma as complex_gamma

from .errors import InvalidSpec
from .grid import _json_scalar
from .operators import Kernel, fractional_cell_weights

ATOM_ALIGNMENT_TOL = 1e-9

# coefficient blocks smaller than this (relative to the measure) are dropped
NEGLIGIBLE = 1e-300


@dataclass(frozen=True)
class PolyPiece:
    """Density p(x) with ascending coefficients, supported on [lo, hi)."""

    coeffs: tuple
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        cs = tuple(complex(c) for c in self.coeffs)
        while len(cs) > 1 and cs[-1] == 0:
            cs = cs[:-1]
        object.__setattr__(self, "coeffs", cs)
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise InvalidSpec(
                f"polynomial piece needs 0 <= lo < hi <= 1, got [{self.lo}, {self.hi})"
            )

    @property
    def is_zero(self):
        return all(c == 0 for c in self.coeffs)


@dataclass(frozen=True)
class PowerPiece:
    """Density coeff * x^(z-1) / Gamma(z) on [0, 1), Re z > 0."""

    z: complex
    coeff: complex = 1.0 + 0j

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "coeff", complex(self.coeff))
        if self.z.real <= 0:
            raise InvalidSpec(f"power density needs Re z > 0, got {self.z}")

    @property
    def is_zero(self):
        return self.coeff == 0


@dataclass(frozen=True)
class Measure:
    atoms: tuple = ()
    pieces: tuple = ()

    def __post_init__(self):
        merged = {}
        for t, w in self.atoms:
            t = float(t)
            w = complex(w)
            if not 0.0 <= t < 1.0:
                raise InvalidSpec(f"atom location must lie in [0, 1), got {t}")
            merged[t] = merged.get(t, 0j) + w
        atoms = tuple(sorted((t, w) for t, w in merged.items() if w != 0))
        pieces = tuple(p for p in self.pieces if not p.is_zero)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "pieces", pieces)

    # -- constructors ----------------------------------------------------

    @classmethod
    def point_mass(cls, t=0.0, w=1.0):
        return cls(atoms=((t, w),))

    @classmethod
    def lebesgue(cls):
        return cls(pieces=(PolyPiece((1.0,)),))

    @classmethod
    def from_density_coeffs(cls, coeffs, lo=0.0, hi=1.0):
        return cls(pieces=(PolyPiece(tuple(coeffs), lo, hi),))

    @classmethod
    def fractional(cls, z, coeff=1.0):
        return cls(pieces=(PowerPiece(z, coeff),))

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise InvalidSpec("measure JSON must be an object")
        atoms = []
        for a in obj.get("atoms", []):
            atoms.append((float(a["t"]), _json_scalar(a["w"])))
        pieces = []
        for p in obj.get("pieces", []):
            kind = p.get("type")
            if kind == "poly":
                lo, hi = p.get("on", [0.0, 1.0])
                pieces.append(
                    PolyPiece(tuple(_json_scalar(c) for c in p["coeffs"]), lo, hi)
                )
            elif kind == "power":
                coeff = _json_scalar(p["coeff"]) if "coeff" in p else 1.0
                pieces.append(PowerPiece(_json_scalar(p["z"]), coeff))
            else:
                raise InvalidSpec(f"unknown measure piece type {kind!r}")
        return cls(atoms=tuple(atoms), pieces=tuple(pieces))

    @classmethod
    def from_path(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    # -- algebra helpers (artifact plumbing) ------------------------------

    def plus(self, other):
        return Measure(self.atoms + other.atoms, self.pieces + other.pieces)

    def scaled(self, c):
        c = complex(c)
        atoms = tuple((t, w * c) for t, w in self.atoms)
        pieces = []
        for p in self.pieces:
            if isinstance(p, PolyPiece):
                pieces.append(PolyPiece(tuple(x * c for x in p.coeffs), p.lo, p.hi))
            else:
                pieces.append(PowerPiece(p.z, p.coeff * c))
        return Measure(atoms, tuple(pieces))


def atom_at_zero(mu):
    """The weight mu({0}) (0 if there is no atom at the origin)."""
    for t, w in mu.atoms:
        if t == 0.0:
            return w
    return 0j


def total_variation(mu):
    """Sum of |atom weights| plus the integrals of |density| over the pieces.

    Real-coefficient polynomial pieces are integrated in closed form by
    splitting at their real roots; genuinely complex densities fall back to
    fixed high-order Gauss-Legendre panels (|p| has no polynomial
    antiderivative in that case).
    """
    tv = sum(abs(w) for _, w in mu.atoms)
    for p in mu.pieces:
        if isinstance(p, PowerPiece):
            tv += abs(p.coeff) / (p.z.real * abs(complex_gamma(p.z)))
        else:
            tv += _poly_abs_integral(np.asarray(p.coeffs), p.lo, p.hi)
    return float(tv)


def _poly_abs_integral(coeffs, lo, hi):
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        return 0.0
    if np.max(np.abs(coeffs.imag)) <= 1e-14 * scale:
        real = coeffs.real
        anti = P.polyint(real)
        breaks = [lo, hi]
        if len(real) > 1:
            for r in np.roots(real[::-1]):
                if abs(r.imag) <= 1e-12 * (1 + abs(r)) and lo < r.real < hi:
                    breaks.append(float(r.real))
        breaks = sorted(set(breaks))
        total = 0.0
        for a, b in zip(breaks[:-1], breaks[1:]):
            seg = P.polyval(b, anti) - P.polyval(a, anti)
            total += abs(seg)
        return float(total)
    # complex coefficients: |p| is smooth off isolated zeros; GL panels
    xg, wg = np.polynomial.legendre.leggauss(32)
    total = 0.0
    panels = np.linspace(lo, hi, 5)
    for a, b in zip(panels[:-1], panels[1:]):
        x = 0.5 * (b - a) * xg + 0.5 * (a + b)
        total += 0.5 * (b - a) * np.sum(wg * np.abs(P.polyval(x, coeffs)))
    return float(total)


def derivative_measure(mu):
    """The measure reweighted by the density rho(x) = -x.

    Atoms (t, w) become (t, -t w), so a point mass at the origin vanishes;
    a polynomial density d(x) becomes -x d(x); a fractional density of
    order z becomes -z times the order-(z+1) density.
    """
    atoms = tuple((t, -t * w) for t, w in mu.atoms)
    pieces = []
    for p in mu.pieces:
        if isinstance(p, PolyPiece):
            pieces.append(PolyPiece((0j,) + tuple(-c for c in p.coeffs), p.lo, p.hi))
        else:
            pieces.append(PowerPiece(p.z + 1, -p.coeff * p.z))
    return Measure(atoms, tuple(pieces))


def inf_support_measure(mu):
    """Leftmost point carrying mass: min over atoms and piece left ends.

    Returns 1.0 for the zero measure.
    """
    candidates = [t for t, _ in mu.atoms]
    for p in mu.pieces:
        candidates.append(p.lo if isinstance(p, PolyPiece) else 0.0)
    return min(candidates) if candidates else 1.0


def sup_support_measure(mu):
    """Rightmost point of the support; 0.0 for the zero measure."""
    candidates = [t for t, _ in mu.atoms]
    for p in mu.pieces:
        candidates.append(p.hi if isinstance(p, PolyPiece) else 1.0)
    return max(candidates) if candidates else 0.0


# -- symbolic convolution ---------------------------------------------------


def convolve(mu, nu):
    """Convolution restricted to [0, 1), for atom + polynomial measures.

    Atom x atom translates the mass (dropped once it leaves [0,1)); an atom
    shifts and truncates a polynomial piece; two polynomial pieces produce
    the exact piecewise-polynomial convolution.  Fractional pieces are
    rejected here; compose their kernels instead.
    """
    for m in (mu, nu):
        if any(isinstance(p, PowerPiece) for p in m.pieces):
            raise InvalidSpec(
                "symbolic convolution covers atoms and polynomial pieces only; "
                "use kernel composition for fractional densities"
            )
    atoms = []
    pieces = []
    for t1, w1 in mu.atoms:
        for t2, w2 in nu.atoms:
            if t1 + t2 < 1.0:
                atoms.append((t1 + t2, w1 * w2))
    for t, w in mu.atoms:
        for p in nu.pieces:
            sp = _shift_piece(p, t, w)
            if sp is not None:
                pieces.append(sp)
    for t, w in nu.atoms:
        for p in mu.pieces:
            sp = _shift_piece(p, t, w)
            if sp is not None:
                pieces.append(sp)
    for p in mu.pieces:
        for q in nu.pieces:
            pieces.extend(_convolve_poly_pieces(p, q))
    return Measure(tuple(atoms), tuple(pieces))


def _shift_piece(p, t, w):
    """w * p(x - t) truncated to [0, 1); None if pushed out entirely."""
    lo, hi = p.lo + t, min(p.hi + t, 1.0)
    if lo >= 1.0 or hi - lo <= 1e-15:
        return None
    shifted = _compose_affine(np.asarray(p.coeffs), -t, 1.0) * w
    return PolyPiece(tuple(shifted), lo, hi)


def _compose_affine(coeffs, alpha, beta):
    """Coefficients of p(alpha + beta*x) given those of p."""
    out = np.zeros(1, dtype=np.complex128)
    basis = np.array([1.0 + 0j])
    lin = np.array([alpha, beta], dtype=np.complex128)
    for c in coeffs:
        out = P.polyadd(out, c * basis)
        basis = P.polymul(basis, lin)
    return np.atleast_1d(out.astype(np.complex128))


def _convolve_poly_pieces(p, q):
    """Exact convolution of two polynomial pieces as a list of pieces.

    With supports [a1,b1) and [a2,b2) the result lives on
    [a1+a2, b1+b2) with polynomial panels separated at the two interior
    endpoint sums; each panel evaluates the bivariate antiderivative of
    p(t) q(x-t) between affine-in-x integration limits.
    """
    a1, b1, a2, b2 = p.lo, p.hi, q.lo, q.hi
    H = _bivariate_antiderivative(np.asarray(p.coeffs), np.asarray(q.coeffs))

    def panel(x_lo, x_hi, lower, upper):
        x_lo, x_hi = max(x_lo, 0.0), min(x_hi, 1.0)
        if x_hi - x_lo <= 1e-15:
            return None
        cs = P.polysub(_substitute_t(H, *upper), _substitute_t(H, *lower))
        piece = PolyPiece(tuple(np.atleast_1d(cs)), x_lo, x_hi)
        return None if piece.is_zero else piece

    cuts = sorted([a1 + a2, a1 + b2, b1 + a2, b1 + b2])
    panels = []
    # limits are (alpha, beta) for t = alpha + beta*x
    panels.append(panel(cuts[0], cuts[1], (a1, 0.0), (-a2, 1.0)))
    if b1 - a1 <= b2 - a2:
        panels.append(panel(cuts[1], cuts[2], (a1, 0.0), (b1, 0.0)))
    else:
        panels.append(panel(cuts[1], cuts[2], (-b2, 1.0), (-a2, 1.0)))
    panels.append(panel(cuts[2], cuts[3], (-b2, 1.0), (b1, 0.0)))
    return [pc for pc in panels if pc is not None]


def _bivariate_antiderivative(pc, qc):
    """H[a, b]: coefficient of x^a t^b in the t-antiderivative of p(t)q(x-t)."""
    dp, dq = len(pc), len(qc)
    # q(x - t) expanded into x^a (-t)^c blocks
    Q = np.zeros((dq, dq), dtype=np.complex128)
    for j, qj in enumerate(qc):
        if qj == 0:
            continue
        for a in range(j + 1):
            Q[a, j - a] += qj * math.comb(j, a) * (-1.0) ** (j - a)
    B = np.zeros((dq, dq + dp - 1), dtype=np.complex128)
    for i, pi in enumerate(pc):
        if pi == 0:
            continue
        B[:, i : i + dq] += pi * Q
    H = np.zeros((B.shape[0], B.shape[1] + 1), dtype=np.complex128)
    H[:, 1:] = B / np.arange(1, B.shape[1] + 1)
    return H


def _substitute_t(H, alpha, beta):
    """H(x, alpha + beta*x) as x-polynomial coefficients."""
    out = np.zeros(1, dtype=np.complex128)
    tk = np.array([1.0 + 0j])
    lin = np.array([alpha, beta], dtype=np.complex128)
    for b in range(H.shape[1]):
        col = np.trim_zeros(H[:, b], "b")
        if len(col):
            out = P.polyadd(out, P.polymul(col, tk))
        tk = P.polymul(tk, lin)
    return out.astype(np.complex128)


# -- kernel compilation ------------------------------------------------------


def to_kernel(mu, N):
    """Compile the measure to its length-N triangular Toeplitz column.

    Cell m receives the atoms sitting at m/N plus the exact integral of
    every density over [m/N, (m+1)/N).  Atoms must be grid aligned.
    """
    k = np.zeros(N, dtype=np.complex128)
    for t, w in mu.atoms:
        pos = t * N
        m = int(round(pos))
        if abs(pos - m) > ATOM_ALIGNMENT_TOL * N or m >= N:
            raise InvalidSpec(
                f"atom at t={t} is not grid aligned for N={N}; "
                "choose N divisible by the location's denominator"
            )
        k[m] += w
    edges = np.arange(N + 1, dtype=np.float64) / N
    for p in mu.pieces:
        if isinstance(p, PowerPiece):
            k += p.coeff * fractional_cell_weights(p.z, N)
        else:
            anti = P.polyint(np.asarray(p.coeffs))
            cl = np.clip(edges, p.lo, p.hi)
            vals = P.polyval(cl, anti)
            k += np.diff(vals)
    return Kernel(N, k)
