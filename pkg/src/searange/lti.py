"""Polynomial and rational transfer-function algebra for continuous-time LTI analysis.

Everything downstream (plant models, port impedances, passivity sweeps,
simulation back-ends) is built on two immutable value types defined here:
``Polynomial`` (real coefficients, ascending powers of the Laplace variable s)
and ``RationalTF`` (a ratio of two polynomials, denominator kept monic).

Design notes:

* No automatic pole/zero cancellation is ever performed.  Assembled loop
  expressions are kept in whatever (possibly non-minimal) form the algebra
  produces and are evaluated pointwise; a cancellation tolerance would
  silently move passivity margins.
* Root finding goes through the companion-matrix eigensolver in
  ``numpy.polynomial``.  The contract is the residual accuracy, not the
  algorithm.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    ImproperTransferFunctionError,
    InvalidInputError,
    SingularLoopError,
)

__all__ = [
    "Polynomial",
    "RationalTF",
    "FrequencyGrid",
    "FreqResponse",
    "StateSpace",
    "Stability",
    "S",
    "ONE",
    "poly_roots",
    "tf_combine",
    "tf_feedback",
    "freq_response",
    "is_stable",
    "stability_tolerance",
    "tf_to_state_space",
]


def _trim(coeffs) -> tuple[float, ...]:
    """Drop exact-zero leading (highest-order) coefficients, keep >= 1 entry."""
    c = [float(x) for x in coeffs]
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial in s, coefficients ascending: coeffs[k] * s**k."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        if isinstance(self.coeffs, (int, float)):
            object.__setattr__(self, "coeffs", (float(self.coeffs),))
            return
        if len(self.coeffs) == 0:
            raise InvalidInputError("polynomial needs at least one coefficient")
        if not all(math.isfinite(c) for c in self.coeffs):
            raise InvalidInputError("polynomial coefficients must be finite")
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    # -- queries ---------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0.0

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    def __call__(self, x: complex) -> complex:
        """Horner evaluation at a (complex) point."""
        acc = 0.0 + 0.0j
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_many(self, x: np.ndarray) -> np.ndarray:
        return npoly.polyval(x, np.asarray(self.coeffs))

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial((0.0,))
        d = [k * c for k, c in enumerate(self.coeffs)][1:]
        return Polynomial(tuple(d))

    # -- algebra ---------------------------------------------------------
    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        out = [0.0] * n
        for i, c in enumerate(a):
            out[i] += c
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(tuple(out))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1.0)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.is_zero or other.is_zero:
            return Polynomial((0.0,))
        return Polynomial(tuple(np.convolve(self.coeffs, other.coeffs)))

    def scale(self, k: float) -> "Polynomial":
        return Polynomial(tuple(k * c for c in self.coeffs))

    @classmethod
    def from_roots(cls, roots) -> "Polynomial":
        c = npoly.polyfromroots(roots)
        if np.max(np.abs(c.imag)) > 1e-9 * max(1.0, np.max(np.abs(c.real))):
            raise InvalidInputError("roots do not form a real polynomial")
        return cls(tuple(c.real))


ONE = Polynomial((1.0,))
_S_POLY = Polynomial((0.0, 1.0))


def poly_roots(p: Polynomial) -> list[complex]:
    """All deg(p) roots (with multiplicity) via companion-matrix eigensolve."""
    if p.is_zero:
        raise InvalidInputError("zero polynomial has no defined roots")
    if p.degree < 1:
        raise InvalidInputError("root finding needs degree >= 1")
    return [complex(r) for r in npoly.polyroots(np.asarray(p.coeffs))]


@dataclass(frozen=True)
class RationalTF:
    """Ratio of real polynomials in s; denominator normalized monic.

    No tolerance-based pole/zero cancellation is performed: two
    pointwise-identical instances may carry different degrees, and
    near-coincident roots are never matched up.  The one reduction applied
    is exact: common monomial factors s^k (coefficients identically zero)
    are stripped at construction, since chained integrator assemblies
    otherwise pile up removable s/s pairs at the origin that corrupt pole
    bookkeeping.
    """

    num: Polynomial
    den: Polynomial = field(default=ONE)

    def __post_init__(self):
        num, den = self.num, self.den
        if not isinstance(num, Polynomial):
            num = Polynomial((float(num),))
        if not isinstance(den, Polynomial):
            den = Polynomial((float(den),))
        if den.is_zero:
            raise InvalidInputError("denominator must not be the zero polynomial")
        if not num.is_zero:
            a = next(i for i, c in enumerate(num.coeffs) if c != 0.0)
            b = next(i for i, c in enumerate(den.coeffs) if c != 0.0)
            k = min(a, b)
            if k:
                num = Polynomial(num.coeffs[k:])
                den = Polynomial(den.coeffs[k:])
        lead = den.leading
        if lead != 1.0:
            num = num.scale(1.0 / lead)
            den = den.scale(1.0 / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    # -- constructors ------------------------------------------------------
    @classmethod
    def scalar(cls, k: float) -> "RationalTF":
        return cls(Polynomial((float(k),)), ONE)

    # -- queries -----------------------------------------------------------
    @property
    def relative_degree(self) -> int:
        return self.den.degree - self.num.degree

    @property
    def is_proper(self) -> bool:
        return self.relative_degree >= 0

    @property
    def is_biproper(self) -> bool:
        return self.relative_degree == 0

    def __call__(self, s: complex) -> complex:
        return self.num(s) / self.den(s)

    def at_omega(self, omega: float) -> complex:
        return self(1j * omega)

    def dc_gain(self) -> float:
        """Value at s=0; inf if there is a pole at the origin."""
        d0 = self.den(0.0)
        n0 = self.num(0.0)
        if d0 == 0:
            return math.inf if n0 != 0 else math.nan
        return float((n0 / d0).real)

    def poles(self) -> list[complex]:
        if self.den.degree < 1:
            return []
        return poly_roots(self.den)

    def zeros(self) -> list[complex]:
        if self.num.degree < 1 or self.num.is_zero:
            return []
        return poly_roots(self.num)

    # -- algebra -----------------------------------------------------------
    def __add__(self, other) -> "RationalTF":
        other = _as_tf(other)
        return RationalTF(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __sub__(self, other) -> "RationalTF":
        return self + (-_as_tf(other))

    def __rsub__(self, other) -> "RationalTF":
        return _as_tf(other) + (-self)

    def __neg__(self) -> "RationalTF":
        return RationalTF(self.num.scale(-1.0), self.den)

    def __mul__(self, other) -> "RationalTF":
        other = _as_tf(other)
        return RationalTF(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalTF":
        return self * _as_tf(other).inverse()

    def __rtruediv__(self, other) -> "RationalTF":
        return _as_tf(other) * self.inverse()

    def scale(self, k: float) -> "RationalTF":
        return RationalTF(self.num.scale(float(k)), self.den)

    def inverse(self) -> "RationalTF":
        if self.num.is_zero:
            raise InvalidInputError("cannot invert the zero transfer function")
        return RationalTF(self.den, self.num)

    def feedback(self, other) -> "RationalTF":
        """Negative-feedback interconnection self / (1 + self*other)."""
        return tf_feedback(self, other)


def _as_tf(x) -> RationalTF:
    if isinstance(x, RationalTF):
        return x
    if isinstance(x, Polynomial):
        return RationalTF(x, ONE)
    if isinstance(x, (int, float)):
        return RationalTF.scalar(x)
    raise InvalidInputError(f"cannot interpret {type(x).__name__} as a transfer function")


#: The Laplace variable as a transfer function; 1/S is an integrator.
S = RationalTF(_S_POLY, ONE)


def tf_combine(kind: str, a: RationalTF, b) -> RationalTF:
    """Combine two transfer functions: kind in {'add', 'mul', 'scale'}."""
    a = _as_tf(a)
    if kind == "add":
        return a + _as_tf(b)
    if kind == "mul":
        return a * _as_tf(b)
    if kind == "scale":
        return a.scale(float(b))
    raise InvalidInputError(f"unknown combination kind {kind!r}")


def tf_feedback(a, b) -> RationalTF:
    """fb(A, B) = A / (1 + A*B), the negative-feedback interconnection."""
    a, b = _as_tf(a), _as_tf(b)
    num = a.num * b.den
    den = a.den * b.den + a.num * b.num
    if den.is_zero:
        raise SingularLoopError("1 + A*B is identically zero")
    return RationalTF(num, den)


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing positive angular frequencies (rad/s)."""

    points: tuple[float, ...]

    def __post_init__(self):
        pts = tuple(float(w) for w in self.points)
        if len(pts) < 2:
            raise InvalidInputError("frequency grid needs at least 2 points")
        if pts[0] <= 0.0:
            raise InvalidInputError("frequencies must be positive")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise InvalidInputError("frequencies must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def log_spaced(
        cls, lo: float = 1e-3, hi: float = 1e6, n: int = 400
    ) -> "FrequencyGrid":
        return cls(tuple(np.logspace(math.log10(lo), math.log10(hi), n)))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.points)

    def __len__(self) -> int:
        return len(self.points)


#: Default analysis grid used by the sweep-based passivity conditions.
DEFAULT_GRID = FrequencyGrid.log_spaced(1e-3, 1e6, 400)


@dataclass(frozen=True)
class FreqResponse:
    """Pointwise frequency response, with on-pole samples flagged singular."""

    omega: np.ndarray
    values: np.ndarray
    singular: np.ndarray  # bool mask; values there are meaningless

    @property
    def any_singular(self) -> bool:
        return bool(np.any(self.singular))


def freq_response(g: RationalTF, grid: FrequencyGrid) -> FreqResponse:
    """Evaluate num(jw)/den(jw) on the grid.

    Samples where the denominator vanishes (relative to its coefficient
    scale) are reported in the ``singular`` mask rather than silently
    dropped or propagated as inf.
    """
    w = grid.array
    s = 1j * w
    num = g.num.eval_many(s)
    den = g.den.eval_many(s)
    # scale-aware zero test: |den(jw)| against the largest term magnitude
    wmag = np.maximum(1.0, np.abs(w))
    term_scale = np.zeros_like(w)
    for k, c in enumerate(g.den.coeffs):
        term_scale = np.maximum(term_scale, abs(c) * wmag**k)
    singular = np.abs(den) <= 1e-14 * term_scale
    vals = np.empty_like(num)
    ok = ~singular
    vals[ok] = num[ok] / den[ok]
    vals[singular] = np.inf
    return FreqResponse(omega=w, values=vals, singular=singular)


class Stability(enum.Enum):
    STABLE = "stable"
    MARGINAL = "marginal"
    UNSTABLE = "unstable"


def stability_tolerance(poles, tol: float | None = None) -> float:
    """Scale-aware imaginary-axis tolerance: 1e-9 * max(1, |largest pole|)."""
    if tol is not None:
        return tol
    biggest = max((abs(p) for p in poles), default=0.0)
    return 1e-9 * max(1.0, biggest)


def is_stable(g: RationalTF, tol: float | None = None) -> Stability:
    """Pole-location test: stable / marginal / unstable.

    stable    all poles Re < -tol
    marginal  at least one pole within +-tol of the axis, none beyond
    unstable  any pole with Re > +tol
    """
    poles = g.poles()
    if not poles:
        return Stability.STABLE
    t = stability_tolerance(poles, tol)
    re = [p.real for p in poles]
    if any(r > t for r in re):
        return Stability.UNSTABLE
    if any(r >= -t for r in re):
        return Stability.MARGINAL
    return Stability.STABLE


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Continuous-time state-space realization (A, B, C, D)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise InvalidInputError("A must be square")
        if n == 0:
            A = np.zeros((0, 0))
            B = np.zeros((0, 1))
            C = np.zeros((1, 0))
        else:
            B = np.asarray(self.B, dtype=float).reshape(n, -1)
            C = np.asarray(self.C, dtype=float).reshape(-1, n)
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        if B.shape[0] != n or C.shape[1] != n:
            raise InvalidInputError("inconsistent state-space dimensions")
        if D.shape != (C.shape[0], B.shape[1]):
            raise InvalidInputError("D dimensions must match C rows x B columns")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def freq_response(self, grid: FrequencyGrid) -> np.ndarray:
        """SISO response C (jwI - A)^-1 B + D, one complex value per point."""
        n = self.order
        out = np.empty(len(grid), dtype=complex)
        I = np.eye(n)
        for i, w in enumerate(grid.points):
            if n == 0:
                out[i] = self.D[0, 0]
                continue
            x = np.linalg.solve(1j * w * I - self.A, self.B[:, 0])
            out[i] = self.C[0, :] @ x + self.D[0, 0]
        return out


def tf_to_state_space(g: RationalTF) -> StateSpace:
    """Controllable-canonical realization of a proper transfer function."""
    if not g.is_proper:
        raise ImproperTransferFunctionError(
            f"relative degree {g.relative_degree} < 0; absorb derivative action first"
        )
    den = g.den  # monic by construction
    n = den.degree
    num = list(g.num.coeffs) + [0.0] * (n + 1 - len(g.num.coeffs))
    d = num[n]
    # strictly-proper remainder: num - d * den
    c = [num[k] - d * den.coeffs[k] for k in range(n)]
    if n == 0:
        return StateSpace(
            A=np.zeros((0, 0)), B=np.zeros((0, 1)), C=np.zeros((1, 0)), D=[[d]]
        )
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = [-a for a in den.coeffs[:n]]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = np.asarray(c, dtype=float).reshape(1, n)
    return StateSpace(A=A, B=B, C=C, D=[[d]])
