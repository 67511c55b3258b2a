import cmath
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np

Scalar = complex

# `deflate` accepts ζ when abs(f(ζ)) <= tol * max_i abs(a_i) * max(1, abs(ζ))^n.
DEFLATION_RESIDUAL_TOL = 1e-6


class ResidualError(ValueError):
    def __init__(self, residual: float, threshold: float) -> None:
        super().__init__(
            "The deflation point is not a root: abs(f(zeta)) = %r exceeds "
            "the accepted residual %r" % (residual, threshold)
        )
        self.residual = residual
        self.threshold = threshold


def as_scalar(value: Any) -> Scalar:
    z = complex(value)
    if not cmath.isfinite(z):
        raise ValueError("Scalars must be finite, got %r" % (value,))
    return z


def scalar_to_json(z: Scalar) -> List[float]:
    return [z.real, z.imag]


def scalar_from_json(value: Any) -> Scalar:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("Expected a [re, im] pair, got %r" % (value,))
        return as_scalar(complex(float(value[0]), float(value[1])))
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError("Expected a number or a [re, im] pair, got %r" % (value,))
    return as_scalar(value)


class Polynomial:
    """An immutable polynomial a_0 + a_1 z + ... + a_n z^n.

    Coefficients are stored in ascending order, so ``coeffs[i]`` is a_i.
    The leading coefficient a_n is always nonzero.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Any]) -> None:
        values = tuple(as_scalar(c) for c in coeffs)
        if not values:
            raise ValueError("A polynomial needs at least one coefficient")
        if values[-1] == 0:
            raise ValueError(
                "The leading coefficient must be nonzero, got coefficients %r"
                % (values,)
            )
        self.coeffs: Tuple[Scalar, ...] = values

    @classmethod
    def monomial(cls, leading: Any, degree: int) -> "Polynomial":
        if degree < 0:
            raise ValueError("Degree must be non-negative, got %s" % degree)
        return cls([0j] * degree + [leading])

    @classmethod
    def from_json(cls, data: Any) -> "Polynomial":
        if not isinstance(data, dict) or "coeffs" not in data:
            raise ValueError('Expected an object like {"coeffs": [[re, im], ...]}')
        return cls(scalar_from_json(c) for c in data["coeffs"])

    def to_json(self) -> dict:
        return {"coeffs": [scalar_to_json(c) for c in self.coeffs]}

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Scalar:
        return self.coeffs[-1]

    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=np.complex128)

    def max_abs_coeff(self) -> float:
        return max(abs(c) for c in self.coeffs)

    def low_order(self) -> int:
        """Number of exactly zero low-order coefficients, i.e. the
        multiplicity of the root at zero."""
        count = 0
        for c in self.coeffs:
            if c != 0:
                break
            count += 1
        return count

    def is_pure_power(self) -> bool:
        return self.low_order() == self.degree

    def monic(self) -> "Polynomial":
        return self.scale(1 / self.leading)

    def scale(self, c: Any) -> "Polynomial":
        c = as_scalar(c)
        if c == 0:
            raise ValueError("Scaling by zero would drop the degree")
        return Polynomial(c * a for a in self.coeffs)

    def multiply_linear(self, zeta: Any) -> "Polynomial":
        """Return (z - zeta) * self."""
        zeta = as_scalar(zeta)
        shifted = (0j,) + self.coeffs
        scaled = self.coeffs + (0j,)
        return Polynomial(s - zeta * a for s, a in zip(shifted, scaled))

    def __eq__(self, other):
        if isinstance(other, type(self)):
            return self.coeffs == other.coeffs

        return NotImplemented

    def __ne__(self, other):
        return not (self == other)

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return "%s(%r)" % (type(self).__name__, list(self.coeffs))


def evaluate(f: Polynomial, z: Any) -> Scalar:
    # np.polyval is Horner's scheme over descending coefficients.
    return complex(np.polyval(f.array()[::-1], as_scalar(z)))


def from_roots(leading: Any, roots: Sequence[Any]) -> Polynomial:
    leading = as_scalar(leading)
    if leading == 0:
        raise ValueError("The leading coefficient must be nonzero")
    monic_desc = np.atleast_1d(np.poly(np.asarray(roots, dtype=np.complex128)))
    return Polynomial(leading * monic_desc.astype(np.complex128)[::-1])


def elementary_symmetric_all(values: Sequence[Any]) -> List[Scalar]:
    """Return [σ_0, σ_1, ..., σ_n] of ``values``.

    Built by expanding the product of (1 + z_j t) one factor at a time,
    which costs O(n^2) instead of enumerating subsets.
    """
    sigma = [1 + 0j] + [0j] * len(values)
    for j, z in enumerate(values, start=1):
        z = as_scalar(z)
        for k in range(j, 0, -1):
            sigma[k] += z * sigma[k - 1]
    return sigma


def elementary_symmetric(k: int, values: Sequence[Any]) -> Scalar:
    if not (0 <= k <= len(values)):
        raise ValueError(
            "k must be within [0;%s] for %s values, got %s" % (len(values), len(values), k)
        )
    sigma = [1 + 0j] + [0j] * k
    for j, z in enumerate(values, start=1):
        z = as_scalar(z)
        for i in range(min(j, k), 0, -1):
            sigma[i] += z * sigma[i - 1]
    return sigma[k]


def viete_coefficients(roots: Sequence[Any], leading: Any) -> Polynomial:
    leading = as_scalar(leading)
    if leading == 0:
        raise ValueError("The leading coefficient must be nonzero")
    n = len(roots)
    sigma = elementary_symmetric_all(roots)
    return Polynomial(
        leading * (-1) ** (n - i) * sigma[n - i] for i in range(n + 1)
    )


def deflation_map(coeffs: Sequence[Any], v: Any) -> List[Scalar]:
    """Closed-form deflation φ_i(u_0..u_i, v) = -(1/v^(i+1)) Σ_{k<=i} u_k v^k
    for i = 0..n-1, where n = len(coeffs) - 1. Defined for any v != 0."""
    v = as_scalar(v)
    if v == 0:
        raise ValueError("The deflation point must be nonzero")
    u = [as_scalar(c) for c in coeffs]
    result = []
    for i in range(len(u) - 1):
        partial = sum(u[k] * v**k for k in range(i + 1))
        result.append(-partial / v ** (i + 1))
    return result


def synthetic_quotient(coeffs: Sequence[Any], zeta: Any) -> List[Scalar]:
    """Quotient of the division of Σ a_i z^i by (z - zeta), remainder dropped."""
    zeta = as_scalar(zeta)
    a = [as_scalar(c) for c in coeffs]
    n = len(a) - 1
    if n < 1:
        raise ValueError("Cannot deflate a constant polynomial")
    quotient = [0j] * n
    if abs(zeta) >= 1:
        # Low-end recurrence: errors are damped by 1/abs(zeta) per step.
        quotient[0] = -a[0] / zeta
        for i in range(1, n):
            quotient[i] = -(a[i] - quotient[i - 1]) / zeta
    else:
        # High-end synthetic division: errors are damped by abs(zeta) per step.
        quotient[n - 1] = a[n]
        for i in range(n - 1, 0, -1):
            quotient[i - 1] = a[i] + zeta * quotient[i]
    return quotient


def deflate(f: Polynomial, zeta: Any) -> Polynomial:
    zeta = as_scalar(zeta)
    if zeta == 0:
        raise ValueError("Deflation needs a nonzero root")
    if f.degree < 1:
        raise ValueError("Cannot deflate a constant polynomial")
    residual = abs(evaluate(f, zeta))
    threshold = (
        DEFLATION_RESIDUAL_TOL * f.max_abs_coeff() * max(1.0, abs(zeta)) ** f.degree
    )
    if residual > threshold:
        raise ResidualError(residual, threshold)
    quotient = synthetic_quotient(f.coeffs, zeta)
    # The quotient's leading coefficient is a_n by construction.
    quotient[-1] = f.leading
    return Polynomial(quotient)


def max_coefficient_deviation(f: Polynomial, g: Polynomial) -> float:
    require_same_degree(f, g)
    return max(abs(b - a) for a, b in zip(f.coeffs, g.coeffs))


def is_scalar_multiple(f: Polynomial, g: Polynomial, tol: float) -> Optional[Scalar]:
    require_same_degree(f, g)
    c = g.leading / f.leading
    deviation = max(abs(b - c * a) for a, b in zip(f.coeffs, g.coeffs))
    if deviation <= tol * g.max_abs_coeff():
        return c
    return None


def require_same_degree(f: Polynomial, g: Polynomial) -> None:
    if f.degree != g.degree:
        raise ValueError(
            "Polynomials must have the same degree, got %s and %s"
            % (f.degree, g.degree)
        )
