"""Closed-form Fourier coefficient functions on the meridian domain.

A "mode function" is a complex-valued function of (r, z) together with its
first partial derivatives.  Polynomials in r and z (with integer, possibly
negative, powers of r) cover every manufactured solution and induced datum
in the package while keeping differentiation exact, so they get a small
dedicated class; arbitrary callables can be wrapped as well.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["Poly2", "FnMode", "VectorModeFn", "as_mode_function"]


class Poly2:
    """Polynomial sum(c[a, b] * r**a * z**b) with complex coefficients.

    Negative powers of r are permitted (they arise in induced momentum
    data near the axis); such terms are only ever evaluated at r > 0.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        cleaned = {}
        for (a, b), c in (coeffs or {}).items():
            c = complex(c)
            if c != 0.0:
                cleaned[(int(a), int(b))] = cleaned.get((int(a), int(b)), 0.0) + c
        self.coeffs = {k: v for k, v in cleaned.items() if v != 0.0}

    @classmethod
    def monomial(cls, a: int, b: int, c=1.0) -> "Poly2":
        return cls({(a, b): c})

    @classmethod
    def zero(cls) -> "Poly2":
        return cls({})

    def __call__(self, r, z):
        r = np.asarray(r, dtype=float)
        z = np.asarray(z, dtype=float)
        out = np.zeros(np.broadcast(r, z).shape, dtype=complex)
        for (a, b), c in self.coeffs.items():
            term = np.ones_like(out, dtype=float)
            if a:
                term = term * r**a
            if b:
                term = term * z**b
            out += c * term
        return out

    def value(self, r, z):
        return self(r, z)

    def d_r(self) -> "Poly2":
        return Poly2({(a - 1, b): a * c for (a, b), c in self.coeffs.items() if a != 0})

    def d_z(self) -> "Poly2":
        return Poly2({(a, b - 1): b * c for (a, b), c in self.coeffs.items() if b != 0})

    def grad_r(self, r, z):
        return self.d_r()(r, z)

    def grad_z(self, r, z):
        return self.d_z()(r, z)

    def div_r(self, n: int = 1) -> "Poly2":
        """Divide by r**n exactly (shifts every r exponent)."""
        return Poly2({(a - n, b): c for (a, b), c in self.coeffs.items()})

    def mul_r(self, n: int = 1) -> "Poly2":
        return Poly2({(a + n, b): c for (a, b), c in self.coeffs.items()})

    def laplace_axi(self) -> "Poly2":
        """Axisymmetric Laplacian (1/r) d_r(r d_r .) + d_z^2 applied exactly."""
        dr = self.d_r()
        return dr.d_r() + dr.div_r() + self.d_z().d_z()

    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out.get(key, 0.0) + c
        return Poly2(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly2({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, Poly2):
            out = {}
            for (a1, b1), c1 in self.coeffs.items():
                for (a2, b2), c2 in other.coeffs.items():
                    key = (a1 + a2, b1 + b2)
                    out[key] = out.get(key, 0.0) + c1 * c2
            return Poly2(out)
        return Poly2({k: complex(other) * c for k, c in self.coeffs.items()})

    __rmul__ = __mul__

    def conj(self) -> "Poly2":
        return Poly2({k: np.conj(c) for k, c in self.coeffs.items()})

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def min_r_power(self) -> int:
        return min((a for a, _ in self.coeffs), default=0)

    def __repr__(self):
        if not self.coeffs:
            return "Poly2(0)"
        parts = [f"({c:g})*r^{a}*z^{b}" for (a, b), c in sorted(self.coeffs.items())]
        return "Poly2(" + " + ".join(parts) + ")"


def _as_poly(x) -> Poly2:
    if isinstance(x, Poly2):
        return x
    return Poly2({(0, 0): complex(x)})


@dataclass(frozen=True)
class FnMode:
    """Mode function from plain callables; derivative callables optional."""

    fn: object
    fn_r: object = None
    fn_z: object = None

    def __call__(self, r, z):
        return np.asarray(self.fn(r, z), dtype=complex)

    def value(self, r, z):
        return self(r, z)

    def grad_r(self, r, z):
        if self.fn_r is None:
            raise ValueError("this mode function has no r-derivative")
        return np.asarray(self.fn_r(r, z), dtype=complex)

    def grad_z(self, r, z):
        if self.fn_z is None:
            raise ValueError("this mode function has no z-derivative")
        return np.asarray(self.fn_z(r, z), dtype=complex)


def as_mode_function(obj):
    """Coerce a Poly2, FnMode, mode-function-like object or callable."""
    if hasattr(obj, "value") and hasattr(obj, "grad_r"):
        return obj
    if callable(obj):
        return FnMode(obj)
    raise TypeError(f"cannot interpret {obj!r} as a mode function")


@dataclass(frozen=True)
class VectorModeFn:
    """Cylindrical-component Fourier coefficient of a 3D vector field.

    Components are the radial, azimuthal and axial coefficient functions
    u_r^k, u_theta^k, u_z^k on the meridian domain.
    """

    k: int
    components: tuple

    def __post_init__(self):
        if len(self.components) != 3:
            raise ValueError("a vector mode has exactly three components")
        object.__setattr__(
            self, "components", tuple(as_mode_function(c) for c in self.components)
        )

    @property
    def c_r(self):
        return self.components[0]

    @property
    def c_theta(self):
        return self.components[1]

    @property
    def c_z(self):
        return self.components[2]

    def conj(self) -> "VectorModeFn":
        comps = []
        for c in self.components:
            if isinstance(c, Poly2):
                comps.append(c.conj())
            else:
                comps.append(_conj_wrap(c))
        return VectorModeFn(-self.k, tuple(comps))


def _conj_wrap(mode):
    # Gradient wrappers raise lazily if the underlying mode has none.
    return FnMode(
        lambda r, z: np.conj(mode.value(r, z)),
        lambda r, z: np.conj(mode.grad_r(r, z)),
        lambda r, z: np.conj(mode.grad_z(r, z)),
    )
