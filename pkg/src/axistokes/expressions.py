"""Small arithmetic expression language for data given on the command line.

Body force components can be written as formulas in the cylindrical
coordinates, e.g. ``sin(theta)*r^2 + z/2``.  The grammar is numbers, the
names r, z, theta and pi, the operators + - * / ^ with unary minus, the
functions sin, cos, exp, and parentheses.  Expressions are parsed through
the Python ast module and checked against a whitelist, so nothing outside
this grammar evaluates: no attributes, no subscripts, no other names.

Compiled expressions evaluate vectorized over numpy arrays.  A field
made of three component expressions can produce per-wavenumber mode
coefficients by angular sampling and FFT, which is how expression data
enters the per-mode solver.
"""

import ast

import numpy as np

from .fields import FnMode
from .fourier import angular_grid, min_angular_samples

__all__ = [
    "ExpressionError",
    "compile_expression",
    "ExpressionField",
    "ScalarExpressionField",
]

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_NAMES = ("r", "z", "theta")

_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_ALLOWED_UNARY = (ast.USub, ast.UAdd)


class ExpressionError(ValueError):
    """The expression does not fit the supported grammar."""


def _check(node, source: str):
    if isinstance(node, ast.Expression):
        _check(node.body, source)
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, _ALLOWED_BINOPS):
            raise ExpressionError(f"operator not supported in {source!r}")
        _check(node.left, source)
        _check(node.right, source)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _ALLOWED_UNARY):
            raise ExpressionError(f"unary operator not supported in {source!r}")
        _check(node.operand, source)
    elif isinstance(node, ast.Call):
        if (
            not isinstance(node.func, ast.Name)
            or node.func.id not in _FUNCTIONS
            or node.keywords
            or len(node.args) != 1
        ):
            raise ExpressionError(
                f"only sin, cos, exp with one argument are allowed in {source!r}"
            )
        _check(node.args[0], source)
    elif isinstance(node, ast.Name):
        if node.id not in _NAMES and node.id != "pi":
            raise ExpressionError(f"unknown name {node.id!r} in {source!r}")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ExpressionError(f"only numeric constants are allowed in {source!r}")
    else:
        raise ExpressionError(
            f"unsupported syntax ({type(node).__name__}) in {source!r}"
        )


def compile_expression(source: str):
    """Compile a formula in r, z, theta into a vectorized function.

    Returns a callable f(r, z, theta) broadcasting over arrays.  Raises
    ExpressionError when the formula leaves the supported grammar.
    """
    text = source.strip().replace("^", "**")
    if not text:
        raise ExpressionError("empty expression")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {source!r}: {exc.msg}") from exc
    _check(tree, source)
    code = compile(tree, "<expression>", "eval")
    namespace = {"pi": np.pi, **_FUNCTIONS}

    def evaluate(r, z, theta=0.0):
        env = dict(namespace)
        env.update(r=np.asarray(r), z=np.asarray(z), theta=np.asarray(theta))
        return np.asarray(eval(code, {"__builtins__": {}}, env), dtype=complex)

    evaluate.source = source
    return evaluate


def _angular_grid_for(k_max: int, n_theta):
    n = n_theta or min_angular_samples(k_max)
    if n < 4 * abs(k_max) + 2:
        raise ExpressionError(
            f"n_theta = {n} cannot resolve mode {k_max}; "
            f"need at least {4 * abs(k_max) + 2}"
        )
    return angular_grid(n)


def _mode_coefficient(fn, k: int, thetas: np.ndarray):
    """Mode-k coefficient function of one compiled expression."""
    n = thetas.size
    scale = np.sqrt(2.0 * np.pi) / n
    phase = np.exp(-1j * k * thetas)

    def coefficient(r, z):
        r = np.asarray(r, dtype=float)
        z = np.asarray(z, dtype=float)
        vals = fn(r[..., None], z[..., None], thetas)
        vals = np.broadcast_to(vals, r.shape + thetas.shape)
        return scale * np.sum(vals * phase, axis=-1)

    return FnMode(coefficient)


def _all_real(fns) -> bool:
    r = np.linspace(0.1, 0.9, 5)
    z = np.linspace(0.1, 0.9, 5)
    thetas = angular_grid(16)
    for fn in fns:
        vals = fn(r[:, None], z[:, None], thetas)
        if np.max(np.abs(np.asarray(vals).imag)) > 0.0:
            return False
    return True


class ExpressionField:
    """Vector field with cylindrical components given as formulas.

    Components are functions of (r, z, theta); mode coefficients come from
    equispaced angular sampling and the FFT, with the sample count chosen
    to rule out aliasing up to the requested wavenumber.
    """

    def __init__(self, fr: str, ftheta: str, fz: str, n_theta: int = None):
        self.sources = (fr, ftheta, fz)
        self.fns = tuple(compile_expression(s) for s in self.sources)
        self.n_theta = n_theta

    def mode(self, k: int):
        """Mode-k coefficient functions of the three components."""
        thetas = _angular_grid_for(abs(k), self.n_theta)
        return tuple(_mode_coefficient(fn, k, thetas) for fn in self.fns)

    def is_real(self) -> bool:
        """Whether the sampled data is real, deciding conjugation symmetry."""
        return _all_real(self.fns)


class ScalarExpressionField:
    """Scalar field given as one formula in (r, z, theta).

    Same angular sampling contract as ExpressionField; used for prescribed
    divergence data.
    """

    def __init__(self, source: str, n_theta: int = None):
        self.source = source
        self.fn = compile_expression(source)
        self.n_theta = n_theta

    def mode(self, k: int):
        thetas = _angular_grid_for(abs(k), self.n_theta)
        return _mode_coefficient(self.fn, k, thetas)

    def is_real(self) -> bool:
        return _all_real((self.fn,))
