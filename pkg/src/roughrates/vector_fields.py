"""Vector fields V_1..V_d on R^e and their iterated directional derivatives.

For a word (i_1, ..., i_n) the derivative is 𝒱_{i_1} ... 𝒱_{i_{n-1}} V_{i_n}
with 𝒱_i = Σ_k V_i^k ∂_k, i.e. the earliest letter is the outermost operator.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
import sympy as sp

from .errors import ContractError


def _words(d: int, n: int):
    return list(itertools.product(range(d), repeat=n))


class VectorFieldSet:
    """Base class; subclasses implement ``__call__`` and ``derivative``."""

    d: int
    e: int
    max_order: int

    def __call__(self, y) -> np.ndarray:
        """Field values, shape (..., d, e)."""
        raise NotImplementedError

    def derivative(self, word, y) -> np.ndarray:
        """𝒱_{w_1}...V_{w_n}(y) for a 0-based word; shape (..., e)."""
        raise NotImplementedError

    def _check_order(self, n: int):
        if n > self.max_order:
            raise ContractError(f"derivatives of order {n} requested, fields provide {self.max_order}")

    def derivative_tensor(self, n: int, y) -> np.ndarray:
        """All order-n derivatives, shape (..., d, ..., d, e) with n word axes."""
        self._check_order(n)
        y = np.asarray(y, dtype=float)
        vals = [self.derivative(w, y) for w in _words(self.d, n)]
        out = np.stack(vals, axis=-2)
        return out.reshape(y.shape[:-1] + (self.d,) * n + (self.e,))

    def drift(self, y, dx) -> np.ndarray:
        """Σ_i V_i(y) dx^i."""
        return np.einsum("...de,...d->...e", self(y), dx)


class ZeroVectorFields(VectorFieldSet):
    def __init__(self, d: int, e: int):
        self.d, self.e, self.max_order = d, e, 10**6

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.zeros(y.shape[:-1] + (self.d, self.e))

    def derivative(self, word, y):
        self._check_order(len(word))
        return np.zeros_like(np.asarray(y, dtype=float))


class LinearVectorFields(VectorFieldSet):
    """V_i(y) = A_i y, with derivative A_{w_n} ... A_{w_1} y for word w."""

    def __init__(self, A):
        A = np.array(A, dtype=float)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ContractError("A must have shape (d, e, e)")
        A.setflags(write=False)
        self.A = A
        self.d, self.e = A.shape[0], A.shape[1]
        self.max_order = 10**6

    def __call__(self, y):
        return np.einsum("dij,...j->...di", self.A, np.asarray(y, dtype=float))

    def derivative(self, word, y):
        self._check_order(len(word))
        out = np.asarray(y, dtype=float)
        for i in word:
            out = np.einsum("ij,...j->...i", self.A[i], out)
        return out


class SymbolicVectorFields(VectorFieldSet):
    """Fields given as sympy expressions in ``symbols``; exact derivatives."""

    def __init__(self, exprs, symbols, max_order: int = 5):
        self.symbols = tuple(symbols)
        self.exprs = tuple(tuple(sp.sympify(c) for c in v) for v in exprs)
        self.d, self.e = len(self.exprs), len(self.symbols)
        if any(len(v) != self.e for v in self.exprs):
            raise ContractError("each field needs one expression per state coordinate")
        self.max_order = max_order
        self._sym_cache = {}
        self._fn_cache = {}

    def symbolic(self, word) -> tuple:
        word = tuple(word)
        if word in self._sym_cache:
            return self._sym_cache[word]
        if len(word) == 1:
            out = self.exprs[word[0]]
        else:
            inner = sp.Matrix(self.symbolic(word[1:]))
            v = sp.Matrix(self.exprs[word[0]])
            out = tuple(inner.jacobian(self.symbols) * v)
        self._sym_cache[word] = out
        return out

    def _level_fn(self, n: int):
        if n not in self._fn_cache:
            flat = [c for w in _words(self.d, n) for c in self.symbolic(w)]
            self._fn_cache[n] = sp.lambdify(self.symbols, flat, modules="numpy", cse=True)
        return self._fn_cache[n]

    def _eval(self, n: int, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        vals = self._level_fn(n)(*np.moveaxis(y, -1, 0))
        vals = [np.broadcast_to(np.asarray(v, dtype=float), y.shape[:-1]) for v in vals]
        return np.stack(vals, axis=-1).reshape(y.shape[:-1] + (self.d,) * n + (self.e,))

    def __call__(self, y):
        return self._eval(1, y)

    def derivative_tensor(self, n: int, y):
        self._check_order(n)
        return self._eval(n, y)

    def derivative(self, word, y):
        self._check_order(len(word))
        t = self._eval(len(word), y)
        return t[(Ellipsis,) + tuple(word) + (slice(None),)]

    def conjugate(self, M, c) -> SymbolicVectorFields:
        """Fields in coordinates z with y = M z + c: Ṽ_i(z) = M^{-1} V_i(M z + c)."""
        M = sp.Matrix(M)
        c = sp.Matrix(c)
        z = sp.Matrix(self.symbols)
        sub = dict(zip(self.symbols, list(M * z + c)))
        Minv = M.inv()
        new = [tuple(Minv * sp.Matrix([ex.xreplace(sub) for ex in v])) for v in self.exprs]
        return SymbolicVectorFields(new, self.symbols, self.max_order)


class FiniteDifferenceVectorFields(VectorFieldSet):
    """Derivatives by nested central differences along V_i; orders <= 3."""

    MAX_FD_ORDER = 3

    def __init__(self, func, d: int, e: int, h: float = 1e-4):
        self.func, self.d, self.e, self.h = func, d, e, h
        self.max_order = self.MAX_FD_ORDER

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.asarray(self.func(y), dtype=float).reshape(y.shape[:-1] + (self.d, self.e))

    def derivative(self, word, y):
        word = tuple(word)
        if len(word) > self.MAX_FD_ORDER:
            raise ContractError("finite-difference derivatives are limited to order 3")
        self._check_order(len(word))
        y = np.asarray(y, dtype=float)
        if len(word) == 1:
            return self(y)[..., word[0], :]
        v = self(y)[..., word[0], :]
        hi = self.derivative(word[1:], y + self.h * v)
        lo = self.derivative(word[1:], y - self.h * v)
        return (hi - lo) / (2 * self.h)


def _sigmoid(u):
    return 1 / (1 + sp.exp(-u))


@lru_cache(maxsize=None)
def preset(name: str) -> VectorFieldSet:
    """Shipped fields: ``linear``, ``nonlinear`` (bounded, smooth, e = d = 2) and ``zero``."""
    if name == "linear":
        return LinearVectorFields([[[0.0, 0.5], [-0.5, 0.2]], [[0.3, 0.0], [0.4, -0.2]]])
    if name == "nonlinear":
        y1, y2 = sp.symbols("y1 y2")
        return SymbolicVectorFields(
            [(sp.cos(y2), _sigmoid(y1)), (_sigmoid(y2), sp.sin(y1))],
            (y1, y2),
            max_order=5,
        )
    if name == "zero":
        return ZeroVectorFields(2, 2)
    raise ContractError(f"unknown preset {name!r}")


PRESETS = ("linear", "nonlinear", "zero")
