"""Cylinder functionals F(gamma) = g(<psi_1, gamma>, ..., <psi_K, gamma>).

Test fields are finite sums of periodic C2 bumps with analytic gradient and
Laplacian; outer functions act on a single linear form of the field sums so
that their gradient and Hessian are closed-form.
"""
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from .errors import NotSmooth
from .geometry import Configuration, TorusBox


@dataclass(frozen=True)
class Bump:
    """psi(x) = A (1 - |x - c|^2 / rho^2)^3 inside the ball of radius rho."""
    center: Tuple[float, ...]
    radius: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("bump radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def _parts(self, points, box: TorusBox):
        if 2 * self.radius > box.side:
            raise ValueError(f"bump radius {self.radius} exceeds half the box side {box.side}")
        if len(self.center) != box.dim:
            raise ValueError(f"bump center has {len(self.center)} coordinates, box has {box.dim}")
        delta = box.displacement(points, np.asarray(self.center))
        u = np.sum(delta * delta, axis=-1) / self.radius ** 2
        inside = u < 1
        return delta, u, inside

    def value(self, points, box: TorusBox) -> np.ndarray:
        _, u, inside = self._parts(points, box)
        return np.where(inside, self.amplitude * (1 - u) ** 3, 0.0)

    def gradient(self, points, box: TorusBox) -> np.ndarray:
        delta, u, inside = self._parts(points, box)
        scale = np.where(inside, -6.0 * self.amplitude * (1 - u) ** 2 / self.radius ** 2, 0.0)
        return delta * np.expand_dims(scale, -1)

    def laplacian(self, points, box: TorusBox) -> np.ndarray:
        _, u, inside = self._parts(points, box)
        d = box.dim
        return np.where(
            inside,
            -6.0 * self.amplitude / self.radius ** 2 * (1 - u) * ((1 - u) * d - 4 * u),
            0.0,
        )


@dataclass(frozen=True)
class TestField:
    """A finite sum of bumps on the torus."""
    bumps: Tuple[Bump, ...] = ()

    __test__ = False

    @classmethod
    def bump(cls, center: Sequence[float], radius: float, amplitude: float = 1.0) -> "TestField":
        return cls((Bump(tuple(center), radius, amplitude),))

    def _stack(self, points, box: TorusBox, attr: str, trailing: Tuple[int, ...]):
        pts = np.asarray(points, dtype=float)
        out = np.zeros(pts.shape[:-1] + trailing)
        for b in self.bumps:
            out = out + getattr(b, attr)(pts, box)
        return out

    def value(self, points, box: TorusBox) -> np.ndarray:
        return self._stack(points, box, "value", ())

    def gradient(self, points, box: TorusBox) -> np.ndarray:
        return self._stack(points, box, "gradient", (box.dim,))

    def laplacian(self, points, box: TorusBox) -> np.ndarray:
        return self._stack(points, box, "laplacian", ())


# -- outer functions ---------------------------------------------------------

@dataclass(frozen=True)
class OuterFunction:
    """g(t) = f(w . t + offset) for a scalar profile f."""
    weights: Tuple[float, ...] = (1.0,)
    offset: float = 0.0
    kind = "outer"
    twice_differentiable = True

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    def _arg(self, t):
        return np.tensordot(np.asarray(t, dtype=float), np.asarray(self.weights), axes=([-1], [0])) + self.offset

    def f(self, u):
        raise NotImplementedError

    def df(self, u):
        raise NotImplementedError

    def d2f(self, u):
        raise NotSmooth(f"{self.kind} outer function has no second derivative")

    def value(self, t):
        return self.f(self._arg(t))

    def gradient(self, t) -> np.ndarray:
        return self.df(self._arg(t)) * np.asarray(self.weights)

    def hessian(self, t) -> np.ndarray:
        w = np.asarray(self.weights)
        return self.d2f(self._arg(t)) * np.outer(w, w)


@dataclass(frozen=True)
class Exponential(OuterFunction):
    kind = "exp"

    def f(self, u):
        return np.exp(u)

    def df(self, u):
        return np.exp(u)

    def d2f(self, u):
        return np.exp(u)


@dataclass(frozen=True)
class Tanh(OuterFunction):
    kind = "tanh"

    def f(self, u):
        return np.tanh(u)

    def df(self, u):
        return 1.0 - np.tanh(u) ** 2

    def d2f(self, u):
        t = np.tanh(u)
        return -2.0 * t * (1.0 - t * t)


@dataclass(frozen=True)
class Polynomial(OuterFunction):
    """f(u) = sum_k coefficients[k] u^k, degree at most 4."""
    coefficients: Tuple[float, ...] = (0.0, 1.0)
    kind = "poly"

    def __post_init__(self):
        super().__post_init__()
        if len(self.coefficients) > 5:
            raise ValueError("polynomial outer functions have degree at most 4")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    def f(self, u):
        return np.polynomial.polynomial.polyval(u, self.coefficients)

    def df(self, u):
        return np.polynomial.polynomial.polyval(u, np.polynomial.polynomial.polyder(self.coefficients))

    def d2f(self, u):
        return np.polynomial.polynomial.polyval(u, np.polynomial.polynomial.polyder(self.coefficients, 2))


# -- functionals -------------------------------------------------------------

@dataclass(frozen=True)
class CylinderFunctional:
    fields: Tuple[TestField, ...]
    outer: OuterFunction = field(default_factory=Exponential)

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        if len(self.outer.weights) != len(self.fields):
            raise ValueError(
                f"outer function has {len(self.outer.weights)} weights for {len(self.fields)} fields"
            )

    def field_values(self, points, box: TorusBox) -> np.ndarray:
        """psi_k at each point, shape points.shape[:-1] + (K,)."""
        pts = np.asarray(points, dtype=float)
        return np.stack([f.value(pts, box) for f in self.fields], axis=-1)

    def sums(self, config: Configuration) -> np.ndarray:
        if len(config) == 0:
            return np.zeros(len(self.fields))
        return np.sum(self.field_values(config.points, config.box), axis=0)

    def evaluate(self, config: Configuration) -> float:
        return float(self.outer.value(self.sums(config)))

    def evaluate_batch(self, points_batch, box: TorusBox) -> np.ndarray:
        """F for a batch of equally sized point sets, shape (B, N, dim) -> (B,)."""
        values = self.field_values(points_batch, box)
        return self.outer.value(np.sum(values, axis=-2))

    def _shifted(self, config: Configuration, shift) -> np.ndarray:
        # returns g(S + shift) - g(S); shift of zero gives exactly zero
        s = self.sums(config)
        return self.outer.value(s + shift) - self.outer.value(s)

    def d_minus_plus(self, config: Configuration, index: int, y) -> float:
        """F(gamma minus x plus y) - F(gamma) for x = config.point(index)."""
        box = config.box
        shift = self.field_values(box.wrap(y), box) - self.field_values(config.point(index), box)
        return float(self._shifted(config, shift))

    def d_minus_plus_many(self, config: Configuration, index: int, ys) -> np.ndarray:
        box = config.box
        shift = self.field_values(np.asarray(ys, dtype=float), box) - self.field_values(config.point(index), box)
        s = self.sums(config)
        return self.outer.value(s + shift) - self.outer.value(s)

    def d_minus(self, config: Configuration, index: int) -> float:
        """F(gamma minus x) - F(gamma)."""
        return float(self._shifted(config, -self.field_values(config.point(index), config.box)))

    def d_plus(self, config: Configuration, x) -> float:
        """F(gamma plus x) - F(gamma)."""
        return float(self._shifted(config, self.field_values(config.box.wrap(x), config.box)))

    def d_plus_many(self, config: Configuration, xs) -> np.ndarray:
        s = self.sums(config)
        shift = self.field_values(np.asarray(xs, dtype=float), config.box)
        return self.outer.value(s + shift) - self.outer.value(s)

    def point_gradient(self, config: Configuration, index: int) -> np.ndarray:
        """grad_x F = sum_k dg/dt_k grad psi_k(x)."""
        box = config.box
        x = config.point(index)
        dg = self.outer.gradient(self.sums(config))
        grads = np.stack([f.gradient(x, box) for f in self.fields])
        return dg @ grads

    def point_laplacian(self, config: Configuration, index: int) -> float:
        """Laplacian in x of F(gamma minus x plus y) at y = x."""
        box = config.box
        x = config.point(index)
        s = self.sums(config)
        dg = self.outer.gradient(s)
        hess = self.outer.hessian(s)
        grads = np.stack([f.gradient(x, box) for f in self.fields])
        laps = np.array([f.laplacian(x, box) for f in self.fields])
        return float(dg @ laps + np.sum(hess * (grads @ grads.T)))
