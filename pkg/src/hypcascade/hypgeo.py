"""Poincare half-plane and disk primitives.

Points of the upper half-plane are kept as plain ``(x, y)`` pairs, points of
the unit disk as ``(u, v)`` pairs.  Orientation-preserving isometries are
real 2x2 matrices of determinant one acting by Moebius transformations
``z -> (a z + b) / (c z + d)``; they double as particle frames (a base point
``g(i)`` plus a unit heading ``g'(i)``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

__all__ = [
    "DomainError", "CartesianPoint", "HyperbolicPolar", "DiskPoint",
    "GeodesicImage", "LineImage", "Isometry", "IDENTITY", "ORIGIN",
    "to_polar", "from_polar", "cosh_dist_origin", "cosh_dist", "pythagoras",
    "carnot", "halfplane_to_disk", "disk_to_halfplane", "geodesic_image",
    "translation", "rotation", "polar_frame", "frame_translate", "frame_turn_orthogonal",
    "frame_radial", "frame_points",
]


class DomainError(ValueError):
    """Input outside the domain of a geometric map."""


class CartesianPoint(NamedTuple):
    x: float
    y: float


class HyperbolicPolar(NamedTuple):
    eta: float
    alpha: float


class DiskPoint(NamedTuple):
    u: float
    v: float


class GeodesicImage(NamedTuple):
    center: tuple[float, float]
    radius: float


class LineImage(NamedTuple):
    """Image of a geodesic through O: a diameter of the disk."""
    p: tuple[float, float]
    q: tuple[float, float]


ORIGIN = CartesianPoint(0.0, 1.0)


def _check_halfplane(x, y):
    if not (math.isfinite(x) and math.isfinite(y)):
        raise DomainError(f"non-finite point ({x}, {y})")
    if y <= 0:
        raise DomainError(f"point ({x}, {y}) is not in the upper half-plane")


def cosh_dist_origin(p) -> float:
    """cosh of the hyperbolic distance between ``p`` and O = (0, 1)."""
    x, y = p
    _check_halfplane(x, y)
    return (x * x + y * y + 1.0) / (2.0 * y)


def cosh_dist(p, q) -> float:
    x1, y1 = p
    x2, y2 = q
    _check_halfplane(x1, y1)
    _check_halfplane(x2, y2)
    return 1.0 + ((x1 - x2) ** 2 + (y1 - y2) ** 2) / (2.0 * y1 * y2)


def to_polar(p) -> HyperbolicPolar:
    """Hyperbolic polar coordinates (distance from O, launch angle at O).

    The angle is the polar angle of the disk image, so it satisfies
    ``tan(alpha) = (x^2 + y^2 - 1) / (2x)`` and lies in [-pi/2, pi/2] for
    x >= 0; points with x < 0 get angles beyond +-pi/2.  On the vertical
    axis alpha is +pi/2 above O and -pi/2 below; at O it is 0.
    """
    x, y = p
    _check_halfplane(x, y)
    # cosh(eta) - 1 = (x^2 + (y-1)^2) / (2y), free of cancellation
    eta = 2.0 * math.asinh(math.hypot(x, y - 1.0) / (2.0 * math.sqrt(y)))
    if eta == 0.0:
        return HyperbolicPolar(0.0, 0.0)
    if x == 0.0:
        return HyperbolicPolar(eta, math.copysign(math.pi / 2, y - 1.0))
    alpha = math.atan2(x * x + y * y - 1.0, 2.0 * x)
    return HyperbolicPolar(eta, alpha)


def from_polar(q) -> CartesianPoint:
    eta, alpha = q
    if not (math.isfinite(eta) and math.isfinite(alpha)) or eta < 0:
        raise DomainError(f"invalid polar coordinates ({eta}, {alpha})")
    sh = math.sinh(eta)
    # cosh - sinh*sin(alpha) = e^-eta + sinh*(1 - sin(alpha))
    den = math.exp(-eta) + sh * 2.0 * math.sin(math.pi / 4 - alpha / 2) ** 2
    if den < 1e-300:
        raise OverflowError("point too close to the boundary to represent")
    return CartesianPoint(sh * math.cos(alpha) / den, 1.0 / den)


def _arccosh_from_excess(excess):
    # eta from cosh(eta) - 1, accurate for small eta
    return 2.0 * math.asinh(math.sqrt(excess / 2.0))


def pythagoras(eta1: float, eta2: float) -> float:
    """Hypotenuse of a right triangle with legs ``eta1`` and ``eta2``."""
    if eta1 < 0 or eta2 < 0 or not (math.isfinite(eta1) and math.isfinite(eta2)):
        raise DomainError("legs must be finite and non-negative")
    # fixed argument order makes the result exactly symmetric
    eta1, eta2 = sorted((eta1, eta2))
    if eta1 + eta2 > 600.0:
        # log cosh(eta) = log cosh(eta1) + log cosh(eta2); cosh(eta) ~ e^eta/2
        lc = _log_cosh(eta1) + _log_cosh(eta2)
        return lc + math.log1p(math.sqrt(-math.expm1(-2.0 * lc)))
    s1 = math.sinh(eta1 / 2)
    s2 = math.sinh(eta2 / 2)
    excess = 2.0 * s1 * s1 * math.cosh(eta2) + 2.0 * s2 * s2
    return _arccosh_from_excess(excess)


def carnot(eta1: float, eta2: float, alpha1: float, alpha2: float) -> float:
    """Third side of a triangle with sides ``eta1``, ``eta2`` at angle alpha1 - alpha2."""
    if eta1 < 0 or eta2 < 0:
        raise DomainError("sides must be non-negative")
    sd = math.sinh((eta1 - eta2) / 2)
    sa = math.sin((alpha1 - alpha2) / 2)
    excess = 2.0 * sd * sd + 2.0 * math.sinh(eta1) * math.sinh(eta2) * sa * sa
    return _arccosh_from_excess(excess)


def _log_cosh(x):
    x = abs(x)
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


def halfplane_to_disk(p, cayley: bool = False) -> DiskPoint:
    """Map w = (iz + 1)/(z + i) onto the unit disk.

    With ``cayley=True`` the Cayley map w = (i - z)/(i + z) is used instead;
    both send O to the center.
    """
    x, y = p
    if y < 0:
        raise DomainError("point below the real axis")
    if cayley:
        w = (1j - complex(x, y)) / (1j + complex(x, y))
        return DiskPoint(w.real, w.imag)
    den = x * x + (y + 1.0) ** 2
    return DiskPoint(2.0 * x / den, (x * x + y * y - 1.0) / den)


def disk_to_halfplane(q, cayley: bool = False) -> CartesianPoint:
    u, v = q
    r2 = u * u + v * v
    if not r2 < 1.0:
        raise DomainError(f"({u}, {v}) is not inside the unit disk")
    if cayley:
        w = complex(u, v)
        z = 1j * (1 - w) / (1 + w)
        return CartesianPoint(z.real, z.imag)
    den = u * u + (1.0 - v) ** 2
    return CartesianPoint(2.0 * u / den, (1.0 - r2) / den)


def geodesic_image(x0: float, r: float) -> Union[GeodesicImage, LineImage]:
    """Disk image of the half-circle of radius ``r`` centered at ``(x0, 0)``.

    Geodesics through O become diameters and are returned as a
    :class:`LineImage` holding the two boundary endpoints.
    """
    if not r > 0:
        raise DomainError("radius must be positive")
    s = x0 * x0 - r * r
    den = s + 1.0
    if abs(den) <= 1e-14 * max(1.0, x0 * x0 + r * r):
        ends = [halfplane_to_disk((x0 - r, 0.0)), halfplane_to_disk((x0 + r, 0.0))]
        return LineImage(tuple(ends[0]), tuple(ends[1]))
    center = (2.0 * x0 / den, (s - 1.0) / den)
    return GeodesicImage(center, 2.0 * r / abs(den))


@dataclass(frozen=True)
class Isometry:
    """Element of PSL(2, R); ``g(i)`` is the base point, ``g'(i)`` the heading."""
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        # rounding noise of ad - bc grows with the size of the entries
        noise = 8 * 2.0 ** -52 * (abs(self.a * self.d) + abs(self.b * self.c))
        if not math.isfinite(det) or det <= -noise or (det <= 0 and noise == 0):
            raise DomainError(f"determinant {det} is not positive")
        # renormalize only when det is trustworthy (moderate entries) and off
        # by more than 1e-12; stored frames then reload bit for bit
        if noise < 1e-13 and abs(det - 1.0) > 1e-12:
            k = 1.0 / math.sqrt(det)
            object.__setattr__(self, "a", self.a * k)
            object.__setattr__(self, "b", self.b * k)
            object.__setattr__(self, "c", self.c * k)
            object.__setattr__(self, "d", self.d * k)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __call__(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply(self, p) -> CartesianPoint:
        w = self(complex(p[0], p[1]))
        return CartesianPoint(w.real, w.imag)

    def inverse(self) -> "Isometry":
        return Isometry(self.d, -self.b, -self.c, self.a)

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def base_point(self) -> CartesianPoint:
        # g(i) for det 1, free of the cancellation in ad - bc
        n = self.c * self.c + self.d * self.d
        return CartesianPoint((self.a * self.c + self.b * self.d) / n, 1.0 / n)

    def heading(self) -> float:
        """Euclidean direction angle of the forward axis at the base point."""
        return -2.0 * math.atan2(self.c, self.d)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def allclose(self, other: "Isometry", atol: float = 1e-10) -> bool:
        m, n = self.matrix(), other.matrix()
        return bool(np.allclose(m, n, rtol=0, atol=atol) or np.allclose(m, -n, rtol=0, atol=atol))


IDENTITY = Isometry(1.0, 0.0, 0.0, 1.0)


def translation(distance: float) -> Isometry:
    """Hyperbolic translation by ``distance`` along the unit half-circle.

    Sends O to (tanh d, sech d); the heading at O points to +x.
    """
    h = distance / 2.0
    ch, sh = math.cosh(h), math.sinh(h)
    return Isometry(ch, sh, sh, ch)


def rotation(angle: float) -> Isometry:
    """Counterclockwise rotation about O by ``angle``."""
    h = angle / 2.0
    co, si = math.cos(h), math.sin(h)
    return Isometry(co, si, 0.0 - si, co)


def polar_frame(theta: float, eta: float, phi: float = 0.0) -> Isometry:
    """``rotation(theta) @ translation(eta) @ rotation(phi)``.

    The product is expanded in e^{+-eta/2}, so each entry is a sum of one
    large and one small term and large ``eta`` loses no precision to
    cancellation.  The base point lies at disk polar angle ``theta`` and
    distance ``eta``.
    """
    p = math.sqrt(2.0) * math.sin(theta / 2 + math.pi / 4)
    q = math.sqrt(2.0) * math.cos(theta / 2 + math.pi / 4)
    u = math.sqrt(2.0) * math.cos(phi / 2 + math.pi / 4)
    v = math.sqrt(2.0) * math.sin(phi / 2 + math.pi / 4)
    ep, em = 0.5 * math.exp(eta / 2), 0.5 * math.exp(-eta / 2)
    # + 0.0 turns exact negative zeros positive
    return Isometry(ep * p * u + em * q * v + 0.0, ep * p * v - em * q * u + 0.0,
                    ep * q * u - em * p * v + 0.0, ep * q * v + em * p * u + 0.0)


def frame_translate(f: Isometry, distance: float) -> Isometry:
    return f @ translation(distance)


def frame_turn_orthogonal(f: Isometry, side: int) -> Isometry:
    """Rotate the forward axis by ``side * pi/2`` (+1 left, -1 right)."""
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    return f @ rotation(side * math.pi / 2)


def frame_radial(f: Isometry) -> Isometry:
    """Re-aim ``f`` along the outward geodesic from O through its base point.

    The base point is kept; at O itself the frame is returned unchanged.
    """
    p = f.base_point()
    eta, _ = to_polar(p)
    if eta == 0.0:
        return f
    u, v = halfplane_to_disk(p)
    radial = rotation(math.atan2(v, u)) @ translation(eta)
    return f @ rotation(radial.heading() - f.heading())


def frame_points(f: Isometry, distances) -> np.ndarray:
    """Half-plane points reached from ``f`` after the given forward distances.

    Returns an ``(m, 2)`` array.
    """
    d = np.asarray(distances, dtype=float)
    ch, sh = np.cosh(d / 2), np.sinh(d / 2)
    # base points of f @ translation(d), entry by entry
    a = f.a * ch + f.b * sh
    b = f.a * sh + f.b * ch
    c = f.c * ch + f.d * sh
    dd = f.c * sh + f.d * ch
    n = c * c + dd * dd
    return np.column_stack([(a * c + b * dd) / n, 1.0 / n])
