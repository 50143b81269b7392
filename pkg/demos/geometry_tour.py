"""A few facts about the half-plane that the simulator relies on."""
import math

from hypcascade import hypgeo

# polar coordinates about O = (0, 1)
p = (0.8, 0.5)
eta, alpha = hypgeo.to_polar(p)
print("point", p, "-> eta", eta, "alpha", alpha, "-> back", hypgeo.from_polar((eta, alpha)))
print("cosh eta", math.cosh(eta), "==", hypgeo.cosh_dist_origin(p))

# right triangles multiply cosh of the legs
a, b = 1.2, 0.7
print("pythagoras", hypgeo.pythagoras(a, b), "carnot at 90 deg", hypgeo.carnot(a, b, math.pi / 2, 0.0))

# a frame is an isometry; moving along its axis and turning is matrix algebra
f = hypgeo.translation(a)
g = hypgeo.frame_translate(hypgeo.frame_turn_orthogonal(f, 1), b)
print("after run, turn, run:", hypgeo.cosh_dist_origin(g.base_point()), "==", math.cosh(a) * math.cosh(b))

# the same point in the unit disk; geodesics become circles orthogonal to the boundary
w = hypgeo.halfplane_to_disk(p)
print("disk image", w, "norm", math.hypot(*w))
img = hypgeo.geodesic_image(2.0, 1.5)
(u, v), r = img
print("geodesic circle center", (u, v), "radius", r, "|center|^2 - r^2 =", u * u + v * v - r * r)
