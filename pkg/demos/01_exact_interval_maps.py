"""
Exact interval maps, towers, and periodic approximation
=======================================================

Everything in randlab happens at finite dyadic resolution: level n cuts
[0, 1) into 2**n translation blocks, a transformation is a permutation of
those blocks, and every measure is a Fraction.  This walkthrough builds a
few maps, measures their distances three ways, then runs the tower
machinery that powers all later constructions.
"""

from fractions import Fraction as F

from randlab import (
    DyadicMPT,
    delta_u,
    delta_u_prime,
    delta_w,
    mpt_conjugate_match,
    periodic_approximation,
    rokhlin_tower,
)

# %% A rotation by one block at level 3 is a single 8-cycle.

rot = DyadicMPT.shift(3)
print("rotation:", rot.perm)
print("cycle census:", rot.cycle_census())
print("point 1/16 maps to", rot.apply_point(F(1, 16)))

# %% Three distances between the rotation and the identity. The uniform
# distance counts moved mass; the sup-displacement distance maximizes the
# measure of T(A) ^ A over all measurable A; the weak distance weights
# set displacements across every dyadic box.

ident = DyadicMPT.identity(3)
print("delta_u      =", delta_u(rot, ident))
print("delta_u_prime =", delta_u_prime(rot, ident))
print("delta_w      =", delta_w(rot, ident))

# %% A height-4 tower over the rotation: mark every 4th block along the
# cycle. 8 = 2 * 4, so two columns, no leftover.

tower = rokhlin_tower(rot, 4, F(0))
print("columns:", sorted(tower.base.members))
print("leftover measure:", tower.leftover.measure)

# %% Periodic approximation redirects each column's top back to its base.
# The result has every cycle of length exactly 4 and sits at uniform
# distance exactly (number of columns) / 8 from the rotation.

pa = periodic_approximation(rot, 4, F(0))
print("approximation cycles:", pa.s0.cycle_census())
print("distance:", pa.distance)
print("extended tower covers:", pa.exact_tower.covered().measure)

# %% Approximate conjugacy: two full cycles at the same level have the
# same cycle type, so they are exactly conjugate; mismatched types go
# through the periodic approximations and the distance is reported exactly.

other = DyadicMPT.shift(3, 3)  # step-3 rotation, still one 8-cycle
match = mpt_conjugate_match(rot, other, F(1, 4))
print("conjugation distance:", match.achieved)
conj = rot.conj(match.r)
print("conjugated equals target:", conj.same_map(other))
