"""Test-side measurements on finished runs, kept apart from the engine."""

from fractions import Fraction


def first_touch(traj, seg):
    """Earliest time a piecewise-linear trajectory meets an axis-aligned segment, or None."""
    (a, b) = seg
    lo = (min(a[0], b[0]), min(a[1], b[1]))
    hi = (max(a[0], b[0]), max(a[1], b[1]))
    for (t0, p0), (t1, p1) in zip(traj, traj[1:]):
        L = abs(p1[0] - p0[0]) + abs(p1[1] - p0[1])
        if L == 0:
            if lo[0] <= p0[0] <= hi[0] and lo[1] <= p0[1] <= hi[1]:
                return t0
            continue
        ux, uy = (p1[0] - p0[0]) / L, (p1[1] - p0[1]) / L
        smin, smax = Fraction(0), L
        ok = True
        for c, u, l, h in ((p0[0], ux, lo[0], hi[0]), (p0[1], uy, lo[1], hi[1])):
            if u == 0:
                ok &= l <= c <= h
            else:
                s1, s2 = sorted(((l - c) / u, (h - c) / u))
                smin, smax = max(smin, s1), min(smax, s2)
        if ok and smin <= smax:
            return t0 + (t1 - t0) * smin / L
    return None


def is_rotation_of_sorted(keys) -> bool:
    """True when keys are sorted up to a cyclic shift."""
    desc = sum(1 for a, b in zip(keys, keys[1:]) if b < a)
    return desc == 0 or (desc == 1 and keys[-1] <= keys[0])


def clockwise_visit_keys(world, result, extensions):
    """Clockwise keys of the extensions' hidden sides, in first-touch order (p=1)."""
    traj = result.trajectories[0]
    times = [first_touch(traj, e.segment) for e in extensions]
    if None in times:
        return None
    order = sorted(range(len(extensions)), key=lambda j: times[j])
    return [world.cw.of_point(extensions[j].hidden_midpoint) for j in order]
