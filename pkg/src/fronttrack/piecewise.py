"""Exact piecewise-linear machinery shared by the whole package.

Monotone piecewise-linear curves (continuous or with jumps), their
generalized inverses, convex envelopes, and exact integrals of
piecewise-linear-with-jump profiles.  Every routine here works on knot
arithmetic in double precision; nothing is sampled or quadratured.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Knot abscissae closer than this are considered coincident and merged.
KNOT_ATOL = 1e-14


def _as_array(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def dedup_knots(x: np.ndarray, y: np.ndarray, atol: float = KNOT_ATOL):
    """Drop consecutive points whose abscissae coincide within ``atol``.

    The first point of each coincident group is kept, so vertical runs
    collapse to their lower end.  Intended for graphs that are known to be
    continuous up to rounding.
    """
    if len(x) == 0:
        return x, y
    keep = np.empty(len(x), dtype=bool)
    keep[0] = True
    keep[1:] = np.diff(x) > atol
    return x[keep], y[keep]


class MonotoneProfile:
    """Continuous nondecreasing piecewise-linear function on an interval.

    Defined by knots ``(x[i], y[i])`` with ``x`` strictly increasing and
    ``y`` nondecreasing; evaluation between knots is linear interpolation.
    Used for generalized inverse velocities, moduli of continuity, and the
    refined velocity approximants.
    """

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        x = _as_array(x)
        y = _as_array(y)
        if x.ndim != 1 or x.shape != y.shape or len(x) < 2:
            raise ValueError("profile needs matching 1-d knot arrays with >= 2 knots")
        x, y = dedup_knots(x, y)
        if np.any(np.diff(x) <= 0):
            raise ValueError("knot abscissae must be strictly increasing")
        if np.any(np.diff(y) < 0):
            raise ValueError("knot ordinates must be nondecreasing")
        self.x = x
        self.y = y

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        lo, hi = self.domain
        if np.any(q < lo - 1e-12) or np.any(q > hi + 1e-12):
            raise ValueError(f"evaluation outside domain [{lo}, {hi}]")
        out = np.interp(np.clip(q, lo, hi), self.x, self.y)
        return float(out) if out.ndim == 0 else out

    def slopes(self) -> np.ndarray:
        return np.diff(self.y) / np.diff(self.x)

    def inverse(self) -> "MonotoneProfile":
        """Classical inverse; requires y strictly increasing."""
        if np.any(np.diff(self.y) <= 0):
            raise ValueError("inverse requires strictly increasing ordinates")
        return MonotoneProfile(self.y, self.x)

    def sup_distance(self, other: "MonotoneProfile") -> float:
        """Exact sup of |self - other| over the intersection of domains.

        The difference of two piecewise-linear functions is piecewise
        linear, so the sup is attained at a knot of either.
        """
        lo = max(self.x[0], other.x[0])
        hi = min(self.x[-1], other.x[-1])
        if hi <= lo:
            raise ValueError("domains do not overlap")
        q = np.unique(np.concatenate([self.x, other.x, [lo, hi]]))
        q = q[(q >= lo) & (q <= hi)]
        return float(np.max(np.abs(self(q) - other(q))))

    def __repr__(self):
        return f"MonotoneProfile({len(self.x)} knots on [{self.x[0]:g}, {self.x[-1]:g}])"


class JumpFunction:
    """Nondecreasing piecewise-linear function with upward jumps.

    Stored as knots ``x[i]`` with one-sided values ``(y_lo[i], y_hi[i])``;
    between knots the graph is the segment from ``(x[i], y_hi[i])`` to
    ``(x[i+1], y_lo[i+1])``.  ``__call__`` returns the lower (left) value at
    a jump, matching the generalized-inverse convention inf{x : y <= g(x)}.
    """

    __slots__ = ("x", "y_lo", "y_hi")

    def __init__(self, x, y_lo, y_hi):
        x = _as_array(x)
        y_lo = _as_array(y_lo)
        y_hi = _as_array(y_hi)
        if not (len(x) == len(y_lo) == len(y_hi)) or len(x) < 2:
            raise ValueError("need matching knot arrays with >= 2 knots")
        if np.any(np.diff(x) <= 0):
            raise ValueError("knot abscissae must be strictly increasing")
        if np.any(y_hi < y_lo):
            raise ValueError("upper value below lower value at a knot")
        if np.any(y_lo[1:] < y_hi[:-1]):
            raise ValueError("function must be nondecreasing")
        self.x = x
        self.y_lo = y_lo
        self.y_hi = y_hi

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    def jump_points(self) -> list[tuple[float, float, float]]:
        out = []
        for xi, lo, hi in zip(self.x, self.y_lo, self.y_hi):
            if hi > lo:
                out.append((float(xi), float(lo), float(hi)))
        return out

    def __call__(self, q):
        """Lower-semicontinuous-at-jumps evaluation (left value at a jump)."""
        q = np.asarray(q, dtype=float)
        lo, hi = self.domain
        if np.any(q < lo - 1e-12) or np.any(q > hi + 1e-12):
            raise ValueError(f"evaluation outside domain [{lo}, {hi}]")
        qc = np.clip(q, lo, hi)
        idx = np.searchsorted(self.x, qc)
        at_knot = (idx < len(self.x)) & (self.x[np.minimum(idx, len(self.x) - 1)] == qc)
        out = np.where(at_knot, self.y_lo[np.minimum(idx, len(self.x) - 1)], 0.0)
        seg = ~at_knot
        if np.any(seg):
            out = np.where(seg, self._interp_segments(qc), out)
        return float(out) if out.ndim == 0 else out

    def _interp_segments(self, q):
        i = np.clip(np.searchsorted(self.x, q) - 1, 0, len(self.x) - 2)
        x0, x1 = self.x[i], self.x[i + 1]
        y0, y1 = self.y_hi[i], self.y_lo[i + 1]
        with np.errstate(invalid="ignore"):
            t = np.where(x1 > x0, (q - x0) / np.where(x1 > x0, x1 - x0, 1.0), 0.0)
        return y0 + t * (y1 - y0)

    def completed_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Graph closure: both one-sided values at every knot, x-sorted."""
        xs = np.repeat(self.x, 2)
        ys = np.empty_like(xs)
        ys[0::2] = self.y_lo
        ys[1::2] = self.y_hi
        return xs, ys


def invert_completed(xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reflect a completed monotone graph across the diagonal.

    Vertical runs (jumps) become horizontal runs (plateaus) and vice versa,
    which is exactly how the generalized inverse of a nondecreasing function
    acts on its completed graph.
    """
    return ys.copy(), xs.copy()


def generalized_inverse_profile(fn: JumpFunction) -> MonotoneProfile:
    """Generalized inverse of a strictly increasing function with jumps.

    The result is continuous (the jumps of ``fn`` become plateaus) and is
    returned as a :class:`MonotoneProfile` on [min fn, max fn].
    """
    xs, ys = fn.completed_points()
    ix, iy = invert_completed(xs, ys)
    ix, iy = dedup_knots(ix, iy)
    return MonotoneProfile(ix, iy)


def generalized_inverse_of_profile(profile: MonotoneProfile) -> JumpFunction:
    """Generalized inverse of a continuous nondecreasing function.

    Plateaus of ``profile`` become jumps; the inverse takes the *lower*
    value at each jump per inf{x : y <= g(x)}.
    """
    xs, ys = profile.x, profile.y
    ix, iy = ys, xs
    # group coincident inverse-abscissae (plateaus of the input)
    ux, lo_idx = np.unique(ix, return_index=True)
    hi_idx = np.searchsorted(ix, ux, side="right") - 1
    return JumpFunction(ux, iy[lo_idx], iy[hi_idx])


def lower_convex_hull(px: np.ndarray, py: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower convex hull of a planar point set, as hull vertex arrays.

    Standard monotone-chain scan; for equal abscissae only the lowest point
    matters.  The returned vertex chain has strictly increasing slopes.
    """
    order = np.lexsort((py, px))
    px, py = px[order], py[order]
    keep = np.ones(len(px), dtype=bool)
    keep[1:] = np.diff(px) > 0
    # for duplicated x keep the smallest y, which after the lexsort is the first
    px, py = px[keep], py[keep]
    if len(px) < 2:
        return px, py
    hull: list[int] = []
    for i in range(len(px)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            # pop i1 if it lies on or above segment (i0, i)
            lhs = (py[i1] - py[i0]) * (px[i] - px[i1])
            rhs = (py[i] - py[i1]) * (px[i1] - px[i0])
            if lhs >= rhs:
                hull.pop()
            else:
                break
        hull.append(i)
    idx = np.array(hull, dtype=int)
    return px[idx], py[idx]


def upper_concave_hull(px: np.ndarray, py: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    hx, hy = lower_convex_hull(px, -py)
    return hx, -hy


# ---------------------------------------------------------------------------
# piecewise-linear profiles with jumps (solution snapshots, exact solutions)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Profile:
    """Piecewise-linear function of x with jump discontinuities.

    ``xs`` are strictly increasing knot positions; ``y_left``/``y_right``
    the one-sided limits there.  Between knots the function is the segment
    joining ``(xs[i], y_right[i])`` and ``(xs[i+1], y_left[i+1])``; outside
    it is constant.  Evaluation at a knot returns the right limit.

    Step functions are the special case where every inter-knot segment is
    flat; exact rarefaction profiles b(x/t) are the continuous case.
    """

    xs: np.ndarray
    y_left: np.ndarray
    y_right: np.ndarray
    constant: float = 0.0  # value when there are no knots

    def __post_init__(self):
        xs = _as_array(self.xs)
        yl = _as_array(self.y_left)
        yr = _as_array(self.y_right)
        if not (len(xs) == len(yl) == len(yr)):
            raise ValueError("knot arrays must have matching lengths")
        if len(xs) and np.any(np.diff(xs) <= 0):
            raise ValueError("knot positions must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "y_left", yl)
        object.__setattr__(self, "y_right", yr)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant_profile(value: float) -> "Profile":
        return Profile(np.empty(0), np.empty(0), np.empty(0), constant=float(value))

    @staticmethod
    def step(breakpoints, values) -> "Profile":
        """Step function: len(values) == len(breakpoints) + 1."""
        b = _as_array(breakpoints)
        v = _as_array(values)
        if len(v) != len(b) + 1:
            raise ValueError("need one more piece value than breakpoints")
        if len(b) == 0:
            return Profile.constant_profile(float(v[0]))
        return Profile(b, v[:-1], v[1:])

    @staticmethod
    def piecewise_linear(x, y) -> "Profile":
        """Continuous piecewise-linear profile through (x, y), constant tails."""
        x = _as_array(x)
        y = _as_array(y)
        return Profile(x, y, y)

    # -- queries -----------------------------------------------------------

    @property
    def is_step(self) -> bool:
        if len(self.xs) == 0:
            return True
        return bool(np.all(self.y_right[:-1] == self.y_left[1:]))

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        scalar = q.ndim == 0
        q = np.atleast_1d(q)
        if len(self.xs) == 0:
            out = np.full(q.shape, self.constant)
            return float(out[0]) if scalar else out
        out = np.empty(q.shape)
        left = q < self.xs[0]
        right = q >= self.xs[-1]
        out[left] = self.y_left[0]
        out[right] = self.y_right[-1]
        mid = ~(left | right)
        if np.any(mid):
            qm = q[mid]
            i = np.searchsorted(self.xs, qm, side="right") - 1
            at_knot = self.xs[i] == qm
            x0, x1 = self.xs[i], self.xs[i + 1]
            y0, y1 = self.y_right[i], self.y_left[i + 1]
            t = (qm - x0) / (x1 - x0)
            vals = y0 + t * (y1 - y0)
            vals = np.where(at_knot, self.y_right[i], vals)
            out[mid] = vals
        return float(out[0]) if scalar else out

    def bounds(self) -> tuple[float, float]:
        if len(self.xs) == 0:
            return self.constant, self.constant
        vals = np.concatenate([self.y_left, self.y_right])
        return float(vals.min()), float(vals.max())

    def shift(self, dx: float) -> "Profile":
        if len(self.xs) == 0:
            return self
        return Profile(self.xs + dx, self.y_left, self.y_right, self.constant)

    # -- exact integration ---------------------------------------------------

    def _segments(self, a: float, b: float):
        """Yield (x0, x1, v0, v1) linear segments covering [a, b]."""
        if a >= b:
            return
        if len(self.xs) == 0:
            yield a, b, self.constant, self.constant
            return
        cuts = np.unique(np.concatenate([[a, b], self.xs[(self.xs > a) & (self.xs < b)]]))
        for x0, x1 in zip(cuts[:-1], cuts[1:]):
            # one-sided values at the segment ends, read from inside
            v0 = self._right_value(x0)
            v1 = self._left_value(x1)
            yield float(x0), float(x1), float(v0), float(v1)

    def _right_value(self, x: float) -> float:
        return float(self(np.asarray(x)))

    def _left_value(self, x: float) -> float:
        if len(self.xs) == 0:
            return self.constant
        i = np.searchsorted(self.xs, x)
        if i < len(self.xs) and self.xs[i] == x:
            return float(self.y_left[i])
        return float(self(np.asarray(x)))

    def integrate(self, a: float, b: float) -> float:
        """Exact integral over [a, b]."""
        total = 0.0
        for x0, x1, v0, v1 in self._segments(a, b):
            total += 0.5 * (v0 + v1) * (x1 - x0)
        return total

    def variation_values(self, a: float, b: float) -> np.ndarray:
        """Ordered value sequence whose chains realize every variation sup.

        Between knots the profile is monotone (linear), so an optimal
        subdivision of [a, b] only needs the one-sided limits at interior
        knots plus the endpoint values.
        """
        if a >= b:
            raise ValueError("need a < b")
        vals = [self._right_value(a)]
        inner = (self.xs > a) & (self.xs < b)
        for xi, yl, yr in zip(self.xs[inner], self.y_left[inner], self.y_right[inner]):
            vals.append(float(yl))
            vals.append(float(yr))
        vals.append(self._left_value(b))
        if len(self.xs) and b >= self.xs[0] and np.any(self.xs == b):
            vals.append(self._right_value(b))
        out = np.asarray(vals)
        keep = np.ones(len(out), dtype=bool)
        keep[1:] = out[1:] != out[:-1]
        return out[keep]

    def knot_positions(self, a: float, b: float) -> np.ndarray:
        return self.xs[(self.xs >= a) & (self.xs <= b)]


def merge_cuts(p1: Profile, p2: Profile, a: float, b: float) -> np.ndarray:
    cuts = [np.asarray([a, b])]
    for p in (p1, p2):
        if len(p.xs):
            cuts.append(p.xs[(p.xs > a) & (p.xs < b)])
    return np.unique(np.concatenate(cuts))


def l1_distance(p1: Profile, p2: Profile, a: float, b: float) -> float:
    """Exact L1 distance of two profiles over [a, b].

    On each merged segment the difference is linear; segments where it
    changes sign are split at the root.
    """
    cuts = merge_cuts(p1, p2, a, b)
    total = 0.0
    for x0, x1 in zip(cuts[:-1], cuts[1:]):
        d0 = p1._right_value(x0) - p2._right_value(x0)
        d1 = p1._left_value(x1) - p2._left_value(x1)
        w = x1 - x0
        if d0 * d1 >= 0:
            total += 0.5 * abs(d0 + d1) * w
        else:
            r = d0 / (d0 - d1)  # sign-change location in [0, 1]
            total += 0.5 * (abs(d0) * r + abs(d1) * (1.0 - r)) * w
    return total


class _GaugeAntiderivative:
    """Exact antiderivative of s -> gauge(|s|) for a piecewise-linear gauge."""

    def __init__(self, knots_x: np.ndarray, knots_y: np.ndarray):
        self.x = knots_x
        self.y = knots_y
        mids = 0.5 * (knots_y[1:] + knots_y[:-1])
        self.cum = np.concatenate([[0.0], np.cumsum(mids * np.diff(knots_x))])

    def __call__(self, s: float) -> float:
        """Signed: H(s) = int_0^s gauge(|sigma|) d sigma."""
        sign = 1.0 if s >= 0 else -1.0
        m = abs(s)
        i = min(int(np.searchsorted(self.x, m, side="right")) - 1, len(self.x) - 2)
        i = max(i, 0)
        dx = m - self.x[i]
        yi = self.y[i]
        slope = (self.y[i + 1] - self.y[i]) / (self.x[i + 1] - self.x[i])
        return sign * (self.cum[i] + yi * dx + 0.5 * slope * dx * dx)


def gauge_l1_distance(gauge, p1: Profile, p2: Profile, a: float, b: float) -> float:
    """Exact integral of gauge(|p1 - p2|) over [a, b] for piecewise-linear gauge."""
    H = _GaugeAntiderivative(gauge.x, gauge.y)
    cuts = merge_cuts(p1, p2, a, b)
    total = 0.0
    for x0, x1 in zip(cuts[:-1], cuts[1:]):
        d0 = p1._right_value(x0) - p2._right_value(x0)
        d1 = p1._left_value(x1) - p2._left_value(x1)
        w = x1 - x0
        if d0 == d1:
            total += w * float(gauge(abs(d0)))
        else:
            total += w * (H(d1) - H(d0)) / (d1 - d0)
    return total
