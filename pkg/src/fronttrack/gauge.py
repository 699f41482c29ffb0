"""The regularity gauge: modulus of continuity, its inverse, convex envelope.

Pipeline, all exact on knots:

    b  (inverse velocity)  ->  omega = modulus of continuity of b
                           ->  phi   = generalized inverse of omega
                           ->  Phi   = lower convex envelope of phi.

omega is computed as the exact upper envelope of all window-increment
functions anchored at knots of b (the sliding-window sup is always attained
with one window end at a knot).  phi has upward jumps exactly where omega
has plateaus; the envelope is the lower convex hull of phi's graph closure.
"""

from __future__ import annotations

import numpy as np

from .flux import ConvexFlux
from .piecewise import (
    JumpFunction,
    MonotoneProfile,
    dedup_knots,
    generalized_inverse_of_profile,
    lower_convex_hull,
)


class EnvelopeFunction:
    """Convex nondecreasing piecewise-linear gauge with gauge(0) = 0."""

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if len(x) < 2 or x.shape != y.shape:
            raise ValueError("need matching knot arrays with >= 2 knots")
        if x[0] != 0.0 or y[0] != 0.0:
            raise ValueError("gauge must start at (0, 0)")
        if np.any(np.diff(x) <= 0):
            raise ValueError("knot abscissae must be strictly increasing")
        slopes = np.diff(y) / np.diff(x)
        if np.any(np.diff(slopes) < -1e-12 * max(1.0, np.max(np.abs(slopes)))):
            raise ValueError("gauge must be convex (nondecreasing slopes)")
        if np.any(slopes < 0):
            raise ValueError("gauge must be nondecreasing")
        if len(y) > 1 and y[1] <= 0:
            raise ValueError("gauge must be positive away from zero")
        self.x = x
        self.y = y

    @property
    def domain(self) -> tuple[float, float]:
        return 0.0, float(self.x[-1])

    @property
    def is_linear(self) -> bool:
        slopes = np.diff(self.y) / np.diff(self.x)
        return bool(np.all(slopes == slopes[0]))

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        if np.any(h < -1e-12) or np.any(h > self.x[-1] + 1e-12):
            raise ValueError(f"increment outside gauge domain [0, {self.x[-1]}]")
        out = np.interp(np.clip(h, 0.0, self.x[-1]), self.x, self.y)
        return float(out) if out.ndim == 0 else out

    def __repr__(self):
        return f"EnvelopeFunction({len(self.x)} knots on [0, {self.x[-1]:g}])"


def identity_gauge(upper: float) -> EnvelopeFunction:
    """The identity gauge on [0, upper]; turns TV^Phi into classical TV."""
    return EnvelopeFunction([0.0, upper], [0.0, upper])


# ---------------------------------------------------------------------------
# modulus of continuity
# ---------------------------------------------------------------------------


def _piece_slopes_at(profile_x, profile_y, q):
    """Slope of the piece containing each query point; 0 outside the domain."""
    s = np.diff(profile_y) / np.diff(profile_x)
    i = np.clip(np.searchsorted(profile_x, q, side="right") - 1, 0, len(s) - 1)
    out = s[i]
    out[(q <= profile_x[0]) | (q >= profile_x[-1])] = 0.0
    return out


def _odd_concave_shortcut(b: MonotoneProfile) -> MonotoneProfile | None:
    """Exact modulus for odd b that is concave on the nonnegative half.

    There the sliding-window sup is attained by the symmetric window, so
    omega(h) = 2 b(h/2).  This is the path for refined power-law fluxes,
    whose knot count makes the general envelope computation wasteful.
    """
    z, y = b.x, b.y
    if len(z) < 4:
        return None
    if not (np.array_equal(z, -z[::-1]) and np.array_equal(y, -y[::-1])):
        return None
    slopes = np.diff(y) / np.diff(z)
    j0 = np.searchsorted(z, 0.0, side="right") - 1
    tail = slopes[max(j0, 0):]
    if np.any(np.diff(tail) > 1e-12 * max(1.0, float(np.max(np.abs(slopes))))):
        return None
    pos = z > 0
    hx = np.concatenate([[0.0], 2.0 * z[pos]])
    hy = np.concatenate([[0.0], 2.0 * y[pos]])
    return MonotoneProfile(hx, hy)


def _line_envelope_interior(vals, slopes, width):
    """Interior vertices of the upper envelope of lines v + s*t on [0, width].

    Returns a list of (t, value) strictly inside (0, width).  Exact
    slope-sorted hull scan over the lines.
    """
    order = np.lexsort((-vals, slopes))
    v = vals[order]
    s = slopes[order]
    # among equal slopes only the largest value can matter
    keep = np.ones(len(s), dtype=bool)
    keep[1:] = np.diff(s) > 0
    v, s = v[keep], s[keep]
    lines: list[tuple[float, float]] = []  # (v, s)
    starts: list[float] = []
    for vi, si in zip(v, s):
        while lines:
            v0, s0 = lines[-1]
            # intersection with current top line
            t_cross = (v0 - vi) / (si - s0)
            if t_cross <= starts[-1] + 0.0:
                lines.pop()
                starts.pop()
            else:
                break
        starts.append(-np.inf if not lines else (lines[-1][0] - vi) / (si - lines[-1][1]))
        lines.append((vi, si))
    out = []
    for (vi, si), t0 in zip(lines, starts):
        if 0.0 < t0 < width:
            out.append((t0, vi + si * t0))
    return out


def _modulus_general(b: MonotoneProfile) -> MonotoneProfile:
    z, y = b.x, b.y
    n = len(z)
    diffs = (z[None, :] - z[:, None])[np.triu_indices(n, k=1)]
    grid = np.unique(np.concatenate([[0.0], diffs]))
    grid, _ = dedup_knots(grid, grid)

    # window-increment candidates anchored at each knot, clamped at the ends
    q_fwd = z[:, None] + grid[None, :]
    v_fwd = np.interp(q_fwd, z, y) - y[:, None]
    q_bwd = z[:, None] - grid[None, :]
    v_bwd = y[:, None] - np.interp(q_bwd, z, y)
    vals = np.vstack([v_fwd, v_bwd])
    omega_grid = vals.max(axis=0)

    knots_x = [grid[0]]
    knots_y = [omega_grid[0]]
    scale = max(1.0, float(np.max(np.abs(y))))
    for k in range(len(grid) - 1):
        w = grid[k + 1] - grid[k]
        if w > 1e-13:
            mid = grid[k] + 0.5 * w
            sl = np.concatenate([
                _piece_slopes_at(z, y, z + mid),
                _piece_slopes_at(z, y, z - mid),
            ])
            col = vals[:, k]
            # a line maximal at both interval ends is the whole envelope
            # there (all candidates are linear on the interval)
            top = int(np.argmax(col))
            if col[top] + sl[top] * w < omega_grid[k + 1] - 1e-15 * scale:
                for t_in, v_in in _line_envelope_interior(col, sl, w):
                    knots_x.append(grid[k] + t_in)
                    knots_y.append(v_in)
        knots_x.append(grid[k + 1])
        knots_y.append(omega_grid[k + 1])

    kx = np.asarray(knots_x)
    ky = np.maximum.accumulate(np.asarray(knots_y))
    return MonotoneProfile(kx, ky)


def modulus_of_continuity(b: MonotoneProfile) -> MonotoneProfile:
    """Exact modulus of continuity omega[b](h) = sup_x (b(x+h) - b(x)).

    For nondecreasing b the absolute value in the definition is free, and
    the sup over window positions is attained with one window end at a knot
    of b, so omega is piecewise linear and computed exactly by candidate
    enumeration.  omega(0) = 0, nondecreasing, subadditive.
    """
    shortcut = _odd_concave_shortcut(b)
    if shortcut is not None:
        return shortcut
    return _modulus_general(b)


def phi_raw(omega: MonotoneProfile) -> JumpFunction:
    """Generalized inverse of the modulus: phi(y) = inf{h : y <= omega(h)}.

    Nondecreasing with an upward jump across every plateau of omega;
    phi(0) = 0.  Evaluation above sup omega is a domain error.
    """
    return generalized_inverse_of_profile(omega)


def build_phi(flux: ConvexFlux) -> EnvelopeFunction:
    """Lower convex envelope of phi_raw for this flux (cached on the flux).

    Computed as the lower convex hull of the closure of phi's graph: the
    hull input is every knot of omega reflected across the diagonal, which
    includes both one-sided limits at each jump of phi.
    """
    cached = getattr(flux, "_gauge_cache", None)
    if cached is not None:
        return cached
    omega = flux_modulus(flux)
    hx, hy = lower_convex_hull(omega.y, omega.x)
    gauge = EnvelopeFunction(hx, hy)
    flux._gauge_cache = gauge
    return gauge


def flux_modulus(flux: ConvexFlux) -> MonotoneProfile:
    """Modulus of continuity of the flux's inverse velocity (cached)."""
    cached = getattr(flux, "_omega_cache", None)
    if cached is not None:
        return cached
    omega = modulus_of_continuity(flux.inverse_velocity)
    flux._omega_cache = omega
    return omega
