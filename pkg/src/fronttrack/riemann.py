"""Exact and approximate Riemann solvers for strictly convex fluxes.

The exact solver returns a shock at the Rankine-Hugoniot speed for a
decreasing jump and the self-similar profile b(x/t) for an increasing one,
where b is the generalized inverse velocity (continuous even when the
velocity jumps).  The approximate solver works with the piecewise-linear
interpolated flux on an adapted state subdivision: every increasing jump
resolves into one contact front per subdivision cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flux import ConvexFlux
from .gauge import flux_modulus
from .piecewise import MonotoneProfile, Profile


@dataclass(frozen=True)
class RiemannFan:
    """Solution structure of a single Riemann problem."""

    flux: ConvexFlux
    left: float
    right: float
    kind: str  # "shock" | "rarefaction" | "constant"
    speed: float | None = None
    edges: tuple[float, float] | None = None  # (a-(u_l), a+(u_r))

    def __call__(self, xi):
        """Self-similar state at speed xi = x/t (right value on a shock)."""
        xi = np.asarray(xi, dtype=float)
        scalar = xi.ndim == 0
        xi = np.atleast_1d(xi)
        if self.kind == "constant":
            out = np.full(xi.shape, self.left)
        elif self.kind == "shock":
            out = np.where(xi < self.speed, self.left, self.right)
        else:
            b = self.flux.inverse_velocity
            lo, hi = self.edges
            out = np.empty(xi.shape)
            out[xi < lo] = self.left
            out[xi > hi] = self.right
            mid = (xi >= lo) & (xi <= hi)
            if np.any(mid):
                out[mid] = b(xi[mid])
        return float(out[0]) if scalar else out

    def profile(self, t: float, center: float = 0.0) -> Profile:
        """Exact solution at time t > 0 as a piecewise-linear profile."""
        if t <= 0:
            raise ValueError("need t > 0")
        if self.kind == "constant":
            return Profile.constant_profile(self.left)
        if self.kind == "shock":
            return Profile.step([center + self.speed * t], [self.left, self.right])
        b = self.flux.inverse_velocity
        lo, hi = self.edges
        xi = np.unique(np.concatenate([[lo, hi], b.x[(b.x > lo) & (b.x < hi)]]))
        return Profile.piecewise_linear(center + xi * t, b(xi))


def solve_exact(flux: ConvexFlux, u_l: float, u_r: float) -> RiemannFan:
    """Entropy solution of the Riemann problem for a strictly convex flux."""
    M = flux.bound
    if abs(u_l) > M or abs(u_r) > M:
        raise ValueError(f"states outside [-{M}, {M}]")
    if u_l == u_r:
        return RiemannFan(flux, u_l, u_r, "constant")
    if u_l > u_r:
        return RiemannFan(flux, u_l, u_r, "shock", speed=flux.chord_slope(u_l, u_r))
    lo = flux.limits(u_l)[0]
    hi = flux.limits(u_r)[1]
    return RiemannFan(flux, u_l, u_r, "rarefaction", edges=(lo, hi))


def eval_exact(fan: RiemannFan, xi):
    return fan(xi)


# ---------------------------------------------------------------------------
# adapted subdivision and piecewise-linear flux
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Subdivision:
    """Adapted state grid: left-limit gaps between neighbors at most eps/4."""

    states: np.ndarray
    eps: float

    def __post_init__(self):
        object.__setattr__(self, "states", np.asarray(self.states, dtype=float))

    def __len__(self):
        return len(self.states)

    def index_of(self, u: float) -> int:
        """Exact membership lookup; raises for states not on the grid."""
        i = int(np.searchsorted(self.states, u))
        if i >= len(self.states) or self.states[i] != u:
            raise ValueError(f"state {u} is not a subdivision point")
        return i

    def max_gap(self) -> float:
        return float(np.max(np.diff(self.states)))


def build_subdivision(flux: ConvexFlux, eps: float) -> Subdivision:
    """Greedy coarsest subdivision with a-(c_{i+1}) - a+(c_i) <= eps/4.

    Each step takes the supremum state admissible from the previous one;
    a- is left-continuous so the sup is attained, and the inversion is done
    exactly on the piecewise-affine velocity.  States where the velocity
    jumps by more than eps/4 necessarily land on the grid.
    """
    if eps <= 0:
        raise ValueError("need eps > 0")
    vel = flux.velocity
    M = flux.bound
    states = [-M]
    guard = 0
    limit = 4 * len(vel.u) + int(np.ceil(
        (vel.value_range[1] - vel.value_range[0]) / (eps / 4.0)
    )) + 16
    while states[-1] < M:
        tau = vel.limits(states[-1])[1] + eps / 4.0
        nxt = vel.largest_state_with_left_limit_at_most(tau)
        if nxt <= states[-1]:
            raise RuntimeError("subdivision stalled; velocity representation broken")
        states.append(nxt)
        guard += 1
        if guard > limit:
            raise RuntimeError("subdivision failed to terminate")
    return Subdivision(np.asarray(states), float(eps))


def subdivision_gap_bound(flux: ConvexFlux, eps: float) -> float:
    """omega[b](eps/4): the guaranteed bound on neighbor gaps in the grid."""
    omega = flux_modulus(flux)
    return float(omega(min(eps / 4.0, omega.x[-1])))


@dataclass(frozen=True)
class ApproxFlux:
    """Continuous piecewise-linear interpolation of the flux on a subdivision.

    Cell slopes are strictly increasing (convexity) and bracket the true
    one-sided velocities: a+(c_{i-1}) <= s_i <= a-(c_i).  The interpolant
    agrees with the flux at every subdivision state, so shock speeds between
    grid states are exact.
    """

    flux: ConvexFlux
    subdivision: Subdivision
    slopes: np.ndarray

    @property
    def states(self) -> np.ndarray:
        return self.subdivision.states

    @property
    def eps(self) -> float:
        return self.subdivision.eps

    def __call__(self, u):
        return np.interp(u, self.states, self.flux(self.states))

    def cell_slope(self, i: int) -> float:
        """Slope on cell (c_{i-1}, c_i)."""
        return float(self.slopes[i - 1])

    def plus_limit(self, u: float) -> float:
        """Right limit of the interpolated velocity at a grid state."""
        i = self.subdivision.index_of(u)
        if i == len(self.states) - 1:
            raise ValueError("no right limit at the upper domain end")
        return float(self.slopes[i])

    def minus_limit(self, u: float) -> float:
        """Left limit of the interpolated velocity at a grid state."""
        i = self.subdivision.index_of(u)
        if i == 0:
            raise ValueError("no left limit at the lower domain end")
        return float(self.slopes[i - 1])


def approx_flux(flux: ConvexFlux, subdivision: Subdivision) -> ApproxFlux:
    c = subdivision.states
    fvals = flux(c)
    slopes = np.diff(fvals) / np.diff(c)
    if np.any(np.diff(slopes) <= 0):
        raise RuntimeError("interpolated flux lost strict convexity")
    a_lo, a_hi = flux.limits(c)
    tol = 1e-11 * max(1.0, float(np.max(np.abs(slopes))))
    if np.any(slopes < a_hi[:-1] - tol) or np.any(slopes > a_lo[1:] + tol):
        raise RuntimeError("cell slopes escaped the one-sided velocity bracket")
    return ApproxFlux(flux, subdivision, slopes)


@dataclass(frozen=True)
class ApproxWave:
    """One front of an approximate Riemann solution (not yet anchored)."""

    left: float
    right: float
    speed: float
    kind: str  # "S" | "R"


def solve_approx(fe: ApproxFlux, u_l: float, u_r: float) -> list[ApproxWave]:
    """Approximate Riemann solution: a shock, a fan of contact fronts, or nothing.

    Both states must be subdivision points.  A decreasing jump travels as a
    single shock at the exact Rankine-Hugoniot speed; an increasing jump
    resolves into one front per subdivision cell with strictly increasing
    speeds.
    """
    i = fe.subdivision.index_of(u_l)
    j = fe.subdivision.index_of(u_r)
    if i == j:
        return []
    if i > j:
        return [ApproxWave(u_l, u_r, fe.flux.chord_slope(u_l, u_r), "S")]
    c = fe.states
    return [
        ApproxWave(float(c[k]), float(c[k + 1]), float(fe.slopes[k]), "R")
        for k in range(i, j)
    ]


@dataclass(frozen=True)
class TildePoints:
    """Sampling speeds for the modified one-sided Lipschitz inequality.

    Interior states of a fan sample at the mean velocity; the fan edges come
    in two flavors each: the mean-velocity point in the outside region and
    the fan-edge front itself (the interpolated one-sided velocity).
    Positions follow from x = xi * t.
    """

    t: float
    interior: list[tuple[float, float]]  # (state, xi)
    left: float
    left_plus: float
    right: float
    right_minus: float

    def positions(self) -> dict:
        return {
            "interior": [(c, xi * self.t) for c, xi in self.interior],
            "left": self.left * self.t,
            "left_plus": self.left_plus * self.t,
            "right": self.right * self.t,
            "right_minus": self.right_minus * self.t,
        }


def tilde_points(fe: ApproxFlux, u_l: float, u_r: float, t: float) -> TildePoints:
    if t <= 0:
        raise ValueError("need t > 0")
    i = fe.subdivision.index_of(u_l)
    j = fe.subdivision.index_of(u_r)
    if i >= j:
        raise ValueError("need an increasing fan span")
    c = fe.states
    interior = [(float(c[k]), float(fe.flux.mean_velocity(c[k]))) for k in range(i + 1, j)]
    return TildePoints(
        t=float(t),
        interior=interior,
        left=float(fe.flux.mean_velocity(u_l)),
        left_plus=fe.plus_limit(u_l),
        right=float(fe.flux.mean_velocity(u_r)),
        right_minus=fe.minus_limit(u_r),
    )


def refine_velocity(flux: ConvexFlux, u_l: float, u_r: float, n: int
                    ) -> tuple[MonotoneProfile, MonotoneProfile]:
    """Uniform mean-velocity interpolant and its classical inverse.

    Knots v_i = u_l + (i/n)(u_r - u_l) carry the mean velocity; the
    interpolant is strictly increasing, so its inverse is an honest
    function, and sup |b_n - b| <= (u_r - u_l)/n on the common domain.
    """
    if u_l >= u_r:
        raise ValueError("need u_l < u_r")
    if n < 1:
        raise ValueError("need n >= 1")
    v = u_l + (np.arange(n + 1) / n) * (u_r - u_l)
    v[-1] = u_r
    abar = np.asarray(flux.mean_velocity(v))
    a_n = MonotoneProfile(v, abar)
    b_n = a_n.inverse()
    return a_n, b_n
