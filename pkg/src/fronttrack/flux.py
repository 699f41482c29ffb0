"""Strictly convex Lipschitz fluxes represented through their wave velocity.

A flux f on [-M, M] is stored as its nondecreasing derivative a = f' in a
piecewise-affine-with-jumps normal form: explicit left/right limits at every
knot, strictly positive slopes in between (no affine piece of f).  The flux
itself is recovered exactly as the antiderivative anchored at a reference
point, and the generalized inverse b = a^{-1} is materialized once per flux
and cached.

Closed-form fluxes whose velocity is not piecewise affine (the power laws)
are refined onto a knot grid fine enough for the gauge pipeline; the grid
resolution is a constructor parameter with a documented default.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .piecewise import (
    JumpFunction,
    MonotoneProfile,
    dedup_knots,
    invert_completed,
)


class MonotoneVelocity:
    """Nondecreasing wave velocity with explicit one-sided limits.

    Canonical storage: knot abscissae ``u`` (strictly increasing, first and
    last equal to -M and M) with left limits ``a_lo`` and right limits
    ``a_hi``; affine between consecutive knots with strictly positive slope.
    A knot with ``a_lo < a_hi`` is a velocity jump.
    """

    __slots__ = ("u", "a_lo", "a_hi", "bound")

    def __init__(self, u, a_lo, a_hi, bound: float):
        u = np.asarray(u, dtype=float)
        a_lo = np.asarray(a_lo, dtype=float)
        a_hi = np.asarray(a_hi, dtype=float)
        if not (len(u) == len(a_lo) == len(a_hi)) or len(u) < 2:
            raise ValueError("need matching knot arrays with >= 2 knots")
        u, idx = np.unique(u, return_index=True)
        a_lo, a_hi = a_lo[idx], a_hi[idx]
        if abs(u[0] + bound) > 1e-14 or abs(u[-1] - bound) > 1e-14:
            raise ValueError("first/last knot must sit at -M and M")
        u[0], u[-1] = -bound, bound
        if np.any(a_hi < a_lo):
            raise ValueError("right limit below left limit at a knot")
        if np.any(a_lo[1:] < a_hi[:-1]):
            raise ValueError("velocity must be globally nondecreasing")
        seg_rise = a_lo[1:] - a_hi[:-1]
        if np.any(seg_rise <= 0):
            raise ValueError(
                "velocity must rise strictly between knots "
                "(a flat piece would make the flux affine there)"
            )
        self.u = u
        self.a_lo = a_lo
        self.a_hi = a_hi
        self.bound = float(bound)

    # -- spec-facing views ---------------------------------------------------

    @property
    def pieces(self) -> list[tuple[tuple[float, float], tuple[float, float]]]:
        """Affine pieces as ((u0, u1), (a(u0+), a(u1-)))."""
        return [
            ((float(self.u[k]), float(self.u[k + 1])),
             (float(self.a_hi[k]), float(self.a_lo[k + 1])))
            for k in range(len(self.u) - 1)
        ]

    @property
    def jumps(self) -> list[tuple[float, float, float]]:
        """Jump knots as (u_j, a-(u_j), a+(u_j))."""
        mask = self.a_hi > self.a_lo
        return [
            (float(uj), float(lo), float(hi))
            for uj, lo, hi in zip(self.u[mask], self.a_lo[mask], self.a_hi[mask])
        ]

    @property
    def value_range(self) -> tuple[float, float]:
        return float(self.a_lo[0]), float(self.a_hi[-1])

    # -- evaluation ----------------------------------------------------------

    def _check_domain(self, v: np.ndarray):
        if np.any(v < -self.bound) or np.any(v > self.bound):
            raise ValueError(f"state outside [-{self.bound}, {self.bound}]")

    def limits(self, v):
        """One-sided limits (a-(v), a+(v)); equal where a is continuous."""
        v = np.asarray(v, dtype=float)
        scalar = v.ndim == 0
        v = np.atleast_1d(v)
        self._check_domain(v)
        i = np.searchsorted(self.u, v, side="left")
        i = np.minimum(i, len(self.u) - 1)
        at_knot = self.u[i] == v
        k = np.clip(np.searchsorted(self.u, v, side="right") - 1, 0, len(self.u) - 2)
        du = self.u[k + 1] - self.u[k]
        slope = (self.a_lo[k + 1] - self.a_hi[k]) / du
        interior = self.a_hi[k] + slope * (v - self.u[k])
        lo = np.where(at_knot, self.a_lo[i], interior)
        hi = np.where(at_knot, self.a_hi[i], interior)
        if scalar:
            return float(lo[0]), float(hi[0])
        return lo, hi

    def mean(self, v, lam: float = 0.5):
        """Weighted mean lam * a+(v) + (1 - lam) * a-(v)."""
        if not 0.0 <= lam <= 1.0:
            raise ValueError("weight must lie in [0, 1]")
        lo, hi = self.limits(v)
        return lam * hi + (1.0 - lam) * lo

    def completed_points(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.repeat(self.u, 2)
        ys = np.empty_like(xs)
        ys[0::2] = self.a_lo
        ys[1::2] = self.a_hi
        return xs, ys

    def largest_state_with_left_limit_at_most(self, tau: float) -> float:
        """sup{v in [-M, M] : a-(v) <= tau}, computed exactly.

        a- is left-continuous, so the sup is attained.  Used by the greedy
        state-subdivision builder.
        """
        if tau < self.a_lo[0]:
            raise ValueError("threshold below the velocity range")
        if tau >= self.a_lo[-1]:
            return self.bound
        # find the knot interval whose left-limit values bracket tau
        k = int(np.searchsorted(self.a_lo, tau, side="right")) - 1
        # a-(v) on (u_k, u_{k+1}] runs over (a_hi[k], a_lo[k+1]]
        if tau < self.a_hi[k]:
            # tau inside the jump gap at u_k (or at its lower edge)
            return float(self.u[k])
        du = self.u[k + 1] - self.u[k]
        slope = (self.a_lo[k + 1] - self.a_hi[k]) / du
        return float(self.u[k] + (tau - self.a_hi[k]) / slope)

    def as_jump_function(self) -> JumpFunction:
        return JumpFunction(self.u, self.a_lo, self.a_hi)

    def __repr__(self):
        return (
            f"MonotoneVelocity({len(self.u)} knots, {len(self.jumps)} jumps, "
            f"M={self.bound:g})"
        )


class ConvexFlux:
    """Strictly convex flux anchored by f(u_ref) = f_ref.

    Evaluation integrates the velocity exactly (piecewise quadratic); the
    generalized inverse velocity is cached as a continuous profile.
    """

    def __init__(self, velocity: MonotoneVelocity, u_ref: float = 0.0,
                 f_ref: float = 0.0, name: str = "custom"):
        if abs(u_ref) > velocity.bound:
            raise ValueError("reference state outside the domain")
        self.velocity = velocity
        self.u_ref = float(u_ref)
        self.f_ref = float(f_ref)
        self.name = name
        # cumulative antiderivative of a at the knots, offset applied below
        u, a_lo, a_hi = velocity.u, velocity.a_lo, velocity.a_hi
        seg = 0.5 * (a_hi[:-1] + a_lo[1:]) * np.diff(u)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        self._cum = cum
        self._cum_offset = self.f_ref - self._raw_eval(np.asarray([self.u_ref]))[0]

    @property
    def bound(self) -> float:
        return self.velocity.bound

    def _raw_eval(self, v: np.ndarray) -> np.ndarray:
        u, a_hi, a_lo = self.velocity.u, self.velocity.a_hi, self.velocity.a_lo
        k = np.clip(np.searchsorted(u, v, side="right") - 1, 0, len(u) - 2)
        du = u[k + 1] - u[k]
        slope = (a_lo[k + 1] - a_hi[k]) / du
        dx = v - u[k]
        return self._cum[k] + a_hi[k] * dx + 0.5 * slope * dx * dx

    def __call__(self, v):
        """Flux value f(v), exact piecewise-quadratic evaluation."""
        v = np.asarray(v, dtype=float)
        scalar = v.ndim == 0
        v = np.atleast_1d(v)
        self.velocity._check_domain(v)
        out = self._raw_eval(v) + self._cum_offset
        return float(out[0]) if scalar else out

    def limits(self, v):
        return self.velocity.limits(v)

    def mean_velocity(self, v, lam: float = 0.5):
        return self.velocity.mean(v, lam)

    @cached_property
    def inverse_velocity(self) -> MonotoneProfile:
        """Generalized inverse b = a^{-1} on [a-(-M), a+(M)] (cached).

        b is continuous and nondecreasing, flat exactly over each velocity
        jump interval with the jump abscissa as value.
        """
        xs, ys = self.velocity.completed_points()
        bx, by = invert_completed(xs, ys)
        bx, by = dedup_knots(bx, by)
        return MonotoneProfile(bx, by)

    def chord_slope(self, v0: float, v1: float) -> float:
        """Mean slope (f(v1) - f(v0)) / (v1 - v0); Rankine-Hugoniot speed."""
        if v0 == v1:
            raise ValueError("chord slope needs distinct states")
        return (self(v1) - self(v0)) / (v1 - v0)

    def __repr__(self):
        return f"ConvexFlux({self.name!r}, M={self.bound:g})"


# ---------------------------------------------------------------------------
# spec-level operations
# ---------------------------------------------------------------------------


def velocity_limits(flux: ConvexFlux, u):
    """Left and right velocity limits (a-(u), a+(u))."""
    return flux.limits(u)


def velocity_mean(flux: ConvexFlux, u, lam: float = 0.5):
    """Weighted one-sided mean velocity; lam = 1/2 is the symmetric mean."""
    return flux.mean_velocity(u, lam)


def eval_flux(flux: ConvexFlux, u):
    return flux(u)


def generalized_inverse(flux: ConvexFlux) -> MonotoneProfile:
    """Generalized inverse of the velocity (cached on the flux)."""
    return flux.inverse_velocity


# ---------------------------------------------------------------------------
# builtin constructors
# ---------------------------------------------------------------------------


def burgers(bound: float = 1.0) -> ConvexFlux:
    """f(u) = u^2 / 2 on [-M, M]; velocity a(u) = u."""
    vel = MonotoneVelocity([-bound, bound], [-bound, bound], [-bound, bound], bound)
    return ConvexFlux(vel, 0.0, 0.0, name="burgers")


def quadratic_abs(bound: float = 1.0) -> ConvexFlux:
    """f(u) = u^2 + |u|; velocity 2u + sign(u) jumps from -1 to 1 at u = 0.

    The canonical single-jump flux: rarefactions through the origin carry a
    flat part of width 2t and the one-sided Lipschitz inequality fails for
    any everywhere-defined selection of the velocity.
    """
    if bound <= 0:
        raise ValueError("domain bound must be positive")
    u = np.array([-bound, 0.0, bound])
    a_lo = np.array([-2.0 * bound - 1.0, -1.0, 2.0 * bound + 1.0])
    a_hi = np.array([-2.0 * bound - 1.0, 1.0, 2.0 * bound + 1.0])
    vel = MonotoneVelocity(u, a_lo, a_hi, bound)
    return ConvexFlux(vel, 0.0, 0.0, name="example12")


def power_law(p: float, bound: float = 1.0, gauge_rel_tol: float = 1e-7,
              core_fraction: float = 1e-2) -> ConvexFlux:
    """f(u) = |u|^(1+p) / (1+p); velocity sign(u) |u|^p, refined onto knots.

    For p > 1 the velocity is not piecewise affine, so it is interpolated on
    a symmetric geometric knot grid.  The grid ratio is chosen so that the
    chord error of the induced gauge stays below ``gauge_rel_tol`` in
    relative terms; below ``core_fraction * bound`` the grid coarsens (the
    gauge is only metrologically interesting at resolvable increments).
    """
    if p < 1:
        raise ValueError("need p >= 1 for a convex power flux")
    if bound <= 0:
        raise ValueError("domain bound must be positive")
    if p == 1:
        vel = MonotoneVelocity([-bound, bound], [-bound, bound], [-bound, bound], bound)
        return ConvexFlux(vel, 0.0, 0.0, name="power(1)")
    # chord-interpolation error of the induced gauge ~ p(p-1)/8 * (du/u)^2
    ratio = np.sqrt(8.0 * gauge_rel_tol / (p * (p - 1.0)))
    u_core = core_fraction * bound
    n_fine = max(int(np.ceil(np.log(bound / u_core) / ratio)), 8)
    fine = np.geomspace(u_core, bound, n_fine + 1)
    coarse = np.geomspace(1e-3 * bound, u_core, 64, endpoint=False)
    pos = np.unique(np.concatenate([coarse, fine]))
    pos[-1] = bound
    a_pos = pos**p
    u = np.concatenate([-pos[::-1], pos])
    a = np.concatenate([-a_pos[::-1], a_pos])
    vel = MonotoneVelocity(u, a, a, bound)
    return ConvexFlux(vel, 0.0, 0.0, name=f"power({p:g})")


def _rational_sequence(count: int) -> list[float]:
    """Deterministic enumeration of distinct rationals in (-1, 1).

    0, 1/2, -1/2, 1/3, -1/3, 2/3, -2/3, 1/4, -1/4, 3/4, ... — reduced
    fractions ordered by denominator, positive before negative.
    """
    out = [0.0]
    q = 2
    while len(out) < count:
        for pnum in range(1, q):
            if np.gcd(pnum, q) != 1:
                continue
            out.append(pnum / q)
            if len(out) >= count:
                break
            out.append(-pnum / q)
            if len(out) >= count:
                break
        q += 1
    return out[:count]


def atomic(terms: int, ramp: float = 1e-6, bound: float = 1.0,
           points: list[float] | None = None) -> ConvexFlux:
    """Velocity made of countably many jumps, truncated to ``terms`` atoms.

    a(u) = ramp * u + sum_{n<=terms} 2^{-n} H(u - r_n) with jump points r_n
    enumerating rationals in (-M, M).  The linear ramp keeps the flux
    strictly convex, which a finite jump sum alone cannot (it would leave
    affine pieces between atoms).
    """
    if terms < 1:
        raise ValueError("need at least one atom")
    if ramp <= 0:
        raise ValueError("ramp must be positive to keep the flux strictly convex")
    if points is None:
        points = [r * bound for r in _rational_sequence(terms)]
    if len(points) != terms:
        raise ValueError("need exactly one jump point per atom")
    if len(set(points)) != terms or any(abs(r) >= bound for r in points):
        raise ValueError("jump points must be distinct and interior")
    sizes = 2.0 ** -np.arange(1, terms + 1)
    order = np.argsort(points)
    r = np.asarray(points)[order]
    s = sizes[order]
    below = np.concatenate([[0.0], np.cumsum(s)])  # atoms strictly below u
    u = np.concatenate([[-bound], r, [bound]])
    a_lo = ramp * u + np.concatenate([[0.0], below[:-1], [below[-1]]])
    a_hi = ramp * u + np.concatenate([[0.0], below[1:], [below[-1]]])
    vel = MonotoneVelocity(u, a_lo, a_hi, bound)
    return ConvexFlux(vel, 0.0, 0.0, name=f"atomic({terms})")


def from_velocity_table(u, a_lo, a_hi, bound: float, u_ref: float = 0.0,
                        f_ref: float = 0.0, name: str = "table") -> ConvexFlux:
    """Explicit knot/jump table constructor (the CLI's table form)."""
    vel = MonotoneVelocity(u, a_lo, a_hi, bound)
    return ConvexFlux(vel, u_ref, f_ref, name=name)
