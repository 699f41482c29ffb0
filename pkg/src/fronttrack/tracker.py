"""Event-driven wave front tracking under the piecewise-linear flux.

Piecewise-constant data evolve as finitely many linear fronts; the only
events are collisions of adjacent fronts, each of which strictly reduces
the front count (shock-shock merges, shock absorption at a fan edge, or a
full cancellation).  Rarefaction fronts are created only at time zero and
never re-anchored, which the verification module relies on.

Sampling exposes both the solution value of a region and its modified
velocity: the one-sided limit facing an adjacent shock, the symmetric mean
otherwise.  The identity value == b(velocity) holds at every sample point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .piecewise import Profile
from .riemann import ApproxFlux, solve_approx


class InvariantViolation(RuntimeError):
    """An internal structural invariant broke; signals a bug, not bad input."""


@dataclass
class Front:
    """A moving discontinuity: position x0 + speed * (t - t0)."""

    x0: float
    t0: float
    speed: float
    left: float
    right: float
    kind: str  # "S" | "R"

    def position(self, t: float) -> float:
        return self.x0 + self.speed * (t - self.t0)


@dataclass
class EventRecord:
    time: float
    x: float
    classification: str  # "SS" | "RS" | "SR" | "cancel"
    in_count: int
    out_count: int

    def to_row(self) -> dict:
        return {
            "t": self.time,
            "x": self.x,
            "classification": self.classification,
            "in_count": self.in_count,
            "out_count": self.out_count,
        }


@dataclass
class PendingEvent:
    time: float
    x: float
    index: int  # left member of the colliding pair


TIME_TIE_TOL = 1e-12


def quantize_value(states: np.ndarray, v: float) -> float:
    """Nearest subdivision state; distance ties go to the smaller magnitude."""
    i = int(np.searchsorted(states, v))
    cands = []
    if i > 0:
        cands.append(float(states[i - 1]))
    if i < len(states):
        cands.append(float(states[i]))
    best = min(cands, key=lambda c: (abs(v - c), abs(c), c))
    return best


def quantize_initial(u0, support_radius: float, cells: int, fe: ApproxFlux) -> Profile:
    """Quantize a datum onto the grid x_i = -A + i * (2A/m), values into the grid states.

    Each cell takes the subdivision state nearest to its exact cell average
    (ties toward smaller magnitude); outside [-A, A] the datum is the
    quantization of zero.  ``u0`` is a :class:`Profile` (averages computed
    exactly) or a plain callable (fixed Gauss-Legendre quadrature per cell).
    """
    if support_radius <= 0:
        raise ValueError("need a positive support radius")
    if cells < 1:
        raise ValueError("need at least one cell")
    A = float(support_radius)
    m = int(cells)
    edges = -A + (2.0 * A / m) * np.arange(m + 1)
    edges[-1] = A
    states = fe.states
    if isinstance(u0, Profile):
        lo, hi = u0.bounds()
        if max(abs(lo), abs(hi)) > fe.flux.bound:
            raise ValueError("datum exceeds the state bound")
        averages = [
            u0.integrate(a, b) / (b - a) for a, b in zip(edges[:-1], edges[1:])
        ]
    else:
        nodes, weights = np.polynomial.legendre.leggauss(21)
        averages = []
        for a, b in zip(edges[:-1], edges[1:]):
            x = 0.5 * (a + b) + 0.5 * (b - a) * nodes
            averages.append(0.5 * float(weights @ np.asarray(u0(x), dtype=float)))
    background = quantize_value(states, 0.0)
    values = [background] + [quantize_value(states, av) for av in averages] + [background]
    return simplify_step(edges, values)


def simplify_step(breaks, values) -> Profile:
    """Step profile with repeated neighbor values merged away."""
    b_out, v_out = [], [values[0]]
    for x, v in zip(breaks, values[1:]):
        if v != v_out[-1]:
            b_out.append(float(x))
            v_out.append(v)
    return Profile.step(b_out, v_out)


class TrackerState:
    """Ordered front collection with event log; single-owner mutable."""

    def __init__(self, fe: ApproxFlux, fronts: list[Front], *,
                 support_radius: float, datum_values: list[float]):
        self.fe = fe
        self.fronts = fronts
        self.time = 0.0
        self.events: list[EventRecord] = []
        self.m0 = len(fronts)
        self.support_radius = float(support_radius)
        self.datum_values = [float(v) for v in datum_values]
        self.validate()

    # -- derived datum quantities -------------------------------------------

    @property
    def eps(self) -> float:
        return self.fe.eps

    @property
    def background(self) -> float | None:
        """Common far-field value, or None for non-compact data."""
        if not self.datum_values:
            return None
        if self.datum_values[0] == self.datum_values[-1]:
            return self.datum_values[0]
        return None

    def datum_speed_sup(self) -> float:
        """sup |a(u0)| over the quantized datum values (both one-sided limits)."""
        vals = np.asarray(self.datum_values)
        lo, hi = self.fe.flux.limits(vals)
        return float(max(np.max(np.abs(lo)), np.max(np.abs(hi))))

    # -- invariants -----------------------------------------------------------

    def validate(self):
        states = self.fe.states
        prev_pos = -np.inf
        for j, f in enumerate(self.fronts):
            pos = f.position(self.time)
            if pos < prev_pos - 1e-9:
                raise InvariantViolation("front positions out of order")
            prev_pos = pos
            if f.kind == "S":
                if not f.left > f.right:
                    raise InvariantViolation("shock without decreasing values")
            elif f.kind == "R":
                i = self.fe.subdivision.index_of(f.left)
                if i + 1 >= len(states) or states[i + 1] != f.right:
                    raise InvariantViolation("rarefaction front not on consecutive states")
            else:
                raise InvariantViolation(f"unknown front kind {f.kind!r}")
            if j > 0 and self.fronts[j - 1].right != f.left:
                raise InvariantViolation("region values do not chain")
            if abs(f.left) > self.fe.flux.bound or abs(f.right) > self.fe.flux.bound:
                raise InvariantViolation("front value escaped the state bound")

    def copy(self) -> "TrackerState":
        clone = TrackerState.__new__(TrackerState)
        clone.fe = self.fe
        clone.fronts = [Front(f.x0, f.t0, f.speed, f.left, f.right, f.kind)
                        for f in self.fronts]
        clone.time = self.time
        clone.events = list(self.events)
        clone.m0 = self.m0
        clone.support_radius = self.support_radius
        clone.datum_values = list(self.datum_values)
        return clone

    # -- event loop -----------------------------------------------------------

    def positions(self, t: float | None = None) -> np.ndarray:
        t = self.time if t is None else t
        if not self.fronts:
            return np.empty(0)
        x0 = np.fromiter((f.x0 for f in self.fronts), float, len(self.fronts))
        t0 = np.fromiter((f.t0 for f in self.fronts), float, len(self.fronts))
        s = np.fromiter((f.speed for f in self.fronts), float, len(self.fronts))
        return x0 + s * (t - t0)

    def speeds(self) -> np.ndarray:
        return np.fromiter((f.speed for f in self.fronts), float, len(self.fronts))

    def next_event(self) -> PendingEvent | None:
        """Earliest upcoming collision of an adjacent approaching pair.

        Simultaneous collisions resolve leftmost-first; a pair already in
        contact (equal positions, approaching speeds) fires immediately.
        """
        if len(self.fronts) < 2:
            return None
        x = self.positions()
        s = self.speeds()
        gap = np.diff(x)
        closing = s[:-1] - s[1:]
        with np.errstate(divide="ignore", invalid="ignore"):
            dt = np.where(closing > 0, np.maximum(gap, 0.0) / closing, np.inf)
        if not np.any(np.isfinite(dt)):
            return None
        t_min = float(np.min(dt))
        near = np.flatnonzero(dt <= t_min + TIME_TIE_TOL)
        hit_x = x[near] + s[near] * dt[near]
        j = int(near[np.argmin(hit_x)])
        return PendingEvent(self.time + float(dt[j]), float(x[j] + s[j] * dt[j]), j)

    def resolve_event(self, event: PendingEvent):
        """Replace the colliding pair by the Riemann solution of its endpoints."""
        j = event.index
        fl, fr = self.fronts[j], self.fronts[j + 1]
        if fl.kind == "R" and fr.kind == "R":
            raise InvariantViolation(
                "two rarefaction fronts collided; convexity forbids this"
            )
        u1, u2, u3 = fl.left, fl.right, fr.right
        if fr.left != u2:
            raise InvariantViolation("colliding pair does not chain")
        if u3 > u1:
            raise InvariantViolation("interaction would create a rarefaction")
        waves = solve_approx(self.fe, u1, u3)
        out = [Front(event.x, event.time, w.speed, w.left, w.right, w.kind)
               for w in waves]
        if len(out) >= 2:
            raise InvariantViolation("interaction produced more than one front")
        if fl.kind == "S" and fr.kind == "S":
            label = "SS"
        elif u1 == u3:
            label = "cancel"
        elif fl.kind == "R":
            label = "RS"
        else:
            label = "SR"
        self.fronts[j:j + 2] = out
        self.events.append(
            EventRecord(event.time, event.x, label, 2, len(out))
        )

    def advance_to(self, t: float) -> "TrackerState":
        """Process every event up to and including time t, then sit at t."""
        if t < self.time - TIME_TIE_TOL:
            raise ValueError("cannot advance backwards")
        while True:
            ev = self.next_event()
            if ev is None or ev.time > t:
                break
            self.time = max(self.time, ev.time)
            self.resolve_event(ev)
        self.time = max(self.time, t)
        return self

    def event_times(self) -> list[float]:
        return [e.time for e in self.events]

    # -- sampling -------------------------------------------------------------

    def _grouped(self) -> tuple[np.ndarray, list[tuple[int, int]]]:
        """Front positions grouped by coincidence: (group positions, index spans)."""
        x = self.positions()
        groups: list[tuple[int, int]] = []
        pos: list[float] = []
        i = 0
        while i < len(x):
            k = i
            while k + 1 < len(x) and x[k + 1] <= x[i]:
                k += 1
            groups.append((i, k))
            pos.append(float(x[i]))
            i = k + 1
        return np.asarray(pos), groups

    def region_table(self) -> list[dict]:
        """Constant regions at the current time, left to right.

        Zero-width regions (inside a coincident front group) are dropped;
        each row carries the region value, its modified velocity, and the
        kinds of its bounding fronts.
        """
        flux = self.fe.flux
        if not self.fronts:
            v = self.datum_values[0] if self.datum_values else 0.0
            return [{
                "x_left": -np.inf, "x_right": np.inf, "u": v,
                "chi": float(flux.mean_velocity(v)),
                "left_kind": "", "right_kind": "",
            }]
        pos, groups = self._grouped()
        rows = []
        bounds_left = [None] + [self.fronts[g[1]] for g in groups]
        bounds_right = [self.fronts[g[0]] for g in groups] + [None]
        edges_left = np.concatenate([[-np.inf], pos])
        edges_right = np.concatenate([pos, [np.inf]])
        for bl, br, xl, xr in zip(bounds_left, bounds_right, edges_left, edges_right):
            u = br.left if br is not None else bounds_left[-1].right
            lk = bl.kind if bl is not None else ""
            rk = br.kind if br is not None else ""
            if lk == "S" and rk == "R":
                chi = flux.limits(u)[1]
            elif lk == "R" and rk == "S":
                chi = flux.limits(u)[0]
            else:
                chi = flux.mean_velocity(u)
            rows.append({
                "x_left": float(xl), "x_right": float(xr), "u": float(u),
                "chi": float(chi), "left_kind": lk, "right_kind": rk,
            })
        return rows

    def solution_profile(self) -> Profile:
        rows = self.region_table()
        return Profile.step([r["x_right"] for r in rows[:-1]],
                            [r["u"] for r in rows])

    def chi_profile(self) -> Profile:
        rows = self.region_table()
        return Profile.step([r["x_right"] for r in rows[:-1]],
                            [r["chi"] for r in rows])

    def _region_at(self, x: float) -> dict:
        rows = self._regions_cached()
        edges = np.fromiter((r["x_right"] for r in rows[:-1]), float, len(rows) - 1)
        return rows[int(np.searchsorted(edges, x, side="right"))]

    def _regions_cached(self) -> list[dict]:
        key = (self.time, len(self.fronts), len(self.events))
        if getattr(self, "_region_key", None) != key:
            self._region_rows = self.region_table()
            self._region_key = key
        return self._region_rows

    def sample_solution(self, t: float, x: float) -> float:
        """Region value at (t, x); the right limit at a front position."""
        self._require_time(t)
        return self._region_at(x)["u"]

    def sample_chi(self, t: float, x: float) -> float:
        """Modified velocity at (t, x); b(chi) reproduces the solution value."""
        self._require_time(t)
        return self._region_at(x)["chi"]

    def _require_time(self, t: float):
        if abs(t - self.time) > TIME_TIE_TOL:
            raise ValueError("advance the state to t before sampling")

    # -- integral quantities ----------------------------------------------------

    def conserved_integral(self) -> float:
        """Exact integral of (u - background) over the line."""
        bg = self.background
        if bg is None:
            raise ValueError("conservation integral needs a compact datum")
        total = 0.0
        for r in self.region_table():
            if np.isfinite(r["x_left"]) and np.isfinite(r["x_right"]):
                total += (r["u"] - bg) * (r["x_right"] - r["x_left"])
        return total

    def support_span(self) -> float:
        """Diameter of the front hull at the current time; 0 without fronts."""
        if len(self.fronts) < 2:
            return 0.0
        x = self.positions()
        return float(x[-1] - x[0])

    def rarefaction_count(self) -> int:
        return sum(1 for f in self.fronts if f.kind == "R")


def init_tracker(steps: Profile, fe: ApproxFlux, *,
                 support_radius: float | None = None) -> TrackerState:
    """Solve one Riemann problem per datum jump and concatenate the fans.

    Datum values must be subdivision states.  The support radius defaults
    to the outermost datum breakpoint.
    """
    if not steps.is_step:
        raise ValueError("tracker data must be a step profile")
    if len(steps.xs) == 0:
        values = [steps.constant]
        fe.subdivision.index_of(steps.constant)
        return TrackerState(fe, [], support_radius=support_radius or 1.0,
                            datum_values=values)
    values = [float(steps.y_left[0])] + [float(v) for v in steps.y_right]
    for v in values:
        fe.subdivision.index_of(v)
    fronts: list[Front] = []
    for x, vl, vr in zip(steps.xs, steps.y_left, steps.y_right):
        for w in solve_approx(fe, float(vl), float(vr)):
            fronts.append(Front(float(x), 0.0, w.speed, w.left, w.right, w.kind))
    A = support_radius if support_radius is not None else float(np.max(np.abs(steps.xs)))
    return TrackerState(fe, fronts, support_radius=A, datum_values=values)
