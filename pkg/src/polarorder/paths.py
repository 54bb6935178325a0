"""Capacity transport along paths in the (u, v) plane, loops, and grids.

A path step du to the right applies an infinitesimal 0-map of exponent
P(u - v) du; a step dv upward applies a 1-map of exponent Q(u - v) dv,
with P, Q read off an alignment-flow trajectory at the diagonal
coordinate t = u - v.  Transport therefore solves

    dX/ds = ln(2) [ P(t(s)) X ln(X) u'(s) - Q(t(s)) (1-X) ln(1-X) v'(s) ]

(the ln(2) factor is what makes a unit rightward segment with P = 1
equal exactly step0(x, 1); see the derivative of x^(2^p) in p).

Two facts drive everything here.  Transport started at x = Y(t(0))
rides the flow: X(s) = Y(t(s)), so any loop with t(0) = t(S) = 0 fixes
1/2.  And around a simple closed loop, transport is >= x for
counterclockwise orientation and <= x for clockwise, with near-equality
pinned at x = Y(t of the start corner).  Grids of small squares whose
edge exponents are delta*P / delta*Q at the edge midpoints realize the
local inequalities of `localforms` square by square, which is how the
loop inequality is assembled.

X is integrated as ln(X), which keeps both endpoint regions honest:
near X = 0 the state is simply large and negative, and near X = 1 the
complement 1 - X is recovered from expm1 at full relative precision.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .ivp import Trajectory
from .words import PolarWord, eval_word_array

__all__ = [
    "Path",
    "transport",
    "LoopReport",
    "loop_verdict",
    "GridSpec",
    "emit_grid",
    "grid_from_diagonals",
    "REFERENCE_DIAGONALS",
    "SquareReport",
    "GridReport",
    "verify_grid",
    "staircase_word",
]

LN2 = math.log(2.0)

# Edge exponents of a published 6x4-vertex demonstration grid, one value
# per diagonal; rightward edges read the list at (5 - t) and upward edges
# at (t + 3), t being the vertex diagonal u - v.  The first and last
# entries pad the scheme for larger grids of the same family.
REFERENCE_DIAGONALS = (0.616, 0.632, 0.677, 0.764, 0.906, 1.122,
                       1.450, 1.969, 2.818, 4.211)


def _orient(p, q, r):
    d = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    if abs(d) < 1e-12:
        return 0
    return 1 if d > 0 else -1


def _on_segment(p, q, r):
    return (min(p[0], r[0]) - 1e-12 <= q[0] <= max(p[0], r[0]) + 1e-12 and
            min(p[1], r[1]) - 1e-12 <= q[1] <= max(p[1], r[1]) + 1e-12)


def _segments_intersect(a, b, c, d):
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(a, c, b):
        return True
    if o2 == 0 and _on_segment(a, d, b):
        return True
    if o3 == 0 and _orient(c, a, d) == 0 and _on_segment(c, a, d):
        return True
    if o4 == 0 and _orient(c, b, d) == 0 and _on_segment(c, b, d):
        return True
    return False


@dataclass(frozen=True)
class Path:
    """Piecewise-linear curve; every segment axis-aligned or 45-degree.

    Vertices are (u, v) pairs.  `closed` paths must end where they start
    and, for loop verdicts, must not self-intersect anywhere else.
    """

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        vs = tuple((float(u), float(v)) for u, v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        if len(vs) < 1:
            raise ValueError("path needs at least one vertex")
        for (u0, v0), (u1, v1) in self.steps():
            du, dv = u1 - u0, v1 - v0
            if du == 0 and dv == 0:
                raise ValueError("consecutive path vertices must be distinct")
            if du != 0 and dv != 0 and abs(abs(du) - abs(dv)) > 1e-12:
                raise ValueError("path segments must be axis-aligned or diagonal")

    def steps(self):
        return list(zip(self.vertices[:-1], self.vertices[1:]))

    @property
    def closed(self) -> bool:
        return len(self.vertices) > 2 and self.vertices[0] == self.vertices[-1]

    def t_range(self) -> tuple[float, float]:
        ts = [u - v for u, v in self.vertices]
        return min(ts), max(ts)

    def is_simple_loop(self) -> bool:
        """Closed and free of self-intersections except the closing vertex."""
        if not self.closed:
            return False
        segs = self.steps()
        n = len(segs)
        for i in range(n):
            for j in range(i + 1, n):
                a, b = segs[i]
                c, d = segs[j]
                adjacent = (j == i + 1) or (i == 0 and j == n - 1)
                if adjacent:
                    shared = b if j == i + 1 else a
                    # adjacent segments may touch only at the shared vertex
                    probe_pairs = [(a, c), (a, d), (b, c), (b, d)]
                    touch = sum(1 for p, q in probe_pairs
                                if p == q)
                    if touch != 1:
                        return False
                    if _orient(a, b, d if j == i + 1 else c) == 0 and \
                       _segments_intersect(a, b, c, d):
                        # collinear overlap (backtracking)
                        mid = ((c[0] + d[0]) / 2, (c[1] + d[1]) / 2)
                        if _on_segment(a, mid, b) and mid != shared:
                            return False
                    continue
                if _segments_intersect(a, b, c, d):
                    return False
        return True

    def orientation(self) -> int:
        """+1 counterclockwise, -1 clockwise (shoelace sign)."""
        area2 = 0.0
        for (u0, v0), (u1, v1) in self.steps():
            area2 += u0 * v1 - u1 * v0
        if area2 == 0:
            raise ValueError("degenerate loop: zero enclosed area")
        return 1 if area2 > 0 else -1

    def reversed(self) -> "Path":
        return Path(tuple(self.vertices[::-1]))


def _transport_log(a: float, path: Path, traj: Trajectory,
                   rtol: float, atol: float) -> float:
    """Advance ln(X) along every segment of the path."""
    for (u0, v0), (u1, v1) in path.steps():
        du, dv = u1 - u0, v1 - v0
        length = math.hypot(du, dv)
        dus, dvs = du / length, dv / length

        def rhs(s, av):
            a_ = min(av[0], 0.0)
            x = math.exp(a_)
            t = (u0 + dus * s) - (v0 + dvs * s)
            drift = traj.p_of(t) * a_ * dus if dus != 0.0 else 0.0
            if dvs != 0.0 and a_ < 0.0:
                w = -math.expm1(a_)  # 1 - X at full relative precision
                lw = math.log(w) if w <= 0.5 else math.log1p(-x)
                drift -= traj.q_of(t) * w * lw / x * dvs
            return (LN2 * drift,)

        res = solve_ivp(rhs, (0.0, length), (a,), method="DOP853",
                        rtol=rtol, atol=atol)
        if not res.success:
            raise ArithmeticError(
                f"transport stalled on segment {(u0, v0)}->{(u1, v1)}: {res.message}")
        a = min(float(res.y[0, -1]), 0.0)
        if a == -math.inf:
            raise ArithmeticError("transport underflowed the log domain")
    return a


def transport(path: Path, x0: float, traj: Trajectory, *,
              rtol: float = 1e-12, atol: float = 1e-14) -> float:
    """Carry the capacity x0 along the path; returns X at the far end."""
    if not 0.0 <= x0 <= 1.0:
        raise ValueError("x0 must lie in [0, 1]")
    lo, hi = path.t_range()
    if max(abs(lo), abs(hi)) > traj.t_max + 1e-12:
        raise ValueError(
            f"path diagonal range [{lo:.4g}, {hi:.4g}] exceeds trajectory range "
            f"+-{traj.t_max}")
    if x0 == 0.0 or x0 == 1.0 or len(path.vertices) == 1:
        return x0
    return math.exp(_transport_log(math.log(x0), path, traj, rtol, atol))


@dataclass(frozen=True)
class LoopReport:
    """Loop inequality check: transport around a simple closed loop."""

    orientation: int            # +1 ccw (transport >= x), -1 cw (<= x)
    holds: bool
    worst_gap: float            # most violating signed gap
    worst_x: float
    near_equality_x: float      # refined location of the smallest |gap|
    equality_reference: float   # Y at the loop's starting diagonal
    tolerance: float
    samples_used: int

    @property
    def near_equality_distance(self) -> float:
        return abs(self.near_equality_x - self.equality_reference)

    def to_json(self) -> str:
        return json.dumps(
            {
                "orientation": "ccw" if self.orientation > 0 else "cw",
                "relation": ("transport >= x" if self.orientation > 0
                             else "transport <= x"),
                "holds": self.holds,
                "worst_gap": self.worst_gap,
                "worst_x": self.worst_x,
                "near_equality_x": self.near_equality_x,
                "equality_reference": self.equality_reference,
                "near_equality_distance": self.near_equality_distance,
                "tolerance": self.tolerance,
                "samples_used": self.samples_used,
            },
            sort_keys=True,
        )


def loop_verdict(loop: Path, traj: Trajectory,
                 xs: Optional[Sequence[float]] = None,
                 tol: float = 1e-9) -> LoopReport:
    """Check transport(loop, x) >= x - tol (ccw; reversed for cw) on samples.

    Also locates the sample of nearest equality and reports its distance
    target Y(t(0)), where the theory pins the equality point.
    """
    if not loop.closed:
        raise ValueError("loop must be closed (first vertex equals last)")
    if not loop.is_simple_loop():
        raise ValueError("loop must not self-intersect away from its endpoints")
    sign = loop.orientation()
    if xs is None:
        xs = [(i + 0.5) / 100 for i in range(100)]
    u0, v0 = loop.vertices[0]
    y_ref = traj.sample(u0 - v0).Y

    xs = list(xs)
    worst_gap, worst_x = math.inf, math.nan
    near_i = 0
    near_abs = math.inf
    for i, x in enumerate(xs):
        g = sign * (transport(loop, x, traj) - x)
        if g < worst_gap:
            worst_gap, worst_x = g, x
        if abs(g) < near_abs:
            near_abs, near_i = abs(g), i
    # refine the near-equality location inside its sample bracket
    lo = xs[near_i - 1] if near_i > 0 else 0.0
    hi = xs[near_i + 1] if near_i < len(xs) - 1 else 1.0
    res = minimize_scalar(lambda x: abs(transport(loop, x, traj) - x),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-7})
    near_x = float(res.x) if res.fun <= near_abs else xs[near_i]
    return LoopReport(
        orientation=sign,
        holds=worst_gap >= -tol,
        worst_gap=sign * worst_gap,
        worst_x=worst_x,
        near_equality_x=near_x,
        equality_reference=y_ref,
        tolerance=tol,
        samples_used=len(list(xs)),
    )


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid of unit squares with per-edge exponents.

    horizontal[i][j] is the 0-map exponent of the rightward edge from
    vertex (i, j); vertical[i][j] the 1-map exponent of the upward edge
    from vertex (i, j).  width x height counts squares.  delta is the
    cell size in diagonal units (0 for grids given as bare data).
    """

    width: int
    height: int
    delta: float
    horizontal: tuple[tuple[float, ...], ...]  # width x (height+1)
    vertical: tuple[tuple[float, ...], ...]    # (width+1) x height

    def __post_init__(self):
        if len(self.horizontal) != self.width or any(
                len(col) != self.height + 1 for col in self.horizontal):
            raise ValueError("horizontal exponent array must be width x (height+1)")
        if len(self.vertical) != self.width + 1 or any(
                len(col) != self.height for col in self.vertical):
            raise ValueError("vertical exponent array must be (width+1) x height")

    def square(self, i: int, j: int):
        """(p, q, r, s) = (south, east, west, north) exponents of square (i, j)."""
        return (self.horizontal[i][j], self.vertical[i + 1][j],
                self.vertical[i][j], self.horizontal[i][j + 1])

    def to_json(self) -> str:
        return json.dumps(
            {
                "width": self.width,
                "height": self.height,
                "delta": self.delta,
                "horizontal": [list(c) for c in self.horizontal],
                "vertical": [list(c) for c in self.vertical],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "GridSpec":
        d = json.loads(text)
        return cls(
            width=d["width"], height=d["height"], delta=d["delta"],
            horizontal=tuple(tuple(c) for c in d["horizontal"]),
            vertical=tuple(tuple(c) for c in d["vertical"]),
        )


def emit_grid(width: int, height: int, delta: float, traj: Trajectory,
              t_origin: float = 0.0) -> GridSpec:
    """Grid whose edges carry delta*P / delta*Q at the edge midpoints.

    The grid is centered (in the diagonal coordinate) on t_origin.
    Rightward edges carry the 0-map exponent delta*P(t_mid); upward
    edges carry delta*Q(t_mid).  Exponents are constant along diagonals
    of constant t, and every unit square realizes the aligned local
    inequality up to the flow's own truncation order.
    """
    if width < 1 or height < 1:
        raise ValueError("grid needs at least one square")
    if delta <= 0:
        raise ValueError("delta must be positive")
    t_sw = t_origin - (width - height) * delta / 2.0
    lo = t_sw - (height + 0.5) * delta
    hi = t_sw + (width + 0.5) * delta
    if max(abs(lo), abs(hi)) > traj.t_max:
        raise ValueError("grid diagonal range exceeds the trajectory range")
    horizontal = tuple(
        tuple(delta * traj.p_of(t_sw + (i - j + 0.5) * delta)
              for j in range(height + 1))
        for i in range(width))
    vertical = tuple(
        tuple(delta * traj.q_of(t_sw + (i - j - 0.5) * delta)
              for j in range(height))
        for i in range(width + 1))
    return GridSpec(width=width, height=height, delta=delta,
                    horizontal=horizontal, vertical=vertical)


def grid_from_diagonals(values: Sequence[float] = REFERENCE_DIAGONALS,
                        width: int = 5, height: int = 3) -> GridSpec:
    """Grid whose edge exponents are keyed by the vertex diagonal t = u - v.

    Rightward edges from vertex (i, j) read values[5 - (i - j)]; upward
    edges read values[(i - j) + 3].  The defaults reproduce the published
    6x4-vertex demonstration grid (15 squares).
    """
    horizontal = tuple(
        tuple(float(values[j - i + 5]) for j in range(height + 1))
        for i in range(width))
    vertical = tuple(
        tuple(float(values[i - j + 3]) for j in range(height))
        for i in range(width + 1))
    return GridSpec(width=width, height=height, delta=0.0,
                    horizontal=horizontal, vertical=vertical)


@dataclass(frozen=True)
class SquareReport:
    i: int
    j: int
    min_gap: float
    witness_x: float


@dataclass(frozen=True)
class GridReport:
    """Per-square minimum gaps for right-up versus up-right."""

    squares: tuple[SquareReport, ...]
    tolerance: float

    @property
    def holds(self) -> bool:
        return all(sq.min_gap >= -self.tolerance for sq in self.squares)

    @property
    def worst(self) -> SquareReport:
        return min(self.squares, key=lambda sq: sq.min_gap)

    def to_csv(self) -> str:
        lines = ["i,j,min_gap,witness_x"]
        for sq in self.squares:
            lines.append(f"{sq.i},{sq.j},{sq.min_gap!r},{sq.witness_x!r}")
        return "\n".join(lines) + "\n"


def verify_grid(grid: GridSpec, samples: int = 201,
                tol: float = 1e-9) -> GridReport:
    """Check step1(step0(x, p), q) >= step0(step1(x, r), s) - tol per square.

    p, q are the south and east exponents (right then up), r, s the west
    and north (up then right).  Gaps are sampled on a uniform interior
    grid; the per-square minimum and its location are reported.
    """
    xs = np.linspace(0.0, 1.0, samples + 2)[1:-1]
    reports = []
    for i in range(grid.width):
        for j in range(grid.height):
            p, q, r, s = grid.square(i, j)
            left = eval_word_array(PolarWord.from_pairs([(0, p), (1, q)]), xs)
            right = eval_word_array(PolarWord.from_pairs([(1, r), (0, s)]), xs)
            d = left - right
            k = int(np.argmin(d))
            reports.append(SquareReport(i=i, j=j, min_gap=float(d[k]),
                                        witness_x=float(xs[k])))
    return GridReport(squares=tuple(reports), tolerance=tol)


def staircase_word(path: Path, traj: Trajectory) -> PolarWord:
    """The word equivalent to transport along an axis-aligned staircase.

    Each rightward run contributes a 0-segment of exponent equal to the
    P-mass over its diagonal interval; each upward run a 1-segment of
    the Q-mass; leftward and downward runs contribute the negated
    masses (inverse maps).
    """
    pairs = []
    for (u0, v0), (u1, v1) in path.steps():
        if v0 == v1:
            pairs.append((0, traj.p_mass(u0 - v0, u1 - v0)))
        elif u0 == u1:
            pairs.append((1, traj.q_mass(u0 - v1, u0 - v0)))
        else:
            raise ValueError("staircase_word needs axis-aligned segments only")
    return PolarWord.from_pairs(pairs)
