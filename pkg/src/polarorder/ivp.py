"""The six-variable alignment flow and its robust numerical solution.

The flow couples (Y, Z, P, Q, J, K) as functions of a diagonal
coordinate t:

    Y(0) = 1/2,   Y' =  ln(2) P Y ln Y,
    Z(0) = 1/2,   Z' = -ln(2) Q Z ln Z,
    P(0) = 1,     P' = -ln(2) (1 - J) P Q,
    Q(0) = 1,     Q' =  ln(2) (1 - K) P Q,
    J(0) = K(0) = ln 2,

with (J, K) determined algebraically at every instant by the alignment
system of `localforms` evaluated at Y (an index-1 differential-algebraic
system, closed by constraint elimination).  Y tracks the equality point
of the local inequalities, Z stays equal to 1 - Y, P and Q are the local
0/1 exponent densities, and m(mu) = int_0^mu P dt, M(mu) = int_0^mu Q dt
are the accumulated word exponents.

Why the log domain: Y decays doubly exponentially (Q grows like 2^t, so
ln Y ~ -2^t), and a solver carrying Y and Z directly loses ln(Z) to
roundoff once Z rounds to 1, which corrupts the constraint solve and
silently wrecks P and Q around t of 7.  We integrate A = ln Y and
B = ln Z instead:

    A' =  ln(2) P A,    B' = -ln(2) Q B,

where both right-hand sides are mild.  Y + Z = 1 is NOT substituted in;
e^A + e^B - 1 is monitored as an independent correctness signal, as are
the two constraint rows and the certified envelope bounds below.
`integrate_untransformed` runs the naive coordinates on purpose so the
failure stays reproducible.

Certified envelope (for t >= 0; mirrored for t < 0):

    Y in [2^-2^t, 1 - 2^-2^-t]      Z in [2^-2^-t, 1 - 2^-2^t]
    P in [e^(1-2^t), 1]             Q in [1, 2^t]
    J in [k(2^-2^-t), j(2^-2^t)]    K in [k(2^-2^t), j(2^-2^-t)]

Negative times are served by the exact mirror symmetry
(Y,Z,P,Q,J,K)(t) = (Z,Y,Q,P,K,J)(-t) rather than by backward
integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .localforms import _g_forms, _h_forms, DETERMINANT_GUARD, solve_jk

__all__ = [
    "IvpState",
    "Trajectory",
    "initial_state",
    "constraint_jk",
    "integrate",
    "sample",
    "exponent_integrals",
    "envelope_bounds",
    "integrate_untransformed",
    "UntransformedRun",
    "IntegrationError",
    "BoundsViolationError",
    "DEFAULT_TOL",
    "TABLE_TIMES",
]

LN2 = math.log(2.0)
DEFAULT_TOL = 1e-10
T_MAX_LIMIT = 40.0

# output grid matching the reference table: t = 0, 0.1, ..., 10
TABLE_TIMES = tuple(round(0.1 * i, 10) for i in range(101))


class IntegrationError(RuntimeError):
    """Integration stopped early; `t_reached` tells where."""

    def __init__(self, message, t_reached):
        super().__init__(message)
        self.t_reached = t_reached


class BoundsViolationError(RuntimeError):
    """A certified envelope bound failed beyond the allowed slack."""

    def __init__(self, message, t, bound):
        super().__init__(message)
        self.t = t
        self.bound = bound


def _jk_of_y(y: float) -> tuple[float, float]:
    """(j, k) at y, accepting the closed interval: endpoint limits at 0/1."""
    if y < 1e-250:
        return 1.0, 0.0
    if y > 1.0 - 1e-250:
        return 0.0, 1.0
    g, gp, _ = _g_forms(y)
    h, hp, _ = _h_forms(y)
    w = g * hp - gp * h
    if abs(w) < DETERMINANT_GUARD:
        raise ArithmeticError(f"alignment determinant collapsed at y={y}")
    return -hp / w, gp / w


@dataclass(frozen=True)
class IvpState:
    """Flow state at one time, with log-domain copies of Y and Z.

    `lnY`/`lnZ` carry full relative precision even when Y underflows the
    value range or Z rounds to 1; the residual methods use them.
    """

    t: float
    Y: float
    Z: float
    P: float
    Q: float
    J: float
    K: float
    lnY: float
    lnZ: float

    def conservation_residual(self) -> float:
        return self.Y + self.Z - 1.0

    def constraint_residuals(self) -> tuple[float, float]:
        """Residuals of the two alignment rows.

        Row 1, (Y/lnZ) J + (Z/lnY) K + 1, is evaluated from the
        independently integrated logs and genuinely measures A/B
        consistency.  Row 2 is evaluated through the stabilized
        derivative forms (the raw row is not float-computable once
        Z rounds to 1; that failure mode is what the untransformed
        regression demonstrates).
        """
        r1 = (self.Y / self.lnZ) * self.J + (self.Z / self.lnY) * self.K + 1.0
        y = min(max(self.Y, 5e-324), 1.0 - 1e-17)
        _, gp, _ = _g_forms(y)
        _, hp, _ = _h_forms(y)
        r2 = gp * self.J + hp * self.K
        return r1, r2

    def envelope_violations(self, slack: float = 1e-9) -> list[str]:
        """Names of certified bounds this state violates beyond `slack`."""
        return _violations(self, slack)

    def row(self) -> tuple[float, float, float, float, float, float, float]:
        return (self.t, self.Y, self.Z, self.P, self.Q, self.J, self.K)


def initial_state() -> IvpState:
    """The flow's initial data: Y = Z = 1/2, P = Q = 1, J = K = ln 2."""
    half = math.log(0.5)
    return IvpState(t=0.0, Y=0.5, Z=0.5, P=1.0, Q=1.0, J=LN2, K=LN2,
                    lnY=half, lnZ=half)


def constraint_jk(Y: float, Z: float) -> tuple[float, float]:
    """Solve the two linear alignment rows for (J, K) given Y and Z.

    On the conserved manifold Z = 1 - Y this coincides with solve_jk(Y)
    and is evaluated through the stabilized forms.  Off the manifold the
    literal 2x2 system is solved; it is exact in principle but becomes
    ill-conditioned as Z approaches 1, which callers opting out of the
    log-domain transform get to observe.
    """
    if not (0.0 < Y < 1.0 and 0.0 < Z < 1.0):
        raise ValueError(f"constraint_jk needs Y, Z in (0, 1), got {Y}, {Z}")
    if abs(Y + Z - 1.0) <= 1e-9:
        return _jk_of_y(Y)
    lnY, lnZ = math.log(Y), math.log(Z)
    a11, a12 = Y / lnZ, Z / lnY
    a21 = (Z * lnZ + Y) / (Z * lnZ * lnZ)
    a22 = -(Y * lnY + Z) / (Y * lnY * lnY)
    det = a11 * a22 - a12 * a21
    if abs(det) < DETERMINANT_GUARD:
        raise ArithmeticError(f"constraint determinant collapsed at Y={Y}, Z={Z}")
    return -a22 / det, a21 / det


def _flow_rhs(t, s):
    A, B, P, Q = s[0], s[1], s[2], s[3]
    J, K = _jk_of_y(math.exp(A))
    pq = P * Q
    return (LN2 * P * A, -LN2 * Q * B, -LN2 * (1.0 - J) * pq,
            LN2 * (1.0 - K) * pq, P, Q)


class _FixedRk4:
    """Classic fourth-order fixed-step run with cubic Hermite sampling."""

    def __init__(self, f, t0, t1, y0, h):
        ts = [t0]
        ys = [np.asarray(y0, dtype=float)]
        fs = [np.asarray(f(t0, ys[0]), dtype=float)]
        n = max(1, int(round((t1 - t0) / h)))
        h = (t1 - t0) / n
        t, y = t0, ys[0]
        for _ in range(n):
            k1 = fs[-1]
            k2 = np.asarray(f(t + h / 2, y + h / 2 * k1))
            k3 = np.asarray(f(t + h / 2, y + h / 2 * k2))
            k4 = np.asarray(f(t + h, y + h * k3))
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
            ts.append(t)
            ys.append(y)
            fs.append(np.asarray(f(t, y), dtype=float))
        self.ts = np.array(ts)
        self.ys = np.array(ys)
        self.fs = np.array(fs)

    def __call__(self, t):
        i = int(np.clip(np.searchsorted(self.ts, t, side="right") - 1, 0,
                        len(self.ts) - 2))
        t0, t1 = self.ts[i], self.ts[i + 1]
        h = t1 - t0
        u = (t - t0) / h
        y0, y1, f0, f1 = self.ys[i], self.ys[i + 1], self.fs[i], self.fs[i + 1]
        h00 = (1 + 2 * u) * (1 - u) ** 2
        h10 = u * (1 - u) ** 2
        h01 = u * u * (3 - 2 * u)
        h11 = u * u * (u - 1)
        return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


@dataclass(frozen=True)
class Trajectory:
    """Dense solution of the alignment flow on [-t_max, t_max].

    Integration is carried out once on [0, t_max]; negative times are
    the exact mirror (Z,Y,Q,P,K,J)(-t).  The two trailing components of
    the integrated state accumulate int_0^t P and int_0^t Q, so exponent
    masses over any t-interval come from the dense output rather than
    from re-quadrature.
    """

    t_max: float
    tol: float
    _dense: Callable
    n_steps: int

    def _raw(self, t: float) -> np.ndarray:
        return np.asarray(self._dense(t), dtype=float)

    def sample(self, t: float) -> IvpState:
        """State at any t with |t| <= t_max (mirror for t < 0)."""
        if abs(t) > self.t_max + 1e-12:
            raise ValueError(f"t={t} outside trajectory range [-{self.t_max}, {self.t_max}]")
        A, B, P, Q, _, _ = self._raw(abs(t))
        if t >= 0:
            Y, Z = math.exp(A), math.exp(B)
            J, K = _jk_of_y(Y)
            return IvpState(t=t, Y=Y, Z=Z, P=P, Q=Q, J=J, K=K, lnY=A, lnZ=B)
        Y, Z = math.exp(B), math.exp(A)
        J, K = _jk_of_y(Y)
        return IvpState(t=t, Y=Y, Z=Z, P=Q, Q=P, J=J, K=K, lnY=B, lnZ=A)

    def states(self, ts: Sequence[float]) -> list[IvpState]:
        return [self.sample(t) for t in ts]

    def exponent_integrals(self, mu: float) -> tuple[float, float]:
        """(m, M) = (int_0^mu P, int_0^mu Q) for 0 <= mu <= t_max."""
        if mu < 0:
            raise ValueError("mu must be nonnegative")
        if mu > self.t_max + 1e-12:
            raise ValueError(f"mu={mu} beyond trajectory range {self.t_max}")
        _, _, _, _, m, M = self._raw(mu)
        return m, M

    # signed antiderivatives of P and Q over the whole line, via the mirror
    # identities P(-t) = Q(t) and Q(-t) = P(t)
    def p_of(self, t: float) -> float:
        s = self._raw(abs(t))
        return s[2] if t >= 0 else s[3]

    def q_of(self, t: float) -> float:
        s = self._raw(abs(t))
        return s[3] if t >= 0 else s[2]

    def p_antiderivative(self, t: float) -> float:
        s = self._raw(abs(t))
        return s[4] if t >= 0 else -s[5]

    def q_antiderivative(self, t: float) -> float:
        s = self._raw(abs(t))
        return s[5] if t >= 0 else -s[4]

    def p_mass(self, t0: float, t1: float) -> float:
        """int_{t0}^{t1} P(t) dt (any sign of the endpoints)."""
        return self.p_antiderivative(t1) - self.p_antiderivative(t0)

    def q_mass(self, t0: float, t1: float) -> float:
        return self.q_antiderivative(t1) - self.q_antiderivative(t0)

    def table(self, ts: Sequence[float] = TABLE_TIMES) -> list[IvpState]:
        return self.states([t for t in ts if abs(t) <= self.t_max + 1e-12])

    def table_csv(self, ts: Sequence[float] = TABLE_TIMES, decimals: int = 5) -> str:
        """CSV with header t,Y,Z,P,Q,J,K; fixed decimals unless decimals < 0."""
        lines = ["t,Y,Z,P,Q,J,K"]
        for st in self.table(ts):
            if decimals >= 0:
                vals = [f"{v:.{decimals}f}" for v in st.row()]
                vals[0] = f"{st.t:g}"
            else:
                vals = [repr(v) for v in st.row()]
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"


def envelope_bounds(t: float) -> dict[str, tuple[float, float]]:
    """Certified (lower, upper) envelopes for each variable at time t >= 0."""
    if t < 0:
        raise ValueError("envelope bounds are stated for t >= 0; mirror for t < 0")
    pow2t = 2.0 ** t
    lo_fast = 2.0 ** (-pow2t)          # 2^-2^t, underflows harmlessly to 0
    lo_slow = 2.0 ** (-(2.0 ** -t))    # 2^-2^-t, close to 1 for large t
    p_floor = math.exp(1.0 - pow2t) if pow2t < 700 else 0.0
    j_at_fast, k_at_fast = _jk_of_y(lo_fast)
    j_at_slow, k_at_slow = _jk_of_y(lo_slow)
    return {
        "Y": (lo_fast, 1.0 - lo_slow),
        "Z": (lo_slow, 1.0 - lo_fast),
        "P": (p_floor, 1.0),
        "Q": (1.0, pow2t),
        "J": (k_at_slow, j_at_fast),
        "K": (k_at_fast, j_at_slow),
    }


def _violations(state: IvpState, slack: float) -> list[str]:
    t = abs(state.t)
    bounds = envelope_bounds(t)
    if state.t >= 0:
        vals = dict(Y=state.Y, Z=state.Z, P=state.P, Q=state.Q, J=state.J, K=state.K)
    else:  # mirrored variables obey the mirrored envelope
        vals = dict(Y=state.Z, Z=state.Y, P=state.Q, Q=state.P, J=state.K, K=state.J)
    out = []
    for name, (lo, hi) in bounds.items():
        v = vals[name]
        if v < lo - slack:
            out.append(f"{name}>={lo:.6g}")
        elif v > hi + slack:
            out.append(f"{name}<={hi:.6g}")
    return out


def integrate(t_max: float = 10.0, tol: float = DEFAULT_TOL, *,
              fixed_step: Optional[float] = None,
              monitor: bool = True,
              bound_slack: Optional[float] = None) -> Trajectory:
    """Integrate the transformed flow on [0, t_max] with dense output.

    Parameters
    ----------
    t_max : final time, at most 40 (past that even the transformed state
        saturates the exponent budget of doubles).
    tol : accuracy target in [1e-13, 1e-6].  The log variables A, B are
        driven at tol/1024 relative so the constraint-row residual (their
        mutual consistency) stays an order below the 1e-9 budget.
    fixed_step : run the classic fixed-step fourth-order scheme at this
        step instead of the adaptive pair (reproducibility experiments).
    monitor : scan the output for certified-bound violations and raise
        BoundsViolationError beyond the slack (default max(10*tol, 1e-9)).
    """
    if not 0.0 < t_max <= T_MAX_LIMIT:
        raise ValueError(f"t_max must lie in (0, {T_MAX_LIMIT}], got {t_max}")
    if not 1e-13 <= tol <= 1e-6:
        raise ValueError(f"tol must lie in [1e-13, 1e-6], got {tol}")
    y0 = (math.log(0.5), math.log(0.5), 1.0, 1.0, 0.0, 0.0)
    if fixed_step is not None:
        dense = _FixedRk4(_flow_rhs, 0.0, t_max, y0, fixed_step)
        traj = Trajectory(t_max=t_max, tol=tol, _dense=dense,
                          n_steps=len(dense.ts) - 1)
    else:
        rtol = [tol / 1024, tol / 1024, tol, tol, tol, tol]
        atol = [1e-300, 1e-300, tol * 1e-3, tol * 1e-3, tol * 1e-3, tol * 1e-3]
        sol = solve_ivp(_flow_rhs, (0.0, t_max), y0, method="DOP853",
                        rtol=rtol, atol=atol, dense_output=True, max_step=0.1)
        if not sol.success:
            raise IntegrationError(
                f"integration stalled at t={sol.t[-1]:.6g}: {sol.message}",
                t_reached=float(sol.t[-1]))
        traj = Trajectory(t_max=t_max, tol=tol, _dense=sol.sol,
                          n_steps=len(sol.t) - 1)
    if monitor:
        slack = max(10.0 * tol, 1e-9) if bound_slack is None else bound_slack
        for t in np.arange(0.0, t_max + 1e-9, 0.05):
            st = traj.sample(min(t, t_max))
            bad = st.envelope_violations(slack)
            if bad:
                raise BoundsViolationError(
                    f"certified bound {bad[0]} failed at t={st.t:.4g}",
                    t=st.t, bound=bad[0])
    return traj


def sample(traj: Trajectory, t: float) -> IvpState:
    """Module-level alias for Trajectory.sample."""
    return traj.sample(t)


def exponent_integrals(traj: Trajectory, mu: float) -> tuple[float, float]:
    """Module-level alias for Trajectory.exponent_integrals."""
    return traj.exponent_integrals(mu)


@dataclass(frozen=True)
class UntransformedRun:
    """Diagnostics of a deliberately naive (Y, Z, P, Q) integration."""

    t_reached: float
    completed: bool
    first_violation_t: Optional[float]
    first_violation: Optional[str]
    final_state: tuple[float, float, float, float]
    message: str

    @property
    def failed_before(self) -> Optional[float]:
        """Earliest demonstrated failure time (bound break or stall)."""
        times = [x for x in (self.first_violation_t,
                             None if self.completed else self.t_reached)
                 if x is not None]
        return min(times) if times else None


def _naive_rhs(t, s):
    # literal six-variable system: raw constraint rows in Y and Z, no
    # log transform, no stabilized forms; nan/inf propagate on purpose
    Y, Z, P, Q = s
    with np.errstate(all="ignore"):
        lnY, lnZ = np.log(Y), np.log(Z)
        a11, a12 = Y / lnZ, Z / lnY
        a21 = (Z * lnZ + Y) / (Z * lnZ * lnZ)
        a22 = -(Y * lnY + Z) / (Y * lnY * lnY)
        det = a11 * a22 - a12 * a21
        J, K = -a22 / det, a21 / det
        return (LN2 * P * Y * lnY, -LN2 * Q * Z * lnZ,
                -LN2 * (1.0 - J) * P * Q, LN2 * (1.0 - K) * P * Q)


def integrate_untransformed(t_max: float = 10.0, tol: float = DEFAULT_TOL, *,
                            fixed_step: Optional[float] = 0.01,
                            bound_slack: float = 1e-6) -> UntransformedRun:
    """Run the flow in naive coordinates and report how it fails.

    With Y carried directly, ln(Z) degrades to noise as Z approaches 1
    and the constraint solve feeds garbage J, K into P and Q.  Depending
    on the stepper this surfaces as nonfinite state, a stall, or a
    silently wrong trajectory; the certified envelope catches all three.
    `fixed_step=None` selects an adaptive pair instead of the classic
    fixed-step scheme.
    """
    y0 = (0.5, 0.5, 1.0, 1.0)

    def first_violation(ts, states):
        for t, s in zip(ts, states):
            if not np.all(np.isfinite(s)):
                return float(t), "nonfinite state"
            Y, Z, P, Q = s
            J, K = np.nan, np.nan
            try:
                if 0 < Y < 1 and 0 < Z < 1:
                    J, K = constraint_jk(float(Y), float(Z))
            except (ArithmeticError, ValueError):
                return float(t), "constraint solve failed"
            st = IvpState(t=float(t), Y=float(Y), Z=float(Z), P=float(P),
                          Q=float(Q), J=float(J), K=float(K),
                          lnY=math.log(Y) if Y > 0 else -math.inf,
                          lnZ=math.log(Z) if Z > 0 else -math.inf)
            if not (0 < Y < 1 and 0 < Z < 1):
                return float(t), "Y or Z left (0, 1)"
            bad = st.envelope_violations(bound_slack)
            if bad:
                return float(t), f"certified bound {bad[0]}"
        return None, None

    if fixed_step is not None:
        dense = _FixedRk4(_naive_rhs, 0.0, t_max, y0, fixed_step)
        vt, vname = first_violation(dense.ts, dense.ys)
        finite = np.all(np.isfinite(dense.ys[-1]))
        return UntransformedRun(
            t_reached=float(dense.ts[-1]), completed=bool(finite),
            first_violation_t=vt, first_violation=vname,
            final_state=tuple(float(v) for v in dense.ys[-1]),
            message="fixed-step fourth-order run in naive coordinates")
    sol = solve_ivp(_naive_rhs, (0.0, t_max), y0, method="RK45",
                    rtol=tol, atol=tol, dense_output=False)
    vt, vname = first_violation(sol.t, sol.y.T)
    return UntransformedRun(
        t_reached=float(sol.t[-1]), completed=bool(sol.success),
        first_violation_t=vt, first_violation=vname,
        final_state=tuple(float(v) for v in sol.y[:, -1]),
        message=str(sol.message))
