"""Continuous polarization calculus for binary erasure channels.

Fractional polarization words and their reliability order, the
six-variable alignment flow, capacity transport along paths and loops,
grid verification, and closed-form order decisions.
"""

from .words import (
    Segment,
    PolarWord,
    parse_word,
    step0,
    step1,
    eval_word,
    eval_word_array,
    eval_word_exact,
    complement,
    CompareConfig,
    OrderVerdict,
    compare_words,
)
from .localforms import (
    swap_coefficient,
    g_h,
    JkPair,
    solve_jk,
    QuadExponents,
    delta_quadratic,
    aligned_exponents,
)
from .ivp import (
    IvpState,
    Trajectory,
    initial_state,
    constraint_jk,
    integrate,
    sample,
    exponent_integrals,
    envelope_bounds,
    integrate_untransformed,
    IntegrationError,
    BoundsViolationError,
)
from .paths import (
    Path,
    transport,
    LoopReport,
    loop_verdict,
    GridSpec,
    emit_grid,
    grid_from_diagonals,
    SquareReport,
    GridReport,
    verify_grid,
    staircase_word,
)
from .decide import (
    MainVerdict,
    decide_main,
    capital_m,
    square_pair,
    lightning_claims,
    DyckReport,
    dyck_check,
    enumerate_dyck,
    intro_pairs,
    check_intro_pair,
)

__version__ = "0.1.0"
