"""Brute-force reference routes used to validate the analytic formulas.

Two independent oracles live here: a transfer-matrix Green function built
from the decaying solutions of the piecewise-exponential ODE problem, and a
truncated Fock-space operator calculus (ladder matrices, normal-ordered
operator products, ordered vacuum expectations).
"""

from bisect import bisect_right
from cmath import exp, log
from dataclasses import dataclass

import numpy as np

from .errors import TruncationNotConverged, ZeroWronskian
from .greenfn import PointInteractionConfig, SpectralParameter, free_green

# rescale propagated coefficients once they exceed this magnitude
_RESCALE_AT = 1e120
# |W| below this fraction of its constituent products is a point-spectrum hit
_WRONSKIAN_TOL = 1e-10


@dataclass(frozen=True)
class TransferState:
    """Coefficients of a local solution c+ * exp(-m(x-ref)) + c- * exp(m(x-ref))."""

    c_plus: complex
    c_minus: complex

    def jump(self, v_over_2m: complex) -> "TransferState":
        """Cross a point interaction left to right (continuity + derivative jump),
        with the reference point at the interaction."""
        s = v_over_2m * (self.c_plus + self.c_minus)
        return TransferState(self.c_plus - s, self.c_minus + s)

    def unjump(self, v_over_2m: complex) -> "TransferState":
        """Cross a point interaction right to left."""
        s = v_over_2m * (self.c_plus + self.c_minus)
        return TransferState(self.c_plus + s, self.c_minus - s)

    def shifted(self, m: complex, delta: float):
        """Move the reference point right by delta (exact rewrite of the
        same local solution).

        The growing exponential is factored out and returned as a log-scale
        increment so the coefficients stay bounded for any m * |delta|.
        """
        if delta >= 0:
            return TransferState(self.c_plus * exp(-2.0 * m * delta), self.c_minus), m * delta
        return TransferState(self.c_plus, self.c_minus * exp(2.0 * m * delta)), -m * delta


def _normalized(state, logscale):
    size = max(abs(state.c_plus), abs(state.c_minus))
    if size > _RESCALE_AT:
        return TransferState(state.c_plus / size, state.c_minus / size), logscale + log(size)
    return state, logscale


def _decaying_solutions(sp, cfg):
    """Propagate the two decaying solutions through all jumps.

    Returns (minus, plus): lists over segments 0..N of (state, logscale),
    where segment i lies between a_i and a_{i+1} and its reference point is
    a_i (a_1 for segment 0). The stored solution on segment i is
    exp(logscale) * state(x).
    """
    m = sp.m
    pos, strengths = cfg.positions, cfg.strengths
    n = cfg.size

    state, scale = TransferState(0.0, 1.0), 0.0 + 0.0j
    minus = [(state, scale)]
    for j in range(n):
        if j > 0:
            state, extra = state.shifted(m, pos[j] - pos[j - 1])  # ref a_{j-1} -> a_j
            state, scale = _normalized(state, scale + extra)
        state = state.jump(strengths[j] / (2.0 * m))
        minus.append((state, scale))

    state, scale = TransferState(1.0, 0.0), 0.0 + 0.0j
    plus = [(state, scale)]
    for j in range(n - 1, -1, -1):
        state = state.unjump(strengths[j] / (2.0 * m))
        if j > 0:
            state, extra = state.shifted(m, pos[j - 1] - pos[j])  # ref a_j -> a_{j-1}
            state, scale = _normalized(state, scale + extra)
        plus.append((state, scale))
    plus.reverse()

    return minus, plus


def _eval_solution(state, logscale, m, x, ref):
    """Value of the stored solution as (mantissa, complex log-scale)."""
    t = x - ref
    if t >= 0:
        return state.c_plus * exp(-2.0 * m * t) + state.c_minus, logscale + m * t
    return state.c_plus + state.c_minus * exp(2.0 * m * t), logscale - m * t


def transfer_green(sp: SpectralParameter, cfg: PointInteractionConfig,
                   x: float, y: float) -> complex:
    """Green function from the decaying-solution construction,
    psi_-(x_<) psi_+(x_>) / W.

    Independent of the resolvent-series formula; the jump condition enters
    only through the transfer step. Exponentials are referenced per segment
    so large m * span cannot overflow.
    """
    cfg.check_extension(sp)
    if cfg.size == 0:
        return free_green(sp, x, y)
    if x > y:
        x, y = y, x
    m = sp.m
    pos = cfg.positions
    minus, plus = _decaying_solutions(sp, cfg)
    refs = (pos[0],) + pos

    seg_x = bisect_right(pos, x)
    seg_y = bisect_right(pos, y)

    dm_state, dm_scale = minus[seg_x]
    up_state, up_scale = plus[seg_x]
    cross = dm_state.c_minus * up_state.c_plus
    back = dm_state.c_plus * up_state.c_minus
    w_mant = 2.0 * m * (cross - back)
    if abs(w_mant) <= _WRONSKIAN_TOL * 2.0 * abs(m) * (abs(cross) + abs(back)):
        raise ZeroWronskian("decaying solutions are linearly dependent at this E")
    w_log = dm_scale + up_scale

    vm, lm = _eval_solution(dm_state, dm_scale, m, x, refs[seg_x])
    vp, lp = _eval_solution(*plus[seg_y], m, y, refs[seg_y])
    return vm * vp / w_mant * exp(lm + lp - w_log)


@dataclass(frozen=True)
class FockTruncation:
    """Ladder matrices of the harmonic-oscillator basis at cutoff dimension D.

    adag has sqrt(k+1) on the subdiagonal, a is its transpose, and the
    commutator [a, adag] equals the identity on the upper-left (D-1) block.
    """

    dimension: int

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("dimension must be at least 2")
        sub = np.sqrt(np.arange(1, self.dimension, dtype=float))
        adag = np.diag(sub, k=-1)
        a = adag.T.copy()
        a.flags.writeable = False
        adag.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "adag", adag)

    def number_levels(self) -> np.ndarray:
        return np.arange(self.dimension)

    def field_matrix(self, sp: SpectralParameter) -> np.ndarray:
        """Matrix of the field operator (a + adag)/sqrt(2m)."""
        return (self.a + self.adag) / np.sqrt(2.0 * complex(sp.m))


def _raising_factor(lam, d):
    """exp(lam/2 * adag^2) as an explicit banded matrix (the exponential
    series terminates: adag^2 is nilpotent at truncation)."""
    out = np.eye(d, dtype=complex)
    half = lam / 2.0
    for j in range(d):
        entry = 1.0 + 0.0j
        for n in range(1, (d - 1 - j) // 2 + 1):
            i = j + 2 * n
            entry *= half * np.sqrt(i * (i - 1)) / n
            out[i, j] = entry
    return out


def build_operator(p, t: FockTruncation) -> np.ndarray:
    """Truncated matrix of the normal-ordered operator with parameter
    triple (lam, mu, nu): raising exponential times the diagonal
    normal-ordered series times the lowering exponential.

    The two exponential factors are exact at truncation; the diagonal factor
    sums to (1+mu)^k. Matrix elements only approximate the untruncated
    operator when |lam| < 1 and |nu| < 1 (term ratio below one), so larger
    parameters are rejected.
    """
    if t.dimension < 8:
        raise ValueError("dimension must be at least 8")
    lam, mu, nu = complex(p.lam), complex(p.mu), complex(p.nu)
    if abs(lam) >= 1.0 or abs(nu) >= 1.0:
        raise TruncationNotConverged(
            f"matrix elements diverge with truncation for |lam| = {abs(lam)}, |nu| = {abs(nu)}"
        )
    raising = _raising_factor(lam, t.dimension)
    lowering = _raising_factor(nu, t.dimension).T
    qdiag = (1.0 + mu) ** np.arange(t.dimension)
    return (raising * qdiag[np.newaxis, :]) @ lowering


def ordered_vacuum_expectation(matrices_positions, sp: SpectralParameter,
                               t: FockTruncation) -> complex:
    """<0| M_1 exp(-H d_1) M_2 ... M_K |0> with H = m * (number operator)
    and d_i the position gaps; positions must be non-decreasing."""
    if not matrices_positions:
        return 1.0 + 0.0j
    positions = [q for _, q in matrices_positions]
    if any(b < a for a, b in zip(positions, positions[1:])):
        raise ValueError("positions must be non-decreasing")
    levels = t.number_levels()
    row = matrices_positions[0][0][0, :].copy()
    for (mat, q), q_prev in zip(matrices_positions[1:], positions):
        row = (row * np.exp(-sp.m * (q - q_prev) * levels)) @ mat
    return complex(row[0])


def vev_product(ops, sp: SpectralParameter, t: FockTruncation) -> complex:
    """Vacuum expectation of an ordered product of parametrized operators.

    ops is a list of (params, position) with non-decreasing positions; each
    params carries the (lam, mu, nu) triple.
    """
    items = [(build_operator(p, t), q) for p, q in ops]
    return ordered_vacuum_expectation(items, sp, t)
