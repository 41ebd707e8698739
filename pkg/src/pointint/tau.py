"""Boundary-value Grassmannian of the point-interaction family.

Solutions of the spectral equation near each interaction are encoded by
their boundary data on a localization (disjoint intervals isolating the
interaction points). The exterior and interior boundary subspaces are
half-dimensional in the 4N-dimensional boundary space; the tau function is
the ratio of the canonical projection determinant to the trivializing one
and collapses to a small block-tridiagonal determinant.

Boundary coordinates per interval j (slots 4j..4j+3): (R+, L-, R-, L+),
where X± = psi(x) ± psi'(x)/m at the right/left endpoint.
"""

from cmath import exp
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import lu_solve

from ._linalg import fraction_det, lu_det, pivot_threshold, quiet_lu_factor
from .errors import NotTransverse, SingularExtension
from .bogolyubov import one_point
from .greenfn import (EXTENSION_TOL, PointInteractionConfig,
                      SpectralParameter, correlator_det)


@dataclass(frozen=True)
class Localization:
    """Disjoint ordered open intervals (x^L_j, x^R_j) isolating the
    interaction points."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if not ivs:
            raise ValueError("at least one interval is required")
        for a, b in ivs:
            if not a < b:
                raise ValueError(f"empty interval ({a}, {b})")
        for (_, b), (c, _) in zip(ivs, ivs[1:]):
            if not b < c:
                raise ValueError("intervals must be disjoint and ordered")
        object.__setattr__(self, "intervals", ivs)

    @property
    def size(self) -> int:
        return len(self.intervals)

    @classmethod
    def default_for(cls, cfg: PointInteractionConfig, fraction: float = 1.0 / 3.0):
        """Symmetric intervals of half-width min-gap * fraction around each
        point; admissible for any sorted configuration."""
        pos = cfg.positions
        if not pos:
            raise ValueError("empty configuration has no localization")
        gaps = [b - a for a, b in zip(pos, pos[1:])]
        half = fraction * (min(gaps) if gaps else 1.0)
        return cls(tuple((a - half, a + half) for a in pos))

    def validate_with(self, cfg: PointInteractionConfig):
        if cfg.size != self.size:
            raise ValueError("localization and configuration sizes differ")
        for (a, b), x in zip(self.intervals, cfg.positions):
            if not a < x < b:
                raise ValueError(f"point {x} not inside interval ({a}, {b})")


@dataclass(frozen=True)
class Subspace:
    """A subspace given by a basis matrix (columns); full column rank is
    checked with the standard singular-value threshold."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[1] == 0 or b.shape[1] > b.shape[0]:
            raise ValueError("basis must be a tall matrix with at least one column")
        s = np.linalg.svd(b, compute_uv=False)
        if s[-1] <= max(b.shape) * np.finfo(float).eps * s[0]:
            raise ValueError("basis columns are numerically dependent")
        b.flags.writeable = False
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dimension(self) -> int:
        return self.basis.shape[0]

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]


def n_matrix(j: int, v: float, sp: SpectralParameter, loc: Localization,
             cfg: PointInteractionConfig | None = None) -> np.ndarray:
    """Interior boundary map of interval j: (R-, L+) = N_j(V) (R+, L-).

    With V = 0 the diagonal vanishes and only the across-interval decay
    survives; cfg may then be omitted (the point position is irrelevant).
    """
    xl, xr = loc.intervals[j]
    if cfg is not None:
        a = cfg.positions[j]
    else:
        if v != 0.0:
            raise ValueError("a configuration is required for nonzero strength")
        a = 0.5 * (xl + xr)
    m = sp.m
    ratio = v / (2.0 * m)
    if abs(1.0 + ratio) < EXTENSION_TOL:
        raise SingularExtension(f"1 + V/(2m) vanishes for V = {v}, m = {m}")
    q = ratio / (1.0 + ratio)
    alpha = -q * exp(-2.0 * m * (xr - a))
    delta = -q * exp(-2.0 * m * (a - xl))
    beta = exp(-m * (xr - xl)) / (1.0 + ratio)
    return np.array([[alpha, beta], [beta, delta]])


def _gap_factors(sp, loc):
    return [exp(-sp.m * (nxt[0] - cur[1]))
            for cur, nxt in zip(loc.intervals, loc.intervals[1:])]


def ext_subspace(sp: SpectralParameter, loc: Localization) -> Subspace:
    """Boundary data of solutions on the exterior of the localization.

    Cut out by vanishing incoming data at the far ends and the chain
    relations with decay factors w_i across each gap; independent of the
    interaction configuration. Dimension 2N out of 4N.
    """
    n = loc.size
    w = _gap_factors(sp, loc)
    basis = np.zeros((4 * n, 2 * n), dtype=complex)
    for i in range(n):
        col = basis[:, i]
        col[4 * i + 2] = 1.0                       # h^(i)_{R,-} free
        if i < n - 1:
            col[4 * (i + 1) + 1] = w[i]            # h^(i+1)_{L,-} = w_i h^(i)_{R,-}
    for i in range(n):
        col = basis[:, n + i]
        col[4 * i + 3] = 1.0                       # h^(i)_{L,+} free
        if i > 0:
            col[4 * (i - 1) + 0] = w[i - 1]        # h^(i-1)_{R,+} = w_{i-1} h^(i)_{L,+}
    return Subspace(basis)


def int_subspace(sp: SpectralParameter, loc: Localization,
                 cfg: PointInteractionConfig | None = None) -> Subspace:
    """Boundary data of solutions on the interior of the localization:
    the graph of the N_j maps over the (R+, L-) coordinates.

    cfg = None gives the non-interacting (Friedrichs) point of the
    Grassmannian.
    """
    n = loc.size
    if cfg is not None:
        loc.validate_with(cfg)
        strengths = cfg.strengths
    else:
        strengths = (0.0,) * n
    basis = np.zeros((4 * n, 2 * n), dtype=complex)
    for j in range(n):
        nj = n_matrix(j, strengths[j], sp, loc, cfg)
        for col_idx, unit in ((2 * j, (1.0, 0.0)), (2 * j + 1, (0.0, 1.0))):
            col = basis[:, col_idx]
            col[4 * j + 0], col[4 * j + 1] = unit
            col[4 * j + 2], col[4 * j + 3] = nj @ unit
    return Subspace(basis)


def friedrichs_reference_subspace(n: int) -> Subspace:
    """Direct sum of the per-interval exterior subspaces (R+ = L- = 0); the
    trivializing projection onto the Friedrichs point acts along it."""
    basis = np.zeros((4 * n, 2 * n))
    for j in range(n):
        basis[4 * j + 2, 2 * j] = 1.0
        basis[4 * j + 3, 2 * j + 1] = 1.0
    return Subspace(basis)


def _projection_det(w1: Subspace, w2: Subspace, along: Subspace, label: str) -> complex:
    stacked = np.hstack([w2.basis, along.basis])
    if stacked.shape[0] != stacked.shape[1]:
        raise ValueError("subspaces do not halve the ambient space")
    lu, piv = quiet_lu_factor(stacked)
    if np.abs(np.diag(lu)).min() <= pivot_threshold(stacked):
        raise NotTransverse(f"subspaces {label} are not transverse")
    sol = lu_solve((lu, piv), w1.basis, check_finite=False)
    block = sol[: w2.dimension, :]
    det, _, _ = lu_det(block)
    return det


def cross_ratio_tau(w1: Subspace, w2: Subspace, w3: Subspace, w4: Subspace) -> complex:
    """Generalized cross-ratio of four half-dimensional subspaces:
    det(W1 -> W2 along W3) / det(W1 -> W2 along W4).

    The determinants are taken in the stored bases; the ratio is independent
    of all basis choices. NotTransverse reports which projection failed.
    """
    if len({w.ambient_dimension for w in (w1, w2, w3, w4)}) != 1:
        raise ValueError("subspaces live in different ambient spaces")
    num = _projection_det(w1, w2, w3, "(W2, W3)")
    den = _projection_det(w1, w2, w4, "(W2, W4)")
    return num / den


def _m_matrix(sp, loc, strengths, cfg):
    n = loc.size
    w = _gap_factors(sp, loc)
    mat = np.zeros((2 * n, 2 * n), dtype=complex)
    for j in range(n - 1):
        n_next = n_matrix(j + 1, strengths[j + 1], sp, loc, cfg)
        n_here = n_matrix(j, strengths[j], sp, loc, cfg)
        # coupling of block row j to block j+1 and back
        mat[2 * j, 2 * j + 2] = -w[j] * n_next[1, 0]        # gamma_{j+1}
        mat[2 * j, 2 * j + 3] = -w[j] * n_next[1, 1]        # delta_{j+1}
        mat[2 * j + 3, 2 * j] = -w[j] * n_here[0, 0]        # alpha_j
        mat[2 * j + 3, 2 * j + 1] = -w[j] * n_here[0, 1]    # beta_j
    return mat


def tau_via_M(sp: SpectralParameter, loc: Localization,
              cfg: PointInteractionConfig) -> complex:
    """Tau function as det(1 + M_{a,V}) / det(1 + M_0) on the given
    localization; the denominator is identically one but is computed anyway
    as a consistency anchor."""
    loc.validate_with(cfg)
    cfg.check_extension(sp)
    eye = np.eye(2 * loc.size)
    det_v, piv_v, thr_v = lu_det(eye + _m_matrix(sp, loc, cfg.strengths, cfg))
    if piv_v <= thr_v:
        raise NotTransverse("interacting subspace is not transverse to the exterior")
    det_0, piv_0, thr_0 = lu_det(eye + _m_matrix(sp, loc, (0.0,) * loc.size, None))
    if piv_0 <= thr_0:
        raise NotTransverse("Friedrichs subspace is not transverse to the exterior")
    return det_v / det_0


def det_one_plus_m0(sp: SpectralParameter, loc: Localization) -> complex:
    """det(1 + M_0); equals 1 for every localization (triangular factorization)."""
    det, _, _ = lu_det(np.eye(2 * loc.size) + _m_matrix(sp, loc, (0.0,) * loc.size, None))
    return det


def _collapsed_blocks(v, decay):
    """Blocks of the collapsed tau matrix from v_j = V_j/(2m) and the
    nearest-neighbour decay factors."""
    n = len(v)
    q_blocks, t_blocks = [], []
    for j in range(n - 1):
        e = decay[j]
        q_blocks.append([[-e / (1 + v[j + 1]), e * v[j + 1] / (1 + v[j + 1])],
                         [0 * e, 0 * e]])
        t_blocks.append([[0 * e, 0 * e],
                         [e * v[j] / (1 + v[j]), -e / (1 + v[j])]])
    return q_blocks, t_blocks


def tau_collapsed(sp: SpectralParameter, cfg: PointInteractionConfig) -> complex:
    """Tau function with the localization collapsed onto the points:
    determinant of the 2N x 2N block-tridiagonal matrix with identity
    diagonal blocks."""
    cfg.check_extension(sp)
    n = cfg.size
    if n == 0:
        return 1.0 + 0.0j
    v = [s / (2.0 * sp.m) for s in cfg.strengths]
    decay = [exp(-sp.m * (b - a)) for a, b in zip(cfg.positions, cfg.positions[1:])]
    q_blocks, t_blocks = _collapsed_blocks(v, decay)
    mat = np.eye(2 * n, dtype=complex)
    for j in range(n - 1):
        mat[2 * j: 2 * j + 2, 2 * j + 2: 2 * j + 4] = q_blocks[j]
        mat[2 * j + 2: 2 * j + 4, 2 * j: 2 * j + 2] = t_blocks[j]
    det, _, _ = lu_det(mat)
    return det


def tau_collapsed_exact(v, decay):
    """Collapsed tau determinant over exact rationals.

    v are the ratios V_j/(2m) and decay the factors exp(-m gap_j), all given
    as Fractions; returns the determinant as a Fraction.
    """
    v = [Fraction(x) for x in v]
    decay = [Fraction(x) for x in decay]
    n = len(v)
    if len(decay) != n - 1:
        raise ValueError("need one decay factor per gap")
    zero, one = Fraction(0), Fraction(1)
    mat = [[one if r == c else zero for c in range(2 * n)] for r in range(2 * n)]
    q_blocks, t_blocks = _collapsed_blocks(v, decay)
    for j in range(n - 1):
        for r in range(2):
            for c in range(2):
                mat[2 * j + r][2 * j + 2 + c] = Fraction(q_blocks[j][r][c])
                mat[2 * j + 2 + r][2 * j + c] = Fraction(t_blocks[j][r][c])
    return fraction_det(mat)


def tau_two_point_exact(v1, v2, decay) -> Fraction:
    """Closed form of the two-point tau over exact rationals:
    1 - [v1/(1+v1)] [v2/(1+v2)] decay^2."""
    v1, v2, decay = Fraction(v1), Fraction(v2), Fraction(decay)
    return 1 - (v1 / (1 + v1)) * (v2 / (1 + v2)) * decay ** 2


def fin_check(sp: SpectralParameter, cfg: PointInteractionConfig):
    """Both sides of the tau-correlator identity.

    Returns (tau_collapsed, [corr / prod of one-points]^(-2)); the two agree
    for every admissible configuration.
    """
    tau = tau_collapsed(sp, cfg)
    corr = correlator_det(sp, cfg)
    ones = 1.0 + 0.0j
    for v in cfg.strengths:
        ones *= one_point(v, sp)
    ratio = corr / ones
    return tau, 1.0 / (ratio * ratio)


def transversality_singular_values(sp: SpectralParameter, loc: Localization,
                                   cfg: PointInteractionConfig | None = None):
    """Smallest and largest singular value of the stacked exterior/interior
    basis matrix; a smallest value above the rank threshold certifies
    transversality (and the absence of global solutions)."""
    stacked = np.hstack([ext_subspace(sp, loc).basis,
                         int_subspace(sp, loc, cfg).basis])
    s = np.linalg.svd(stacked, compute_uv=False)
    return float(s[-1]), float(s[0])
