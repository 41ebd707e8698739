"""Free and perturbed resolvent kernels of the 1D second-derivative operator
with point interactions, plus the determinant form of the field correlator.

Conventions: the spectral point is E = -m^2 with Re m > 0, so the free kernel
is exp(-m|x-y|)/(2m). A point interaction of strength V at position a is the
derivative-jump condition f'(a+) - f'(a-) = V f(a).
"""

from cmath import exp, sqrt
from dataclasses import dataclass, field

import numpy as np

from ._linalg import checked_solve, lu_det
from .errors import BranchAmbiguity, SingularDet, SingularExtension, SingularU

# |1 + V/(2m)| below this is treated as a singular self-adjoint extension
EXTENSION_TOL = 1e-10
# relative half-width of the branch-cut exclusion band around the negative reals
BRANCH_TOL = 1e-12


@dataclass(frozen=True)
class SpectralParameter:
    """Complex mass-like parameter m; the spectral point E = -m^2 is derived.

    Re m > 0 is required so that exp(-m|x|) decays.
    """

    m: complex

    def __post_init__(self):
        object.__setattr__(self, "m", complex(self.m))
        if not self.m.real > 0:
            raise ValueError(f"Re m must be strictly positive, got m = {self.m}")

    @property
    def E(self) -> complex:
        return -self.m * self.m


@dataclass(frozen=True)
class PointInteractionConfig:
    """Sorted interaction positions a_1 < ... < a_N with real strengths V_j.

    Zero-strength points are dropped at construction (V = 0 is no
    interaction), so the stored config may be empty; the empty config means
    the free operator.
    """

    positions: tuple = field(default=())
    strengths: tuple = field(default=())

    def __post_init__(self):
        pos = tuple(float(a) for a in self.positions)
        strength = tuple(float(v) for v in self.strengths)
        if len(pos) != len(strength):
            raise ValueError("positions and strengths must have equal length")
        kept = [(a, v) for a, v in zip(pos, strength) if v != 0.0]
        pos = tuple(a for a, _ in kept)
        strength = tuple(v for _, v in kept)
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "strengths", strength)

    @property
    def size(self) -> int:
        return len(self.positions)

    def check_extension(self, sp: SpectralParameter):
        """Reject strengths with 1 + V/(2m) numerically zero."""
        for v in self.strengths:
            if abs(1.0 + v / (2.0 * sp.m)) < EXTENSION_TOL:
                raise SingularExtension(
                    f"1 + V/(2m) vanishes for V = {v}, m = {sp.m}"
                )


@dataclass(frozen=True)
class HermitianExtensionMatrix:
    """Hermitian N x N matrix B parametrizing a general self-adjoint
    extension; B = diag(1/V_j) recovers the separated point interactions."""

    entries: np.ndarray

    def __post_init__(self):
        b = np.array(self.entries, dtype=complex)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("entries must be a square matrix")
        if not np.array_equal(b, b.conj().T):
            raise ValueError("entries must be hermitian (exactly as stored)")
        b.flags.writeable = False
        object.__setattr__(self, "entries", b)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def free_green(sp: SpectralParameter, x: float, y: float) -> complex:
    """Free resolvent kernel exp(-m|x-y|)/(2m); symmetric in (x, y)."""
    return exp(-sp.m * abs(x - y)) / (2.0 * sp.m)


def u_matrix(sp: SpectralParameter, cfg: PointInteractionConfig) -> np.ndarray:
    """Coupling matrix U_ij = delta_ij / V_i + G_E(a_i, a_j)."""
    if any(v == 0.0 for v in cfg.strengths):
        raise SingularExtension("zero strength has no U-matrix entry")
    n = cfg.size
    u = np.empty((n, n), dtype=complex)
    for i, ai in enumerate(cfg.positions):
        for j, aj in enumerate(cfg.positions):
            u[i, j] = free_green(sp, ai, aj)
        u[i, i] += 1.0 / cfg.strengths[i]
    return u


def _correction(sp, positions, u, x, y):
    gx = np.array([free_green(sp, x, a) for a in positions])
    gy = np.array([free_green(sp, a, y) for a in positions])
    return complex(gx @ checked_solve(u, gy, SingularU, "U matrix is numerically singular"))


def resolvent_kernel(sp: SpectralParameter, cfg: PointInteractionConfig,
                     x: float, y: float) -> complex:
    """Perturbed resolvent kernel G_{E,V}(x, y).

    G_E(x,y) - sum_ij G_E(x,a_i) U^{-1}_ij G_E(a_j,y); the empty config
    reduces to the free kernel.
    """
    cfg.check_extension(sp)
    if cfg.size == 0:
        return free_green(sp, x, y)
    return free_green(sp, x, y) - _correction(sp, cfg.positions, u_matrix(sp, cfg), x, y)


def resolvent_kernel_general(sp: SpectralParameter, positions,
                             b: HermitianExtensionMatrix,
                             x: float, y: float) -> complex:
    """Resolvent for a general extension: U = B + G_E(a_i, a_j)."""
    positions = tuple(float(a) for a in positions)
    if any(q <= p for p, q in zip(positions, positions[1:])):
        raise ValueError("positions must be strictly increasing")
    if b.size != len(positions):
        raise ValueError("B must be N x N for N positions")
    if b.size == 0:
        return free_green(sp, x, y)
    g = np.array([[free_green(sp, ai, aj) for aj in positions] for ai in positions])
    return free_green(sp, x, y) - _correction(sp, positions, b.entries + g, x, y)


def correlator_det(sp: SpectralParameter, cfg: PointInteractionConfig) -> complex:
    """N-point correlator of the delta-associated fields,
    det(delta_ij + sqrt(V_i V_j) G_E(a_i, a_j))^{-1/2}.

    Computed from the similar matrix delta_ij + V_i G_E(a_i, a_j), whose
    determinant is identical (diagonal similarity) and needs no square-root
    branch choice for mixed-sign strengths. The final inverse square root is
    the principal branch; a determinant on the negative real axis raises
    BranchAmbiguity instead of silently picking a side.
    """
    cfg.check_extension(sp)
    n = cfg.size
    if n == 0:
        return 1.0 + 0.0j
    d = np.empty((n, n), dtype=complex)
    for i, (ai, vi) in enumerate(zip(cfg.positions, cfg.strengths)):
        for j, aj in enumerate(cfg.positions):
            d[i, j] = vi * free_green(sp, ai, aj)
        d[i, i] += 1.0
    det, smallest_pivot, threshold = lu_det(d)
    if smallest_pivot <= threshold or det == 0:
        raise SingularDet("correlator determinant is numerically zero")
    if det.real < 0 and abs(det.imag) <= BRANCH_TOL * abs(det):
        raise BranchAmbiguity(
            f"determinant {det} lies on the negative real axis"
        )
    return 1.0 / sqrt(det)
