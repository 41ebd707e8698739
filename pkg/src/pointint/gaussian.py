"""Gaussian moment and determinant identities as an executable suite.

The block partition function identities (three equivalent determinant
expressions) and the coupled second-moment identity are checked two ways:
as exact linear-algebra residuals, and by seeded Monte Carlo sampling of the
corresponding Gaussian measures for small dimensions.
"""

from dataclasses import dataclass

import numpy as np

from ._linalg import checked_solve, lu_det
from .errors import NotPositiveDefinite, SingularInput

_MC_BATCH = 200_000


def _is_self_adjoint(mat):
    return np.allclose(mat, mat.conj().T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(mat).max()))


@dataclass(frozen=True)
class QuadraticForm:
    """Data (A, B, C, J) of a coupled Gaussian weight.

    A (M x M) and B (N x N) must be invertible and symmetric (real kind) or
    hermitian (complex kind); C is the M x N coupling and J an optional
    source of length M. The kind is inferred from the dtypes unless given.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    j: np.ndarray = None
    kind: str = None

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a))
        b = np.atleast_2d(np.asarray(self.b))
        c = np.atleast_2d(np.asarray(self.c))
        is_complex = any(np.iscomplexobj(x) for x in (a, b, c))
        kind = self.kind or ("complex" if is_complex else "real")
        if kind not in ("real", "complex"):
            raise ValueError("kind must be 'real' or 'complex'")
        dtype = complex if kind == "complex" else float
        a = a.astype(dtype)
        b = b.astype(dtype)
        c = c.astype(dtype)
        m, n = a.shape[0], b.shape[0]
        if a.shape != (m, m) or b.shape != (n, n) or c.shape != (m, n):
            raise ValueError("incompatible shapes for A, B, C")
        if not _is_self_adjoint(a) or not _is_self_adjoint(b):
            word = "hermitian" if kind == "complex" else "symmetric"
            raise ValueError(f"A and B must be {word}")
        for name, mat in (("A", a), ("B", b)):
            _, smallest_pivot, threshold = lu_det(mat)
            if smallest_pivot <= threshold:
                raise SingularInput(f"{name} is numerically singular")
        j = np.zeros(m, dtype=dtype) if self.j is None else np.asarray(self.j).astype(dtype)
        if j.shape != (m,):
            raise ValueError("J must have length M")
        for name, arr in (("a", a), ("b", b), ("c", c), ("j", j)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "kind", kind)

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def n(self) -> int:
        return self.b.shape[0]

    def coupling_adjoint(self) -> np.ndarray:
        return self.c.T if self.kind == "real" else self.c.conj().T

    def block(self) -> np.ndarray:
        return np.block([[self.a, self.c], [self.coupling_adjoint(), self.b]])


def schur_partition_identity(q: QuadraticForm) -> float:
    """Largest absolute difference among the three equivalent determinant
    expressions of the coupled partition function:
    det of the block matrix, det A * det(B - C^T A^-1 C), and
    det B * det(A - C B^-1 C^T)."""
    ct = q.coupling_adjoint()
    d_block = np.linalg.det(q.block())
    d_a = np.linalg.det(q.a) * np.linalg.det(
        q.b - ct @ checked_solve(q.a, q.c, SingularInput, "A is singular"))
    d_b = np.linalg.det(q.b) * np.linalg.det(
        q.a - q.c @ checked_solve(q.b, ct, SingularInput, "B is singular"))
    values = [d_block, d_a, d_b]
    return float(max(abs(u - v) for u in values for v in values))


def krein_identity(q: QuadraticForm, i: int, j: int):
    """Both sides of the coupled second-moment identity at entry (i, j).

    lhs = (A - C B^-1 C^T)^-1_ij,
    rhs = A^-1_ij + [A^-1 C (B - C^T A^-1 C)^-1 C^T A^-1]_ij.
    """
    ct = q.coupling_adjoint()
    eye_m = np.eye(q.m)
    schur_a = q.a - q.c @ checked_solve(q.b, ct, SingularInput, "B is singular")
    lhs = checked_solve(schur_a, eye_m[:, j], SingularInput,
                        "A - C B^-1 C^T is singular")[i]
    a_inv = checked_solve(q.a, eye_m, SingularInput, "A is singular")
    schur_b = q.b - ct @ a_inv @ q.c
    middle = checked_solve(schur_b, ct @ a_inv, SingularInput,
                           "B - C^T A^-1 C is singular")
    rhs = a_inv[i, j] + (a_inv @ q.c @ middle)[i, j]
    return complex(lhs), complex(rhs)


@dataclass(frozen=True)
class MomentCheck:
    name: str
    estimate: complex
    exact: complex
    stderr: float

    @property
    def n_sigma(self) -> float:
        if self.stderr == 0.0:
            return 0.0 if self.estimate == self.exact else np.inf
        return abs(self.estimate - self.exact) / self.stderr

    @property
    def passed(self) -> bool:
        return self.n_sigma <= 4.0


@dataclass(frozen=True)
class MomentReport:
    kind: str
    samples: int
    seed: int
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]


def _cholesky_or_raise(mat, label):
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as err:
        raise NotPositiveDefinite(f"{label} is not positive definite") from err


def _sample_precision(rng, chol, count, complex_kind):
    """Draw `count` samples with covariance P^-1 where P = chol @ chol^H."""
    dim = chol.shape[0]
    if complex_kind:
        z = (rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim)))
        z *= np.sqrt(0.5)
    else:
        z = rng.standard_normal((count, dim))
    # x = L^-H z  so that  <x x^H> = (L L^H)^-1
    return np.linalg.solve(chol.conj().T, z.T).T


def moment_check_mc(q: QuadraticForm, kind: str = None, samples: int = 1_000_000,
                    seed: int = 20_260_810) -> MomentReport:
    """Monte Carlo verification of the Gaussian moment formulas for the given
    quadratic form; dimensions must not exceed 4.

    Checks, each with a standard error and flagged beyond four sigma:
    coupled second moments against the two-sided inverse identity, sourced
    moments against the shifted-covariance formula, and the partition ratio
    Z_{A,B,C}/(Z_A Z_B) against its determinant expression.
    """
    kind = kind or q.kind
    if kind != q.kind:
        raise ValueError(f"form has kind {q.kind!r}, requested {kind!r}")
    if q.m > 4 or q.n > 4:
        raise ValueError("Monte Carlo checks are restricted to dimensions <= 4")
    complex_kind = kind == "complex"
    block = q.block()
    chol_block = _cholesky_or_raise(block, "the joint block matrix")
    chol_a = _cholesky_or_raise(q.a, "A")
    chol_b = _cholesky_or_raise(q.b, "B")

    rng_root = np.random.default_rng(seed)
    checks = []

    # coupled moments <phi_i phi_j> (or <phi_i conj(phi_j)>)
    moment_sum = np.zeros((q.m, q.m), dtype=complex)
    abs2_sum = np.zeros((q.m, q.m))
    ratio_vals = []
    done = 0
    while done < samples:
        count = min(_MC_BATCH, samples - done)
        xy = _sample_precision(rng_root, chol_block, count, complex_kind)
        phi = xy[:, : q.m]
        prods = phi[:, :, None] * (phi.conj()[:, None, :] if complex_kind
                                   else phi[:, None, :])
        moment_sum += prods.sum(axis=0)
        abs2_sum += (np.abs(prods) ** 2).sum(axis=0)

        # independent phi, mu for the partition-ratio estimator
        phi_free = _sample_precision(rng_root, chol_a, count, complex_kind)
        mu_free = _sample_precision(rng_root, chol_b, count, complex_kind)
        if complex_kind:
            expo = -2.0 * np.real(np.einsum("si,ij,sj->s", phi_free.conj(), q.c, mu_free))
        else:
            expo = -np.einsum("si,ij,sj->s", phi_free, q.c, mu_free)
        ratio_vals.append(np.exp(expo))
        done += count

    est = moment_sum / samples
    stderr = np.sqrt(np.maximum(abs2_sum / samples - np.abs(est) ** 2, 0.0) / samples)
    exact = np.linalg.inv(q.a - q.c @ np.linalg.solve(q.b, q.coupling_adjoint()))
    pair_word = "conj-pair" if complex_kind else "pair"
    for i in range(q.m):
        for j in range(q.m):
            checks.append(MomentCheck(
                name=f"coupled {pair_word} moment ({i},{j})",
                estimate=complex(est[i, j]), exact=complex(exact[i, j]),
                stderr=float(stderr[i, j])))

    ratio_vals = np.concatenate(ratio_vals)
    det_block = np.linalg.det(block)
    det_a, det_b = np.linalg.det(q.a), np.linalg.det(q.b)
    if complex_kind:
        exact_ratio = (det_a * det_b / det_block).real
    else:
        exact_ratio = float(np.sqrt((det_a * det_b / det_block).real))
    checks.append(MomentCheck(
        name="partition ratio Z_{A,B,C}/(Z_A Z_B)",
        estimate=complex(ratio_vals.mean()),
        exact=complex(exact_ratio),
        stderr=float(ratio_vals.std(ddof=1) / np.sqrt(ratio_vals.size))))

    # sourced moments: mean A^-1 J, covariance A^-1
    shift = np.linalg.solve(q.a, q.j)
    moment_sum = np.zeros((q.m, q.m), dtype=complex)
    abs2_sum = np.zeros((q.m, q.m))
    done = 0
    while done < samples:
        count = min(_MC_BATCH, samples - done)
        phi = _sample_precision(rng_root, chol_a, count, complex_kind) + shift
        prods = phi[:, :, None] * (phi.conj()[:, None, :] if complex_kind
                                   else phi[:, None, :])
        moment_sum += prods.sum(axis=0)
        abs2_sum += (np.abs(prods) ** 2).sum(axis=0)
        done += count
    est = moment_sum / samples
    stderr = np.sqrt(np.maximum(abs2_sum / samples - np.abs(est) ** 2, 0.0) / samples)
    a_inv = np.linalg.inv(q.a)
    exact_src = a_inv + np.outer(shift, shift.conj() if complex_kind else shift)
    for i in range(q.m):
        for j in range(q.m):
            checks.append(MomentCheck(
                name=f"sourced {pair_word} moment ({i},{j})",
                estimate=complex(est[i, j]), exact=complex(exact_src[i, j]),
                stderr=float(stderr[i, j])))

    return MomentReport(kind=kind, samples=samples, seed=seed, checks=tuple(checks))


def random_quadratic_form(rng, m: int, n: int, kind: str = "real",
                          with_source: bool = False, definite: bool = True,
                          max_condition: float = 1e6) -> QuadraticForm:
    """Random well-conditioned instance.

    With definite=True (required for sampling) the joint block matrix is
    positive definite; otherwise A and B are merely invertible self-adjoint.
    Instances are resampled until the condition number is below the guard.
    """
    complex_kind = kind == "complex"

    def random_self_adjoint(dim):
        g = rng.standard_normal((dim, dim))
        if complex_kind:
            g = g + 1j * rng.standard_normal((dim, dim))
        if definite:
            return g @ g.conj().T + dim * np.eye(dim)
        return 0.5 * (g + g.conj().T) + np.diag(rng.choice([-2.0, 2.0], size=dim))

    while True:
        a = random_self_adjoint(m)
        b = random_self_adjoint(n)
        c = rng.standard_normal((m, n))
        if complex_kind:
            c = c + 1j * rng.standard_normal((m, n))
        c = 0.5 * c
        j = None
        if with_source:
            j = rng.standard_normal(m)
            if complex_kind:
                j = j + 1j * rng.standard_normal(m)
        try:
            q = QuadraticForm(a, b, c, j, kind=kind)
        except SingularInput:
            continue
        block = q.block()
        sing = np.linalg.svd(block, compute_uv=False)
        if sing[-1] <= 0 or sing[0] / sing[-1] >= max_condition:
            continue
        if definite and np.linalg.eigvalsh(block)[0] <= 0:
            continue
        schur = q.b - q.coupling_adjoint() @ np.linalg.solve(q.a, q.c)
        if abs(np.linalg.det(schur)) < 1e-8:
            continue
        return q
