"""SL(2,R) operator family on the oscillator Fock space: parameter maps,
form factors, imaginary-time evolution, fusion of operator products, and
N-point correlators of the associated local fields.

The family is the normal-ordered triple (lam, mu, nu); its induced linear
map on (a, adag) is an SL(2) element. A point interaction of strength V
corresponds to lam = mu = nu = -(V/2m)/(1+V/2m).
"""

from cmath import exp as cexp
from cmath import log as clog
from cmath import sqrt as csqrt
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lgamma, log

import numpy as np

from . import oracle
from .errors import (AlphaZero, DegenerateMu, FusionSingular, Overflow,
                     SingularExtension, TruncationNotConverged)
from .greenfn import (EXTENSION_TOL, PointInteractionConfig,
                      SpectralParameter)

_DEGENERATE_TOL = 1e-12
_SL2_DET_TOL = 1e-12
# ln of the largest representable double, with a little headroom
_LOG_FLOAT_MAX = 709.0


@dataclass(frozen=True)
class BogolyubovParams:
    """Parameter triple of a normal-ordered SL(2,R) operator."""

    lam: complex
    mu: complex
    nu: complex

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "mu", complex(self.mu))
        object.__setattr__(self, "nu", complex(self.nu))
        if abs(1.0 + self.mu) < _DEGENERATE_TOL:
            raise DegenerateMu(f"1 + mu is numerically zero (mu = {self.mu})")


@dataclass(frozen=True)
class SL2Element:
    """Induced linear map on (a, adag); unit determinant required."""

    alpha: complex
    beta: complex
    gamma: complex
    delta: complex

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        det = self.alpha * self.delta - self.beta * self.gamma
        if abs(det - 1.0) > _SL2_DET_TOL:
            raise ValueError(f"determinant must be 1, got {det}")

    def matrix(self) -> np.ndarray:
        return np.array([[self.alpha, self.beta], [self.gamma, self.delta]])


@dataclass(frozen=True)
class FieldInsertion:
    """A field with given parameters inserted at a position."""

    params: BogolyubovParams
    position: float


def sl2_from_params(p: BogolyubovParams) -> SL2Element:
    """Linear map induced by conjugation with the operator of triple p."""
    denom = 1.0 + p.mu
    if abs(denom) < _DEGENERATE_TOL:
        raise DegenerateMu(f"1 + mu is numerically zero (mu = {p.mu})")
    return SL2Element(
        alpha=1.0 / denom,
        beta=-p.lam / denom,
        gamma=p.nu / denom,
        delta=denom - p.lam * p.nu / denom,
    )


def params_from_sl2(s: SL2Element) -> BogolyubovParams:
    """Inverse of sl2_from_params; requires alpha != 0."""
    if abs(s.alpha) < _DEGENERATE_TOL:
        raise AlphaZero("alpha = 0: no normal-ordered parameter triple exists")
    return BogolyubovParams(
        lam=-s.beta / s.alpha,
        mu=1.0 / s.alpha - 1.0,
        nu=s.gamma / s.alpha,
    )


def delta_params(v: float, sp: SpectralParameter) -> BogolyubovParams:
    """Parameter triple of the field attached to a point interaction of
    strength V: lam = mu = nu = -(V/2m)/(1+V/2m)."""
    ratio = v / (2.0 * sp.m)
    if abs(1.0 + ratio) < EXTENSION_TOL:
        raise SingularExtension(f"1 + V/(2m) vanishes for V = {v}, m = {sp.m}")
    p = -ratio / (1.0 + ratio)
    return BogolyubovParams(p, p, p)


def one_point(v: float, sp: SpectralParameter) -> complex:
    """Vacuum expectation (1 + V/2m)^(-1/2) of the delta-interaction field."""
    ratio = v / (2.0 * sp.m)
    if abs(1.0 + ratio) < EXTENSION_TOL:
        raise SingularExtension(f"1 + V/(2m) vanishes for V = {v}, m = {sp.m}")
    return 1.0 / csqrt(1.0 + ratio)


def one_point_series(v: float, sp: SpectralParameter, terms: int) -> complex:
    """Partial sum (through order ``terms``) of the vacuum-expectation
    expansion of the delta field: sum_n (2n-1)!!/n! (-V/4m)^n."""
    x = v / (4.0 * sp.m)
    total = 1.0 + 0.0j
    term = 1.0 + 0.0j
    for n in range(1, terms + 1):
        term *= -x * (2 * n - 1) / n
        total += term
    return total


def one_point_series_terms_exact(v, count: int):
    """First ``count``+1 terms of the same expansion with v = V/(2m) rational,
    the (2n-1)!! Wick-pairing counts kept as exact integers."""
    v = Fraction(v)
    terms = [Fraction(1)]
    pairings = 1
    for n in range(1, count + 1):
        pairings *= 2 * n - 1
        terms.append(Fraction(pairings, _factorial(n)) * (-v / 2) ** n)
    return terms


def _factorial(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def _term_logs(k: int, l: int, lam: complex, mu: complex, nu: complex):
    """Complex logs of the pairing-sum terms of F_{k,l}; assumes k+l even."""
    odd = k % 2
    big_k, big_l = k // 2, l // 2
    base = lgamma(k + 1) + lgamma(l + 1)
    log_half_lam = clog(lam / 2.0) if lam != 0 else None
    log_half_nu = clog(nu / 2.0) if nu != 0 else None
    log_one_mu = clog(1.0 + mu)
    logs = []
    for j in range(min(big_k, big_l) + 1):
        t = base - lgamma(2 * j + 1 + odd) - lgamma(big_k - j + 1) - lgamma(big_l - j + 1)
        t += (2 * j + odd) * log_one_mu
        if big_k - j:
            if log_half_lam is None:
                continue
            t += (big_k - j) * log_half_lam
        if big_l - j:
            if log_half_nu is None:
                continue
            t += (big_l - j) * log_half_nu
        logs.append(t)
    return logs


def _sum_exp(logs, offset: float) -> complex:
    if not logs:
        return 0.0 + 0.0j
    shift = max(t.real for t in logs) + offset
    total = sum(cexp(t + offset - shift) for t in logs)
    if total != 0 and shift + log(abs(total)) > _LOG_FLOAT_MAX:
        raise Overflow("form factor exceeds the floating-point range")
    return cexp(shift) * total


def form_factor(k: int, l: int, p: BogolyubovParams, max_index: int = 170) -> complex:
    """Rescaled form factor F_{k,l} = sqrt(k! l!) <k|O|l>.

    Zero whenever k+l is odd. Evaluated in log-space; indices above
    ``max_index`` (where k! leaves the double range) raise Overflow.
    """
    if k < 0 or l < 0:
        raise ValueError("indices must be non-negative")
    if k > max_index or l > max_index:
        raise Overflow(f"indices ({k}, {l}) exceed the stable range {max_index}")
    if (k + l) % 2:
        return 0.0 + 0.0j
    return _sum_exp(_term_logs(k, l, p.lam, p.mu, p.nu), 0.0)


def matrix_element(k: int, l: int, p: BogolyubovParams, max_index: int = 170) -> complex:
    """Matrix element <k|O|l> = F_{k,l}/sqrt(k! l!), combined in log-space."""
    if k < 0 or l < 0:
        raise ValueError("indices must be non-negative")
    if k > max_index or l > max_index:
        raise Overflow(f"indices ({k}, {l}) exceed the stable range {max_index}")
    if (k + l) % 2:
        return 0.0 + 0.0j
    offset = -0.5 * (lgamma(k + 1) + lgamma(l + 1))
    return _sum_exp(_term_logs(k, l, p.lam, p.mu, p.nu), offset)


def form_factor_exact(k: int, l: int, lam, mu, nu, max_index: int = 20) -> Fraction:
    """F_{k,l} over exact rational arithmetic (parameters must be rational)."""
    if k < 0 or l < 0:
        raise ValueError("indices must be non-negative")
    if k > max_index or l > max_index:
        raise Overflow(f"indices ({k}, {l}) exceed the exact-path range {max_index}")
    if (k + l) % 2:
        return Fraction(0)
    lam, mu, nu = Fraction(lam), Fraction(mu), Fraction(nu)
    odd = k % 2
    big_k, big_l = k // 2, l // 2
    total = Fraction(0)
    for j in range(min(big_k, big_l) + 1):
        coeff = Fraction(
            _factorial(k) * _factorial(l),
            _factorial(2 * j + odd) * _factorial(big_k - j) * _factorial(big_l - j),
        )
        total += (coeff * (lam / 2) ** (big_k - j)
                  * (1 + mu) ** (2 * j + odd) * (nu / 2) ** (big_l - j))
    return total


def form_factor_recursion(k: int, l: int, p: BogolyubovParams) -> complex:
    """F_{k,l} by forward recursion over the whole (k, l) table.

    The coupled two-term relations between neighbouring form factors close
    into F_{i,j} = lam (i-1) F_{i-2,j} + j (1+mu) F_{i-1,j-1}, which fills the
    table from F_{ 0,0} = 1 without any closed-form input. Independent of the
    pairing-sum evaluation; used to cross-check it.
    """
    if k < 0 or l < 0:
        raise ValueError("indices must be non-negative")
    table = np.zeros((k + 1, l + 1), dtype=complex)
    table[0, 0] = 1.0
    for i in range(k + 1):
        for j in range(l + 1):
            if i == 0 and j == 0:
                continue
            if (i + j) % 2:
                continue
            if i == 0:
                value = p.nu * (j - 1) * table[0, j - 2]
            else:
                value = 0.0 + 0.0j
                if i >= 2:
                    value += p.lam * (i - 1) * table[i - 2, j]
                if j >= 1:
                    value += j * (1.0 + p.mu) * table[i - 1, j - 1]
            table[i, j] = value
    return complex(table[k, l])


def evolve(p: BogolyubovParams, x: float, sp: SpectralParameter) -> BogolyubovParams:
    """Imaginary-time translation of the operator by x:
    lam -> lam e^{-2mx}, nu -> nu e^{2mx}, mu unchanged."""
    return BogolyubovParams(p.lam * cexp(-2.0 * sp.m * x), p.mu,
                            p.nu * cexp(2.0 * sp.m * x))


def fuse(p1: BogolyubovParams, p2: BogolyubovParams):
    """Rewrite the operator product O_1 O_2 as c12 * O_3.

    Returns (p3, c12) with c12 = (1 - nu1 lam2)^(-1/2) on the principal
    branch. The induced maps compose as sl2(p3) = sl2(p2) @ sl2(p1); the
    triple below is the unique one consistent with that composition (checked
    against the truncated-Fock operator product).
    """
    d = 1.0 - p1.nu * p2.lam
    if abs(d) < _DEGENERATE_TOL * (1.0 + abs(p1.nu * p2.lam)):
        raise FusionSingular(f"nu1 * lam2 = {p1.nu * p2.lam} hits the fusion singularity")
    p3 = BogolyubovParams(
        lam=p1.lam + p2.lam * (1.0 + p1.mu) ** 2 / d,
        mu=(p1.mu + p2.mu + p1.mu * p2.mu + p1.nu * p2.lam) / d,
        nu=p2.nu + p1.nu * (1.0 + p2.mu) ** 2 / d,
    )
    return p3, 1.0 / csqrt(d)


def two_point(p1: BogolyubovParams, p2: BogolyubovParams,
              a1: float, a2: float, sp: SpectralParameter) -> complex:
    """Two-point function [1 - nu1 lam2 e^{-2m(a2-a1)}]^(-1/2) of the
    normalized fields, a2 >= a1."""
    if a2 < a1:
        raise ValueError("a2 must not precede a1")
    r = p1.nu * p2.lam * cexp(-2.0 * sp.m * (a2 - a1))
    if abs(1.0 - r) < _DEGENERATE_TOL * (1.0 + abs(r)):
        raise FusionSingular(f"two-point ratio {r} hits the branch point")
    return 1.0 / csqrt(1.0 - r)


def two_point_series(p1: BogolyubovParams, p2: BogolyubovParams,
                     a1: float, a2: float, sp: SpectralParameter,
                     terms: int) -> complex:
    """Partial sum (intermediate states up to 2*terms) of the form-factor
    expansion of the two-point function."""
    if a2 < a1:
        raise ValueError("a2 must not precede a1")
    total = 0.0 + 0.0j
    for k in range(terms + 1):
        total += (matrix_element(0, 2 * k, p1) * matrix_element(2 * k, 0, p2)
                  * cexp(-2.0 * k * sp.m * (a2 - a1)))
    return total


def n_point_correlator(insertions, sp: SpectralParameter) -> complex:
    """Vacuum expectation of an ordered product of normalized fields.

    Each insertion is evolved to its position, the product is folded down to
    a single operator by successive fusion, and the accumulated c-factors are
    the correlator (the surviving operator has unit vacuum expectation).
    Positions must be non-decreasing. A singular fusion reports the index of
    the offending insertion.
    """
    insertions = list(insertions)
    if not insertions:
        return 1.0 + 0.0j
    positions = [ins.position for ins in insertions]
    if any(b < a for a, b in zip(positions, positions[1:])):
        raise ValueError("insertion positions must be non-decreasing")
    # evolution factors depend only on gaps; shifting by the first position
    # keeps exp(2 m x) bounded for configurations far from the origin
    origin = positions[0]
    evolved = [evolve(ins.params, ins.position - origin, sp) for ins in insertions]
    acc = evolved[0]
    total = 1.0 + 0.0j
    for idx, p in enumerate(evolved[1:], start=1):
        try:
            acc, c = fuse(acc, p)
        except FusionSingular as err:
            raise FusionSingular(f"fusion of insertions {idx - 1} and {idx} failed: {err}",
                                 index=idx) from err
        total *= c
    return total


def correlator_via_fusion(sp: SpectralParameter, cfg: PointInteractionConfig) -> complex:
    """N-point correlator of delta-interaction fields by the fusion route:
    product of one-point values times the normalized-field correlator."""
    cfg.check_extension(sp)
    value = 1.0 + 0.0j
    for v in cfg.strengths:
        value *= one_point(v, sp)
    inserts = [FieldInsertion(delta_params(v, sp), a)
               for v, a in zip(cfg.strengths, cfg.positions)]
    return value * n_point_correlator(inserts, sp)


@lru_cache(maxsize=16)
def _truncation(dim: int) -> oracle.FockTruncation:
    return oracle.FockTruncation(dim)


@lru_cache(maxsize=256)
def _cached_operator(p: BogolyubovParams, dim: int) -> np.ndarray:
    mat = oracle.build_operator(p, _truncation(dim))
    mat.flags.writeable = False
    return mat


@lru_cache(maxsize=16)
def _cached_field(m: complex, dim: int) -> np.ndarray:
    mat = _truncation(dim).field_matrix(SpectralParameter(m))
    mat.flags.writeable = False
    return mat


def resolvent_via_fields(sp: SpectralParameter, cfg: PointInteractionConfig,
                         x: float, y: float, dim: int = 64,
                         rtol: float = 1e-10, max_dim: int = 2048,
                         verify_convergence: bool = True) -> complex:
    """Perturbed resolvent kernel as a ratio of multipoint correlators,
    evaluated in the truncated Fock space.

    The numerator inserts two field operators at x and y among the
    interaction fields; the denominator is the interaction correlator alone.
    The truncation dimension is doubled until the value stabilizes to rtol;
    TruncationNotConverged is raised if max_dim is reached first. With
    verify_convergence=False the value at the given dimension is returned
    unchecked (for convergence studies).
    """
    cfg.check_extension(sp)
    params = [delta_params(v, sp) for v in cfg.strengths]

    def value(d):
        t = _truncation(d)
        ops = [(_cached_operator(p, d), a) for p, a in zip(params, cfg.positions)]
        phi = _cached_field(sp.m, d)
        items = sorted(ops + [(phi, x), (phi, y)], key=lambda item: item[1])
        num = oracle.ordered_vacuum_expectation(items, sp, t)
        den = oracle.ordered_vacuum_expectation(ops, sp, t)
        return num / den

    prev = value(dim)
    if not verify_convergence:
        return prev
    d = dim
    while True:
        d *= 2
        if d > max_dim:
            raise TruncationNotConverged(
                f"no convergence up to dimension {max_dim} (last change at {d // 2})"
            )
        cur = value(d)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return cur
        prev = cur
