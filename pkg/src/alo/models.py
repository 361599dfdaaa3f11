"""Constructors for every operator system in the scenario catalog.

All factories return :class:`~alo.core.Operator` instances over a shared
:class:`~alo.core.BasisSpec`.  Number-operator Hamiltonians are built as
exact diagonals (their spectra are the test oracles); agreement with the
corresponding operator products is checked by the verification layer, not
assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .core import BasisSpec, DimensionError, Operator, identity

SQRT2 = math.sqrt(2.0)


class ParameterError(ValueError):
    """Model parameters violate a documented constraint."""


def q_integer(n: int, q: float) -> float:
    """Deformed integer: 1 + q + ... + q^(n-1); plain n at q = 1."""
    if n < 0:
        raise ParameterError(f"q-integer index must be >= 0, got {n}")
    if q == 1.0:
        return float(n)
    return (1.0 - q**n) / (1.0 - q)


@dataclass(frozen=True)
class QuonParams:
    q: float
    omega: float = 1.0

    def __post_init__(self):
        if not -1.0 <= self.q <= 1.0:
            raise ParameterError(f"q must lie in [-1, 1], got {self.q}")
        if self.omega == 0:
            raise ParameterError("omega must be nonzero")


@dataclass(frozen=True)
class GHAParams:
    """Spectrum-generating data: level map f, lowest level e0, optional level cap."""

    f: Callable[[float], float]
    e0: float = 0.0
    levels: int | None = None


@dataclass(frozen=True)
class PseudoBosonShift:
    """Real shift parameters; the derived complex shifts make the pair non-adjoint
    unless A = B = 0."""

    A: float = 0.0
    B: float = 0.0

    @property
    def C(self) -> complex:
        return complex(-self.B, self.A)

    @property
    def D(self) -> complex:
        return complex(self.B, self.A)


def _near_rational(x: float, max_den: int = 20, tol: float = 1e-9) -> bool:
    frac = Fraction(x).limit_denominator(max_den)
    return abs(x - float(frac)) <= tol


@dataclass(frozen=True)
class EpsilonModelParams:
    eps: float
    xi: int = 1

    def __post_init__(self):
        if not -1.0 < self.eps < 1.0:
            raise ParameterError(f"eps must lie in (-1, 1), got {self.eps}")
        if self.xi not in (1, -1):
            raise ParameterError(f"xi must be +1 or -1, got {self.xi}")

    @property
    def degeneracy_flag(self) -> bool:
        """Heuristic: frequency ratio close to a small rational, so level
        collisions are expected."""
        ratio = math.sqrt((1.0 + self.eps) / (1.0 - self.eps))
        return _near_rational(ratio)


# ---------------------------------------------------------------------------
# single-mode ladder families


def make_boson(dim: int, guard: int = 0) -> tuple[Operator, Operator]:
    """Truncated boson pair: a|n> = sqrt(n)|n-1>, and its adjoint."""
    if dim < 2:
        raise ParameterError(f"boson dimension must be >= 2, got {dim}")
    basis = BasisSpec((dim,), guard)
    a = Operator(basis, np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1), "a")
    return a, a.dagger().named("a^+")


def number_operator(basis: BasisSpec, omega: float = 1.0, name: str = "H0") -> Operator:
    if basis.n_modes != 1:
        raise DimensionError("number_operator expects a single-mode basis")
    return Operator(basis, np.diag(omega * np.arange(basis.dim, dtype=float)).astype(complex), name)


def make_fermion(omega: float) -> tuple[Operator, Operator]:
    """2x2 fermion lowering operator and H0 = omega c^+ c; exact arithmetic."""
    basis = BasisSpec((2,), 0)
    c = Operator(basis, np.array([[0, 1], [0, 0]], dtype=complex), "c")
    h0 = Operator(basis, np.diag([0.0, omega]).astype(complex), "H0")
    return c, h0


def make_quon(params: QuonParams, dim: int, guard: int = 0) -> tuple[Operator, Operator]:
    """Deformed lowering operator b|n> = sqrt([n]_q)|n-1> and H0 = omega b^+ b."""
    if dim < 2:
        raise ParameterError(f"quon dimension must be >= 2, got {dim}")
    qints = np.array([q_integer(n, params.q) for n in range(dim)])
    if np.any(qints < 0):
        raise ParameterError("negative deformed integer encountered")
    basis = BasisSpec((dim,), guard)
    b = Operator(basis, np.diag(np.sqrt(qints[1:]), k=1), "b")
    h0 = Operator(basis, np.diag(params.omega * qints).astype(complex), "H0")
    return b, h0


def make_gha(params: GHAParams, dim: int, guard: int = 0) -> tuple[Operator, Operator]:
    """Spectrum-generating ladder pair from the level recursion e_{n+1} = f(e_n).

    Returns (d, H0) where d lowers.  The raising matrix elements are
    c_n = sqrt(e_{n+1} - e_0), which makes d^+ d = H0 - e0 and
    d d^+ = f(H0) - e0 hold identically on the untruncated levels.
    """
    if dim < 2:
        raise ParameterError(f"dimension must be >= 2, got {dim}")
    n_levels = dim if params.levels is None else min(dim, params.levels)
    if n_levels < dim:
        raise ParameterError(f"level cap {params.levels} below requested dimension {dim}")
    energies = [float(params.e0)]
    for _ in range(dim - 1):
        energies.append(float(params.f(energies[-1])))
    energies_arr = np.array(energies)
    if np.any(np.diff(energies_arr) <= 0):
        raise ParameterError("level map must generate a strictly increasing sequence")
    c_sq = energies_arr[1:] - energies_arr[0]
    if np.any(c_sq < 0):
        raise ParameterError("negative squared ladder coefficient")
    basis = BasisSpec((dim,), guard)
    d = Operator(basis, np.diag(np.sqrt(c_sq), k=1), "d")
    h0 = Operator(basis, np.diag(energies_arr).astype(complex), "H0")
    return d, h0


def gha_linear_map(shift: float = 1.0) -> Callable[[float], float]:
    if shift <= 0:
        raise ParameterError("linear level map needs a positive shift")
    return lambda x: x + shift


def gha_square_well_map() -> Callable[[float], float]:
    def f(x: float) -> float:
        if x < 0:
            raise ParameterError("square-well level map needs nonnegative levels")
        return (math.sqrt(x) + 1.0) ** 2

    return f


def make_position_momentum(dim: int, guard: int = 0) -> tuple[Operator, Operator]:
    """Hermitian quadrature pair x = (a + a^+)/sqrt2, p = (a - a^+)/(i sqrt2)."""
    a, ad = make_boson(dim, guard)
    x = ((a + ad) / SQRT2).named("x")
    p = ((a - ad) / complex(0, SQRT2)).named("p")
    return x, p


def make_shifted_pseudoboson(
    shift: PseudoBosonShift, dim: int, guard: int = 0
) -> tuple[Operator, Operator]:
    """Constant-shifted pseudo-boson pair (a + C/sqrt2, a^+ + D/sqrt2).

    The pair keeps [a_op, b_op] = 1 on the valid subspace but is mutually
    adjoint only at A = B = 0.
    """
    a, ad = make_boson(dim, guard)
    one = identity(a.basis)
    a_op = (a + (shift.C / SQRT2) * one).named("a")
    b_op = (ad + (shift.D / SQRT2) * one).named("b")
    return a_op, b_op


# ---------------------------------------------------------------------------
# multi-mode assembly


def make_tensor(ops_per_mode: Sequence[Operator], name: str = "") -> Operator:
    """Kronecker product of per-mode operators; mode 0 is the slow index."""
    if not ops_per_mode:
        raise DimensionError("need at least one operator")
    guard = ops_per_mode[0].basis.guard
    dims: list[int] = []
    labels: list[str] = []
    matrix = np.ones((1, 1), dtype=complex)
    for op in ops_per_mode:
        if op.basis.guard != guard:
            raise DimensionError("all modes must share one guard width")
        dims.extend(op.basis.mode_dims)
        labels.extend(op.basis.labels)
        matrix = np.kron(matrix, op.matrix)
    basis = BasisSpec(tuple(dims), guard, tuple(labels))
    return Operator(basis, matrix, name)


def embed(op: Operator, mode: int, mode_dims: Sequence[int], guard: int) -> Operator:
    """Single-mode operator placed at ``mode`` with identities elsewhere."""
    if op.basis.mode_dims != (mode_dims[mode],) or op.basis.guard != guard:
        raise DimensionError("operator basis does not match the target mode")
    factors = [
        op if m == mode else identity(BasisSpec((d,), guard))
        for m, d in enumerate(mode_dims)
    ]
    return make_tensor(factors, name=f"{op.name}{mode + 1}" if op.name else "")


def _two_mode_xp(mode_dims: Sequence[int], guard: int):
    if len(mode_dims) != 2:
        raise ParameterError(f"exactly two modes required, got {len(mode_dims)}")
    xs, ps = [], []
    for mode, d in enumerate(mode_dims):
        x, p = make_position_momentum(d, guard)
        xs.append(embed(x, mode, mode_dims, guard))
        ps.append(embed(p, mode, mode_dims, guard))
    return xs, ps


@dataclass(frozen=True)
class AbModel:
    """Two-mode oscillator with an imaginary linear drive and its ladder family."""

    h: Operator
    zs: tuple[Operator, Operator, Operator, Operator]
    h_normal: Operator
    lambdas: tuple[float, float, float, float]
    basis: BasisSpec


def make_ab_model(a_coef: float, b_coef: float, mode_dims: Sequence[int], guard: int) -> AbModel:
    """H = 1/2(p1^2+x1^2) + 1/2(p2^2+x2^2) + i[A(x1+x2) + B(p1+p2)].

    The four shifted quadrature combinations shift H's eigenvalues by
    -1, +1, -1, +1; the normal form N1 + N2 + (A^2+B^2+1) is returned for
    cross-checking, never assumed.
    """
    shift = PseudoBosonShift(a_coef, b_coef)
    (x1, x2), (p1, p2) = _two_mode_xp(mode_dims, guard)
    one = identity(x1.basis)
    h = (
        0.5 * (p1 @ p1 + x1 @ x1)
        + 0.5 * (p2 @ p2 + x2 @ x2)
        + complex(0, 1) * (a_coef * (x1 + x2) + b_coef * (p1 + p2))
    ).named("H")
    z1 = ((x1 + complex(0, 1) * p1 + shift.C * one) / SQRT2).named("Z1")
    z2 = ((x1 - complex(0, 1) * p1 + shift.D * one) / SQRT2).named("Z2")
    z3 = ((x2 + complex(0, 1) * p2 + shift.C * one) / SQRT2).named("Z3")
    z4 = ((x2 - complex(0, 1) * p2 + shift.D * one) / SQRT2).named("Z4")
    vacuum = a_coef**2 + b_coef**2 + 1.0
    h_normal = (z2 @ z1 + z4 @ z3 + vacuum * one).named("H_normal")
    return AbModel(h, (z1, z2, z3, z4), h_normal, (-1.0, 1.0, -1.0, 1.0), x1.basis)


@dataclass(frozen=True)
class EpsilonModel:
    """Coupled two-mode oscillator with imaginary drive on mode 2."""

    h: Operator
    a1: Operator
    a2: Operator
    b1: Operator
    b2: Operator
    h_normal: Operator
    lambdas: tuple[float, float, float, float]
    basis: BasisSpec
    params: EpsilonModelParams

    @property
    def zs(self) -> tuple[Operator, Operator, Operator, Operator]:
        return (self.a1, self.b1, self.a2, self.b2)

    def energy(self, n1: int, n2: int) -> float:
        sp = math.sqrt(1.0 + self.params.eps * self.params.xi)
        sm = math.sqrt(1.0 - self.params.eps * self.params.xi)
        return sp * (2 * n1 + 1) + sm * (2 * n2 + 1) + 1.0 / (1.0 - self.params.eps**2)


def make_epsilon_model(
    params: EpsilonModelParams, mode_dims: Sequence[int], guard: int
) -> EpsilonModel:
    """H = (p1^2+x1^2) + (p2^2+x2^2+2i x2) + 2 eps x1 x2, with the rotated
    pseudo-boson quartet that diagonalizes it."""
    eps, xi = params.eps, params.xi
    sp = math.sqrt(1.0 + eps * xi)
    sm = math.sqrt(1.0 - eps * xi)
    (x1, x2), (p1, p2) = _two_mode_xp(mode_dims, guard)
    one = identity(x1.basis)
    i = complex(0, 1)

    h = (
        (p1 @ p1 + x1 @ x1)
        + (p2 @ p2 + x2 @ x2 + 2 * i * x2)
        + 2 * eps * (x1 @ x2)
    ).named("H")

    kp = 1.0 / (2.0 * sp**0.5)
    km = 1.0 / (2.0 * sm**0.5)
    a1 = (kp * ((i * p1 + sp * x1) + xi * (i * p2 + sp * x2) + (i * xi / sp) * one)).named("a1")
    a2 = (km * ((i * p1 + sm * x1) - xi * (i * p2 + sm * x2) - (i * xi / sm) * one)).named("a2")
    b1 = (kp * ((-i * p1 + sp * x1) + xi * (-i * p2 + sp * x2) + (i * xi / sp) * one)).named("b1")
    b2 = (km * ((-i * p1 + sm * x1) - xi * (-i * p2 + sm * x2) - (i * xi / sm) * one)).named("b2")

    h_normal = (
        sp * (2 * (b1 @ a1) + one) + sm * (2 * (b2 @ a2) + one) + (1.0 / (1.0 - eps**2)) * one
    ).named("H_normal")
    lambdas = (-2.0 * sp, 2.0 * sp, -2.0 * sm, 2.0 * sm)
    return EpsilonModel(h, a1, a2, b1, b2, h_normal, lambdas, x1.basis, params)


# ---------------------------------------------------------------------------
# parameter-schema dispatch (file format used by the CLI override mechanism)

_GHA_PRESETS = {"linear", "square-well"}


def build_model(spec: dict) -> dict:
    """Build a system from the JSON parameter schema.

    Schema: {"model": <kind>, "params": {...}, "dims": [...], "guard": g}.
    Returns the named operators of the system plus its basis.
    """
    try:
        kind = spec["model"]
        dims = [int(d) for d in spec["dims"]]
        guard = int(spec.get("guard", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"malformed model spec: {exc}") from exc
    params = dict(spec.get("params", {}))

    if kind == "boson":
        a, ad = make_boson(dims[0], guard)
        h0 = number_operator(a.basis, params.get("omega", 1.0))
        return {"a": a, "a_dagger": ad, "h0": h0, "basis": a.basis}
    if kind == "fermion":
        c, h0 = make_fermion(params.get("omega", 1.0))
        return {"c": c, "h0": h0, "basis": c.basis}
    if kind == "quon":
        qp = QuonParams(params.get("q", 0.5), params.get("omega", 1.0))
        b, h0 = make_quon(qp, dims[0], guard)
        return {"b": b, "h0": h0, "basis": b.basis}
    if kind == "gha":
        preset = params.get("preset", "linear")
        if preset not in _GHA_PRESETS:
            raise ParameterError(f"unknown level-map preset {preset!r}")
        if preset == "linear":
            f = gha_linear_map(params.get("shift", 1.0))
            e0 = params.get("e0", 0.0)
        else:
            f = gha_square_well_map()
            e0 = params.get("e0", 1.0)
        d, h0 = make_gha(GHAParams(f, e0), dims[0], guard)
        return {"d": d, "h0": h0, "basis": d.basis}
    if kind == "pb1d":
        shift = PseudoBosonShift(params.get("A", 0.7), params.get("B", 0.4))
        a_op, b_op = make_shifted_pseudoboson(shift, dims[0], guard)
        h = (params.get("omega", 1.0) * (b_op @ a_op)).named("H")
        return {"a": a_op, "b": b_op, "h": h, "basis": a_op.basis}
    if kind == "ab2d":
        model = make_ab_model(params.get("A", 0.7), params.get("B", 0.4), dims, guard)
        z1, z2, z3, z4 = model.zs
        return {
            "h": model.h, "z1": z1, "z2": z2, "z3": z3, "z4": z4,
            "h_normal": model.h_normal, "basis": model.basis,
        }
    if kind == "eps2d":
        model = make_epsilon_model(
            EpsilonModelParams(params.get("eps", 0.3), int(params.get("xi", 1))), dims, guard
        )
        return {
            "h": model.h, "a1": model.a1, "a2": model.a2, "b1": model.b1, "b2": model.b2,
            "h_normal": model.h_normal, "basis": model.basis,
        }
    raise ParameterError(f"unknown model kind {kind!r}")
