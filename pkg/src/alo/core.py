"""Complex matrix operators and states over truncated multi-mode bases.

Every matrix lives on a :class:`BasisSpec` describing per-mode truncation
dimensions plus a guard band: the top ``guard`` levels of each mode are
excluded from the *valid subspace*.  Truncating a ladder algebra provably
breaks its relations on the top levels, so all identity checks elsewhere in
the package project both sides onto the valid subspace before taking norms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


class DimensionError(ValueError):
    """Operands live on incompatible bases or have the wrong shape."""


class NumericalError(RuntimeError):
    """A dense solver failed or returned unusable output."""


DEFAULT_TAIL_TOL = 1e-10
_TINY = 1e-300


@dataclass(frozen=True)
class BasisSpec:
    """Truncated tensor-product basis: per-mode dimensions and a guard band.

    The flat index is row-major with mode 0 as the slow index (the rightmost
    mode varies fastest), matching ``numpy.kron`` ordering.
    """

    mode_dims: tuple[int, ...]
    guard: int = 0
    labels: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        object.__setattr__(self, "mode_dims", dims)
        if not dims or any(d < 2 for d in dims):
            raise DimensionError(f"every mode dimension must be >= 2, got {dims}")
        g = int(self.guard)
        object.__setattr__(self, "guard", g)
        if not 0 <= g < min(dims):
            raise DimensionError(
                f"guard must satisfy 0 <= guard < min(mode_dims), got guard={g}, dims={dims}"
            )
        labels = tuple(self.labels) if self.labels else tuple(f"m{i}" for i in range(len(dims)))
        if len(labels) != len(dims):
            raise DimensionError("one label per mode required")
        object.__setattr__(self, "labels", labels)

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.mode_dims))

    @property
    def valid_dim(self) -> int:
        return int(np.prod([d - self.guard for d in self.mode_dims]))

    def valid_mask(self) -> np.ndarray:
        """Boolean mask over flat indices: True inside the valid subspace."""
        mask = np.ones(1, dtype=bool)
        for d in self.mode_dims:
            mask = np.kron(mask, np.arange(d) < d - self.guard)
        return mask


def _require_same_basis(a, b):
    if a.basis != b.basis:
        raise DimensionError(f"basis mismatch: {a.basis} vs {b.basis}")


@dataclass(frozen=True, eq=False)
class Operator:
    """Immutable complex matrix over a :class:`BasisSpec`."""

    basis: BasisSpec
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        d = self.basis.dim
        if m.shape != (d, d):
            raise DimensionError(f"matrix shape {m.shape} does not match basis dimension {d}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def named(self, name: str) -> "Operator":
        return Operator(self.basis, self.matrix, name)

    def dagger(self) -> "Operator":
        return Operator(self.basis, self.matrix.conj().T, f"{self.name}^+" if self.name else "")

    def apply(self, state: "StateVector") -> "StateVector":
        _require_same_basis(self, state)
        return StateVector(self.basis, self.matrix @ state.amplitudes)

    def restricted(self) -> np.ndarray:
        """Matrix projected onto the valid subspace (PMP, entries outside zeroed)."""
        mask = self.basis.valid_mask()
        return self.matrix * np.outer(mask, mask)

    def restricted_norm(self) -> float:
        return float(np.linalg.norm(self.restricted()))

    def fro_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def norm2(self) -> float:
        """Spectral norm."""
        return float(np.linalg.norm(self.matrix, 2))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = max(self.fro_norm(), _TINY)
        return bool(np.linalg.norm(self.matrix - self.matrix.conj().T) <= tol * scale)

    # -- arithmetic (always returns a new Operator on the same basis) --

    def __add__(self, other: "Operator") -> "Operator":
        _require_same_basis(self, other)
        return Operator(self.basis, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        _require_same_basis(self, other)
        return Operator(self.basis, self.matrix - other.matrix)

    def __neg__(self) -> "Operator":
        return Operator(self.basis, -self.matrix)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.basis, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Operator":
        return Operator(self.basis, self.matrix / complex(scalar))

    def __matmul__(self, other):
        if isinstance(other, Operator):
            _require_same_basis(self, other)
            return Operator(self.basis, self.matrix @ other.matrix)
        if isinstance(other, StateVector):
            return self.apply(other)
        return NotImplemented


@dataclass(frozen=True, eq=False)
class StateVector:
    """Immutable complex vector over a :class:`BasisSpec`."""

    basis: BasisSpec
    amplitudes: np.ndarray
    name: str = ""

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if a.shape != (self.basis.dim,):
            raise DimensionError(
                f"amplitude length {a.shape[0]} does not match basis dimension {self.basis.dim}"
            )
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    def named(self, name: str) -> "StateVector":
        return StateVector(self.basis, self.amplitudes, name)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def norm_sq(self) -> float:
        return float(np.real(np.vdot(self.amplitudes, self.amplitudes)))

    def inner(self, other: "StateVector") -> complex:
        """<self, other>, conjugate-linear in the first argument."""
        _require_same_basis(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def tail_mass(self) -> float:
        """Probability weight outside the valid subspace (unnormalized)."""
        mask = self.basis.valid_mask()
        return float(np.sum(np.abs(self.amplitudes[~mask]) ** 2))

    def tail_fraction(self) -> float:
        n2 = self.norm_sq()
        return self.tail_mass() / n2 if n2 > 0 else 0.0

    def trusted(self, tail_tol: float = DEFAULT_TAIL_TOL) -> bool:
        return self.tail_fraction() <= tail_tol

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0:
            raise NumericalError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / n, self.name)

    def phase_normalized(self, rel_eps: float = 1e-12) -> "StateVector":
        """Rotate so the first significant amplitude is real and positive."""
        mags = np.abs(self.amplitudes)
        peak = mags.max()
        if peak == 0:
            return self
        idx = int(np.argmax(mags > rel_eps * peak))
        ref = self.amplitudes[idx]
        phase = ref / abs(ref)
        return StateVector(self.basis, self.amplitudes * np.conj(phase), self.name)

    def __mul__(self, scalar) -> "StateVector":
        return StateVector(self.basis, self.amplitudes * complex(scalar), self.name)

    __rmul__ = __mul__

    def __add__(self, other: "StateVector") -> "StateVector":
        _require_same_basis(self, other)
        return StateVector(self.basis, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "StateVector") -> "StateVector":
        _require_same_basis(self, other)
        return StateVector(self.basis, self.amplitudes - other.amplitudes)


@dataclass(frozen=True, eq=False)
class EigenPair:
    """A right/left eigenvector pair of one matrix.

    ``left`` is an eigenvector of the adjoint matrix with the conjugate
    eigenvalue; ``residual`` bounds both back-substitution errors for the
    unit-normalized vectors.
    """

    value: complex
    right: StateVector
    left: StateVector
    residual: float
    degenerate: bool = False

    def trusted(self, tail_tol: float = DEFAULT_TAIL_TOL) -> bool:
        return self.right.trusted(tail_tol) and self.left.trusted(tail_tol)


def identity(basis: BasisSpec, name: str = "1") -> Operator:
    return Operator(basis, np.eye(basis.dim, dtype=np.complex128), name)


def zero_operator(basis: BasisSpec) -> Operator:
    return Operator(basis, np.zeros((basis.dim, basis.dim), dtype=np.complex128), "0")


def adjoint(x: Operator) -> Operator:
    return x.dagger()


def commutator(x: Operator, y: Operator) -> Operator:
    """[X, Y] = XY - YX."""
    _require_same_basis(x, y)
    return Operator(x.basis, x.matrix @ y.matrix - y.matrix @ x.matrix)


def anticommutator(x: Operator, y: Operator) -> Operator:
    """{X, Y} = XY + YX."""
    _require_same_basis(x, y)
    return Operator(x.basis, x.matrix @ y.matrix + y.matrix @ x.matrix)


def _cluster_indices(values: np.ndarray, tol: float) -> list[list[int]]:
    """Group indices whose values are chained within tol of each other."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = list(groups.values())
    for c in clusters:
        c.sort(key=lambda i: (values[i].real, values[i].imag))
    clusters.sort(key=lambda c: (np.mean(values[c]).real, np.mean(values[c]).imag))
    return clusters


def eigendecompose(
    x: Operator,
    pairing_tol: float | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> list[EigenPair]:
    """Full dense eigendecomposition with matched left/right vectors.

    Works for non-normal matrices.  Pairs are sorted by real part of the
    eigenvalue (imaginary part as tiebreak); members of a cluster closer
    than ``pairing_tol`` are flagged degenerate and kept adjacent.
    """
    m = x.matrix
    try:
        values, vl, vr = scipy.linalg.eig(m, left=True, right=True)
    except (scipy.linalg.LinAlgError, ValueError) as exc:  # pragma: no cover
        raise NumericalError(f"dense eigensolver failed on {x.name or 'operator'}: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise NumericalError("eigensolver returned non-finite eigenvalues")

    if pairing_tol is None:
        pairing_tol = 1e-8 * max(x.norm2(), _TINY)

    madj = m.conj().T
    pairs: list[EigenPair] = []
    clusters = _cluster_indices(values, pairing_tol)
    for cluster in clusters:
        degenerate = len(cluster) > 1
        for i in cluster:
            w = complex(values[i])
            r = StateVector(x.basis, vr[:, i]).phase_normalized()
            l = StateVector(x.basis, vl[:, i]).phase_normalized()
            res_r = float(np.linalg.norm(m @ r.amplitudes - w * r.amplitudes))
            res_l = float(np.linalg.norm(madj @ l.amplitudes - np.conj(w) * l.amplitudes))
            pairs.append(EigenPair(w, r, l, max(res_r, res_l), degenerate))
    return pairs


def multiplicity_profile(pairs: list[EigenPair], tol: float) -> list[tuple[complex, int]]:
    """Cluster eigenvalues within tol; returns (representative, count) per cluster."""
    if not pairs:
        return []
    values = np.array([p.value for p in pairs])
    clusters = _cluster_indices(values, tol)
    return [(complex(np.mean(values[c])), len(c)) for c in clusters]


def make_eigenpair(h: Operator, right: StateVector) -> EigenPair:
    """Package a candidate eigenvector of ``h`` with its matched left vector.

    The eigenvalue is the Rayleigh quotient; the left vector is recovered as
    the left singular vector of H - theta*1 with smallest singular value.
    """
    _require_same_basis(h, right)
    n2 = right.norm_sq()
    if n2 == 0:
        raise NumericalError("zero vector cannot seed an eigenpair")
    v = right.amplitudes
    theta = complex(np.vdot(v, h.matrix @ v) / n2)
    shifted = h.matrix - theta * np.eye(h.basis.dim)
    u_mat, _, _ = np.linalg.svd(shifted)
    left = StateVector(h.basis, u_mat[:, -1]).phase_normalized()
    vn = v / np.sqrt(n2)
    res_r = float(np.linalg.norm(h.matrix @ vn - theta * vn))
    res_l = float(
        np.linalg.norm(h.matrix.conj().T @ left.amplitudes - np.conj(theta) * left.amplitudes)
    )
    return EigenPair(theta, right, left, max(res_r, res_l))
