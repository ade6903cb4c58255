"""Dense linear algebra for finite-dimensional quantum states.

Everything here works on explicit complex matrices: tensor products,
partial traces, Hermitian matrix functions, trace norms, fidelities,
entropies and unitary time evolution.  States above a few thousand
dimensions are out of scope by design; there is no sparse path.

Index convention: for a multipartite state the *first* subsystem in a
:class:`SubsystemLayout` is the slowest (most significant) flat index.
The same convention is used by every module in this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: Maximum allowed deviation from Hermiticity.
HERMITICITY_TOL = 1e-12
#: Maximum allowed deviation of the trace from one.
TRACE_TOL = 1e-10
#: Eigenvalues in [PSD_FLOOR, 0) count as rounding noise and are clamped;
#: anything below is a genuine positivity violation and is rejected.
PSD_FLOOR = -1e-10


class ValidationError(ValueError):
    """A matrix failed one of the structural requirements."""


def _as_square_complex(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape!r}")
    return m


class DensityMatrix:
    """A validated density matrix.

    Parameters
    ----------
    matrix:
        Square complex array.
    validate:
        When true (the default) the constructor checks Hermiticity
        (1e-12), unit trace (1e-10) and positivity (eigenvalues above
        -1e-10, small negatives treated as rounding noise).  Internal
        code that produces states from operations which provably
        preserve these properties (unitary conjugation, tensor
        products, partial traces) passes ``validate=False`` to avoid an
        O(dim^3) eigenvalue check per step; such states remain covered
        by the invariant tests.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix, *, validate: bool = True):
        m = _as_square_complex(matrix)
        if validate:
            _check_density(m)
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_pure(cls, vector) -> "DensityMatrix":
        """Density matrix of a pure state; the vector is normalized first."""
        v = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ValidationError("zero vector cannot define a pure state")
        v = v / norm
        return cls(np.outer(v, v.conj()), validate=False)

    def revalidate(self) -> "DensityMatrix":
        """Re-run the full structural checks; returns self on success."""
        _check_density(self.matrix)
        return self

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"DensityMatrix(dim={self.dim})"


def _check_density(m: np.ndarray) -> None:
    herm = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if herm > HERMITICITY_TOL:
        raise ValidationError(f"not Hermitian: deviation {herm:.3e} > {HERMITICITY_TOL:.0e}")
    tr = complex(np.trace(m))
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"trace {tr:.12g} differs from 1 by more than {TRACE_TOL:.0e}")
    lowest = float(np.linalg.eigvalsh(m)[0])
    if lowest < PSD_FLOOR:
        raise ValidationError(f"negative eigenvalue {lowest:.3e} beyond tolerance {PSD_FLOOR:.0e}")


class HermitianOperator:
    """A Hermitian matrix with a cached eigendecomposition.

    The eigendecomposition is computed lazily on first use and reused,
    so repeated :func:`evolve` calls with the same operator cost two
    matrix multiplications each instead of a fresh diagonalization.
    """

    __slots__ = ("matrix", "_eig")

    def __init__(self, matrix, *, validate: bool = True):
        m = _as_square_complex(matrix)
        if validate:
            herm = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
            if herm > HERMITICITY_TOL:
                raise ValidationError(
                    f"not Hermitian: deviation {herm:.3e} > {HERMITICITY_TOL:.0e}"
                )
        self.matrix = m
        self._eig: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (eigenvalues, eigenvectors), computing them once."""
        if self._eig is None:
            w, v = np.linalg.eigh(self.matrix)
            self._eig = (w, v)
        return self._eig

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        return HermitianOperator(self.matrix + other.matrix, validate=False)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        return HermitianOperator(self.matrix - other.matrix, validate=False)

    def __mul__(self, scalar) -> "HermitianOperator":
        if not np.isscalar(scalar) or isinstance(scalar, complex):
            return NotImplemented
        return HermitianOperator(self.matrix * float(scalar), validate=False)

    __rmul__ = __mul__

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"HermitianOperator(dim={self.dim})"


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered subsystem labels with their local dimensions.

    The first label is the most significant flat index.  Labels must be
    unique; dimensions must be positive.
    """

    labels: tuple[str, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.labels) != len(self.dims):
            raise ValidationError("labels and dims must have equal length")
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError(f"duplicate subsystem labels in {self.labels!r}")
        if any(d < 1 for d in self.dims):
            raise ValidationError(f"dimensions must be positive, got {self.dims!r}")

    @property
    def dim(self) -> int:
        """Total Hilbert-space dimension (product of local dims)."""
        out = 1
        for d in self.dims:
            out *= d
        return out

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown subsystem label {label!r}") from None

    def dim_of(self, label: str) -> int:
        return self.dims[self.index(label)]

    def restrict(self, keep: Iterable[str]) -> "SubsystemLayout":
        """Sub-layout of the kept labels, preserving layout order."""
        kept = set(keep)
        unknown = kept - set(self.labels)
        if unknown:
            raise ValidationError(f"unknown subsystem labels {sorted(unknown)!r}")
        pairs = [(l, d) for l, d in zip(self.labels, self.dims) if l in kept]
        return SubsystemLayout(tuple(l for l, _ in pairs), tuple(d for _, d in pairs))

    def drop(self, remove: Iterable[str]) -> "SubsystemLayout":
        removed = set(remove)
        return self.restrict([l for l in self.labels if l not in removed])

    def relabel(self, old: str, new: str) -> "SubsystemLayout":
        """Rename one subsystem in place (same slot, same dimension)."""
        k = self.index(old)
        labels = list(self.labels)
        labels[k] = new
        return SubsystemLayout(tuple(labels), self.dims)


def tensor(a, b):
    """Kronecker product of two density matrices or two Hermitian operators.

    The left factor occupies the slow (most significant) index, matching
    :class:`SubsystemLayout` order.
    """
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix), validate=False)
    if isinstance(a, HermitianOperator) and isinstance(b, HermitianOperator):
        return HermitianOperator(np.kron(a.matrix, b.matrix), validate=False)
    raise TypeError("tensor expects two DensityMatrix or two HermitianOperator operands")


def partial_trace_array(matrix: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a raw square array over the axes not in ``keep``.

    ``dims`` are the local dimensions in layout order, ``keep`` the axis
    positions to retain.  Works on any square array (not just unit-trace
    states), which the metrics layer uses on unnormalized blocks.
    """
    n = len(dims)
    expected = 1
    for d in dims:
        expected *= d
    if matrix.shape != (expected, expected):
        raise ValidationError(
            f"matrix shape {matrix.shape!r} does not match layout dims {tuple(dims)!r}"
        )
    keep_sorted = sorted(keep)
    t = matrix.reshape(tuple(dims) * 2)
    # Trace out from the highest axis down so lower axis numbers stay valid.
    removed = 0
    for ax in range(n - 1, -1, -1):
        if ax in keep_sorted:
            continue
        remaining = n - removed
        t = np.trace(t, axis1=ax, axis2=ax + remaining)
        removed += 1
    kept_dim = 1
    for ax in keep_sorted:
        kept_dim *= dims[ax]
    return t.reshape(kept_dim, kept_dim)


def partial_trace(rho: DensityMatrix, layout: SubsystemLayout, keep: Iterable[str]) -> DensityMatrix:
    """Reduced state on the kept subsystems, in layout order.

    Parameters
    ----------
    rho:
        State on the full layout.
    layout:
        Subsystem structure of ``rho``.
    keep:
        Labels to retain; must be a nonempty subset of ``layout.labels``.
    """
    kept = list(keep)
    if not kept:
        raise ValidationError("keep must name at least one subsystem")
    kept_set = set(kept)
    unknown = kept_set - set(layout.labels)
    if unknown:
        raise ValidationError(f"unknown subsystem labels {sorted(unknown)!r}")
    if layout.dim != rho.dim:
        raise ValidationError(
            f"state dim {rho.dim} does not match layout dim {layout.dim}"
        )
    axes = [i for i, l in enumerate(layout.labels) if l in kept_set]
    reduced = partial_trace_array(rho.matrix, layout.dims, axes)
    return DensityMatrix(reduced, validate=False)


def matrix_sqrt(m) -> np.ndarray:
    """Principal square root of a PSD matrix via eigendecomposition.

    Eigenvalues in [-1e-10, 0) are clamped to zero; anything more
    negative raises :class:`ValidationError`.
    """
    a = m.matrix if isinstance(m, DensityMatrix) else _as_square_complex(m)
    w, v = np.linalg.eigh(a)
    if w[0] < PSD_FLOOR:
        raise ValidationError(
            f"negative eigenvalue {w[0]:.3e} beyond tolerance {PSD_FLOOR:.0e}"
        )
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def trace_norm(m) -> float:
    """Sum of singular values of a square matrix."""
    a = m.matrix if isinstance(m, DensityMatrix) else np.asarray(m, dtype=complex)
    return float(np.linalg.svd(a, compute_uv=False).sum())


def fidelity_B(rho, sigma) -> float:
    """Distinguishability fidelity ``B = || sqrt(rho) sqrt(sigma) ||_1``.

    Symmetric, unitarily invariant, 1 iff the states coincide and 0
    exactly for orthogonal supports.
    """
    return trace_norm(matrix_sqrt(rho) @ matrix_sqrt(sigma))


def overlap_L(rho, sigma) -> float:
    """State overlap ``L = Tr[rho sigma]``; satisfies ``L <= B**2``."""
    a = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    b = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma, dtype=complex)
    return float(np.real(np.trace(a @ b)))


def entropy_of_spectrum(w: np.ndarray) -> float:
    """Base-2 entropy of an eigenvalue vector with 0*log(0) = 0."""
    w = np.asarray(w, dtype=float)
    if w.size and float(w.min()) < PSD_FLOOR:
        raise ValidationError(
            f"negative eigenvalue {float(w.min()):.3e} beyond tolerance {PSD_FLOOR:.0e}"
        )
    w = np.clip(w, 0.0, None)
    nz = w[w > 0.0]
    return float(-(nz * np.log2(nz)).sum())


def von_neumann_entropy(rho) -> float:
    """Von Neumann entropy in bits: ``-sum(lam * log2(lam))``."""
    a = rho.matrix if isinstance(rho, DensityMatrix) else _as_square_complex(rho)
    return entropy_of_spectrum(np.linalg.eigvalsh(a))


def evolve(rho: DensityMatrix, h: HermitianOperator, t: float) -> DensityMatrix:
    """Unitary evolution ``U rho U^dag`` with ``U = exp(-i H t)`` (hbar = 1).

    Uses the eigendecomposition cached on ``h``; after the one-off
    O(dim^3) factorization each call is two matrix products.
    """
    if rho.dim != h.dim:
        raise ValidationError(f"state dim {rho.dim} does not match operator dim {h.dim}")
    w, v = h.eigensystem()
    phases = np.exp(-1j * w * float(t))
    u = (v * phases) @ v.conj().T
    return DensityMatrix(u @ rho.matrix @ u.conj().T, validate=False)
