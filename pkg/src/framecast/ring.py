"""Discrete ring coordinates and reference-frame relabelling.

A multipartite basis state on the ring is a tuple of positions in
Z_D.  Adopting one subsystem as the reference frame replaces every
coordinate x_k by the relative coordinate (x_k - x_t) mod D, while the
old frame subsystem's slot records (-x_t) mod D and is relabelled to
the name of the frame we came from.  On the flat index space this is a
permutation of basis states, so the transform is exactly unitary and
an involution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import DensityMatrix, SubsystemLayout, ValidationError


@dataclass(frozen=True)
class RingCoordinate:
    """A position on the ring Z_D with mod-D arithmetic.

    Negative inputs are canonicalized into [0, D).
    """

    value: int
    period: int

    def __post_init__(self):
        if self.period < 1:
            raise ValidationError(f"ring period must be positive, got {self.period}")
        object.__setattr__(self, "value", int(self.value) % self.period)

    def _coerce(self, other) -> int:
        if isinstance(other, RingCoordinate):
            if other.period != self.period:
                raise ValidationError(
                    f"mixed ring periods {self.period} and {other.period}"
                )
            return other.value
        return int(other)

    def __add__(self, other) -> "RingCoordinate":
        return RingCoordinate(self.value + self._coerce(other), self.period)

    __radd__ = __add__

    def __sub__(self, other) -> "RingCoordinate":
        return RingCoordinate(self.value - self._coerce(other), self.period)

    def __neg__(self) -> "RingCoordinate":
        return RingCoordinate(-self.value, self.period)

    def __int__(self) -> int:
        return self.value

    def distance(self, other) -> int:
        """Ring (arc) distance min(|a-b|, D-|a-b|)."""
        d = abs(self.value - self._coerce(other)) % self.period
        return min(d, self.period - d)


@dataclass(frozen=True)
class FramePermutation:
    """Basis permutation implementing one frame change.

    ``mapping[a]`` is the flat index of the image of basis state ``a``.
    The permutation is an involution, so it is its own inverse and
    ``argsort(mapping) == mapping``.
    """

    D: int
    layout_in: SubsystemLayout
    layout_out: SubsystemLayout
    source_frame: str
    target_frame: str
    mapping: np.ndarray = field(repr=False)

    @property
    def n_subsystems(self) -> int:
        return self.layout_in.size

    def fixed_points(self) -> np.ndarray:
        """Flat indices of basis states left in place by the transform."""
        idx = np.arange(self.mapping.size)
        return idx[self.mapping == idx]


def build_frame_permutation(
    D: int,
    layout: SubsystemLayout,
    target: str,
    source: str = "C",
) -> FramePermutation:
    """Permutation for transforming into the frame of subsystem ``target``.

    Every subsystem must live on the same ring (all dims equal D).  The
    target's slot keeps its position, records the negated frame
    coordinate and is relabelled to ``source`` (the name of the frame we
    are leaving, by default the lab frame C).
    """
    if D < 2:
        raise ValidationError(f"ring dimension must be at least 2, got {D}")
    if any(d != D for d in layout.dims):
        raise ValidationError(f"all subsystem dims must equal {D}, got {layout.dims!r}")
    t_axis = layout.index(target)
    if source in layout.labels and source != target:
        raise ValidationError(
            f"source label {source!r} already present in layout {layout.labels!r}"
        )
    n = layout.size

    digits = np.indices((D,) * n).reshape(n, -1)
    frame = digits[t_axis]
    new_digits = np.mod(digits - frame, D)
    new_digits[t_axis] = np.mod(-frame, D)
    # Horner re-flattening, first axis most significant.
    mapping = np.zeros(D**n, dtype=np.int64)
    for axis in range(n):
        mapping = mapping * D + new_digits[axis]
    mapping.setflags(write=False)

    layout_out = layout.relabel(target, source)
    return FramePermutation(
        D=D,
        layout_in=layout,
        layout_out=layout_out,
        source_frame=source,
        target_frame=target,
        mapping=mapping,
    )


def apply_frame_transform(rho: DensityMatrix, perm: FramePermutation) -> DensityMatrix:
    """Conjugate a state by the frame permutation: rho'[p(a), p(b)] = rho[a, b]."""
    if rho.dim != perm.mapping.size:
        raise ValidationError(
            f"state dim {rho.dim} does not match permutation size {perm.mapping.size}"
        )
    # The transform is an involution, so mapping doubles as its own argsort
    # and gather equals scatter.
    m = perm.mapping
    return DensityMatrix(rho.matrix[np.ix_(m, m)], validate=False)


def permutation_character(D: int) -> int:
    """Number of fixed basis states of the three-party frame permutation.

    Counted by explicit enumeration; equals D**2 (the tuples whose
    frame coordinate is zero).
    """
    perm = _canonical_three_party(D)
    return int(perm.fixed_points().size)


def cycle_structure(D: int) -> tuple[int, int]:
    """(fixed points, two-cycles) of the three-party frame permutation.

    The permutation is an involution, so every orbit has length one or
    two; the counts are verified here by walking the full mapping.
    """
    mapping = _canonical_three_party(D).mapping
    idx = np.arange(mapping.size)
    if not np.array_equal(mapping[mapping], idx):
        raise AssertionError("frame permutation is not an involution")
    fixed = int(np.count_nonzero(mapping == idx))
    two_cycles, rem = divmod(mapping.size - fixed, 2)
    if rem:
        raise AssertionError("odd number of non-fixed points in an involution")
    return fixed, two_cycles


def _canonical_three_party(D: int) -> FramePermutation:
    layout = SubsystemLayout(("S", "E1", "E2"), (D, D, D))
    return build_frame_permutation(D, layout, "E1")
