"""Structural verifiers for exact objectivity of branch-form states.

A branch-form state is a classical mixture of branches: an index i
with probability p_i, a system wavefunction over positions, and one
conditional state per environment.  The checkers in this module decide
whether such a state stays perfectly objective when the description is
rewritten relative to one of the environments, without building any
Hilbert-space matrices.  Positions are real numbers; all distinctness
and orthogonality tests use an absolute tolerance.

check_strict_objectivity handles pure localized environments, where
the broadcast spectrum is the same in every frame.
check_mixture_objectivity handles position-incoherent environment
mixtures, where each frame sees its own finer-grained spectrum, which
is returned.  check_reduced_objectivity drops down to numerics: it
transforms a ring state, removes the old frame's slot, and tests the
broadcast form directly.  check_injectivity covers continuous relation
maps tabulated on a grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DensityMatrix,
    HERMITICITY_TOL,
    PSD_FLOOR,
    SubsystemLayout,
    TRACE_TOL,
    ValidationError,
    fidelity_B,
    partial_trace,
    trace_norm,
)
from .metrics import (
    CONDITIONAL_THRESHOLD,
    _system_blocks,
    conditional_mutual_information,
    conditional_state,
    system_spectrum,
)
from .ring import apply_frame_transform, build_frame_permutation

DISTINCTNESS_TOL = 1e-9


# ---------------------------------------------------------------------------
# data carriers


@dataclass(frozen=True)
class Violation:
    """One failed condition: which check, where, and how badly."""

    condition: str
    indices: tuple
    magnitude: float


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a structural check.

    verdict is "pass" exactly when violations is empty.  notes carry
    advisory observations (degeneracies, skipped sub-checks, heuristic
    outcomes) that do not affect the verdict.  spectrum, when present,
    is the measured pointer spectrum of a numeric check.
    """

    verdict: str
    violations: tuple = ()
    notes: tuple = ()
    spectrum: tuple | None = None

    def __post_init__(self):
        if self.verdict not in ("pass", "fail"):
            raise ValidationError(f"verdict must be pass or fail, got {self.verdict!r}")
        if (self.verdict == "pass") != (len(self.violations) == 0):
            raise ValidationError("verdict must agree with the violation list")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def conditions(self) -> tuple:
        """Sorted distinct condition ids among the violations."""
        return tuple(sorted({v.condition for v in self.violations}))

    def summary(self) -> str:
        """Human-readable multi-line rendering."""
        lines = [f"verdict: {self.verdict}"]
        for v in self.violations:
            lines.append(
                f"  violated {v.condition} at {v.indices!r} (magnitude {v.magnitude:.3e})"
            )
        for note in self.notes:
            lines.append(f"  note: {note}")
        if self.spectrum is not None:
            vals = " ".join(f"{x:.6g}" for x in self.spectrum)
            lines.append(f"  spectrum: {vals}")
        return "\n".join(lines)


def _as_report(violations, notes=(), spectrum=None) -> CheckReport:
    verdict = "pass" if not violations else "fail"
    return CheckReport(
        verdict=verdict,
        violations=tuple(violations),
        notes=tuple(notes),
        spectrum=spectrum,
    )


@dataclass(frozen=True)
class Wavefunction:
    """Discrete wavefunction: amplitudes attached to real positions."""

    positions: tuple
    amplitudes: tuple

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        amp = np.asarray(self.amplitudes, dtype=complex)
        if pos.ndim != 1 or pos.size == 0:
            raise ValidationError("positions must be a nonempty 1-D sequence")
        if amp.shape != pos.shape:
            raise ValidationError("amplitudes must match positions in length")
        if np.min(np.abs(pos[:, None] - pos[None, :]) + np.eye(pos.size)) <= 0:
            raise ValidationError("positions must be pairwise distinct")
        norm = float(np.sum(np.abs(amp) ** 2))
        if abs(norm - 1.0) > 1e-9:
            raise ValidationError(f"wavefunction norm^2 is {norm}, expected 1")
        object.__setattr__(self, "positions", tuple(float(x) for x in pos))
        object.__setattr__(self, "amplitudes", tuple(complex(a) for a in amp))

    @property
    def n_sites(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class ConditionalState:
    """Environment state table over real positions.

    matrix[a, b] is the density-matrix entry between the positions at
    indices a and b; it must be a valid density matrix.
    """

    positions: tuple
    matrix: tuple

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        m = np.asarray(self.matrix, dtype=complex)
        if pos.ndim != 1 or pos.size == 0:
            raise ValidationError("positions must be a nonempty 1-D sequence")
        if m.shape != (pos.size, pos.size):
            raise ValidationError(
                f"matrix shape {m.shape} does not match {pos.size} positions"
            )
        if np.min(np.abs(pos[:, None] - pos[None, :]) + np.eye(pos.size)) <= 0:
            raise ValidationError("positions must be pairwise distinct")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise ValidationError("conditional table is not Hermitian")
        if abs(np.trace(m).real - 1.0) > TRACE_TOL:
            raise ValidationError("conditional table trace must be 1")
        if np.min(np.linalg.eigvalsh(m)) < PSD_FLOOR:
            raise ValidationError("conditional table is not positive semidefinite")
        object.__setattr__(self, "positions", tuple(float(x) for x in pos))
        object.__setattr__(
            self, "matrix", tuple(tuple(complex(x) for x in row) for row in m)
        )

    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=complex)

    def diagonal_weights(self) -> np.ndarray:
        return np.real(np.diagonal(self.array()))

    def max_off_diagonal(self) -> float:
        m = self.array()
        return float(np.max(np.abs(m - np.diag(np.diag(m))))) if m.shape[0] > 1 else 0.0

    def support(self, tol: float):
        """Positions and weights of the diagonal entries above tol."""
        w = self.diagonal_weights()
        keep = w > tol
        pos = np.asarray(self.positions)[keep]
        return [(float(q), float(t)) for q, t in zip(pos, w[keep])]


@dataclass(frozen=True)
class BranchSpec:
    """Branch decomposition of a system plus N environments.

    p[i] weights branch i; system_wavefunctions[i] is the system state
    in branch i; env_conditionals[i][j] is environment j's state in
    branch i.  All branches must agree on the number of environments.
    """

    p: tuple
    system_wavefunctions: tuple
    env_conditionals: tuple

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValidationError("p must be a nonempty probability vector")
        if np.any(p < 0) or abs(float(p.sum()) - 1.0) > 1e-9:
            raise ValidationError("p must be nonnegative and sum to 1")
        if len(self.system_wavefunctions) != p.size:
            raise ValidationError("one system wavefunction per branch is required")
        if len(self.env_conditionals) != p.size:
            raise ValidationError("one environment row per branch is required")
        n_env = {len(row) for row in self.env_conditionals}
        if len(n_env) != 1:
            raise ValidationError("all branches must list the same environments")
        if next(iter(n_env)) == 0:
            raise ValidationError("at least one environment is required")
        for psi in self.system_wavefunctions:
            if not isinstance(psi, Wavefunction):
                raise ValidationError("system_wavefunctions must hold Wavefunction")
        for row in self.env_conditionals:
            for cond in row:
                if not isinstance(cond, ConditionalState):
                    raise ValidationError("env_conditionals must hold ConditionalState")
        object.__setattr__(self, "p", tuple(float(x) for x in p))
        object.__setattr__(
            self, "system_wavefunctions", tuple(self.system_wavefunctions)
        )
        object.__setattr__(
            self, "env_conditionals", tuple(tuple(row) for row in self.env_conditionals)
        )

    @property
    def n_branches(self) -> int:
        return len(self.p)

    @property
    def n_envs(self) -> int:
        return len(self.env_conditionals[0])


def localized_branch_spec(positions, p) -> BranchSpec:
    """Branch spec with every subsystem pinned to a single position.

    positions[i] is the tuple (x_S, x_E1, ..., x_EN) for branch i.
    """
    rows = [tuple(float(x) for x in row) for row in positions]
    if len({len(r) for r in rows}) != 1:
        raise ValidationError("all branches must have the same arity")
    if len(rows[0]) < 2:
        raise ValidationError("need a system and at least one environment")
    system = tuple(Wavefunction((row[0],), (1.0,)) for row in rows)
    envs = tuple(
        tuple(ConditionalState((x,), ((1.0,),)) for x in row[1:]) for row in rows
    )
    return BranchSpec(p=tuple(p), system_wavefunctions=system, env_conditionals=envs)


# ---------------------------------------------------------------------------
# overlap arithmetic on shifted discrete wavefunctions


def _shifted_overlap(psi_a: Wavefunction, shift_a, psi_b: Wavefunction, shift_b, tol):
    """<psi_a shifted by -shift_a | psi_b shifted by -shift_b>.

    Amplitudes meet only where the shifted positions coincide within
    tol, so the overlap is a sum over matching position pairs.
    """
    pa = np.asarray(psi_a.positions) - shift_a
    pb = np.asarray(psi_b.positions) - shift_b
    aa = np.conj(np.asarray(psi_a.amplitudes))
    ab = np.asarray(psi_b.amplitudes)
    close = np.abs(pa[:, None] - pb[None, :]) <= tol
    return complex(np.sum(aa[:, None] * ab[None, :] * close))


def _collisions(values, tol):
    """Index pairs whose values coincide within tol, via sorting."""
    order = np.argsort(values, kind="stable")
    v = np.asarray(values, dtype=float)[order]
    pairs = []
    for k in range(v.size - 1):
        if abs(v[k + 1] - v[k]) <= tol:
            i, j = int(order[k]), int(order[k + 1])
            pairs.append(((min(i, j), max(i, j)), abs(v[k + 1] - v[k])))
    return pairs


# ---------------------------------------------------------------------------
# frame transforms of fully localized branch tuples


def ghz_frame_transform(positions, p, target):
    """Rewrite localized branch positions relative to environment `target`.

    positions[i] is (x_S, x_E1, ..., x_EN) for branch i with weight
    p[i]; target is the 1-based environment index adopted as the new
    frame.  Returns the relative position tuples, ordered (system, old
    frame, remaining environments), plus a report whose verdict says
    whether every slot separates the branches.
    """
    rows = [tuple(float(x) for x in row) for row in positions]
    if not rows:
        raise ValidationError("positions must be nonempty")
    arity = {len(r) for r in rows}
    if len(arity) != 1:
        raise ValidationError("all branches must have the same arity")
    n_slots = next(iter(arity))
    n_envs = n_slots - 1
    if n_envs < 1:
        raise ValidationError("need a system and at least one environment")
    if not 1 <= int(target) <= n_envs:
        raise ValidationError(f"target must be in 1..{n_envs}, got {target}")
    pv = np.asarray(p, dtype=float)
    if pv.shape != (len(rows),) or np.any(pv < 0) or abs(pv.sum() - 1.0) > 1e-9:
        raise ValidationError("p must be a probability vector over the branches")

    t = int(target)
    transformed = []
    for row in rows:
        x_t = row[t]
        rel = [row[0] - x_t, -x_t]
        rel.extend(row[j] - x_t for j in range(1, n_slots) if j != t)
        transformed.append(tuple(rel))

    labels = ["S", "C"] + [f"E{j}" for j in range(1, n_slots) if j != t]
    violations = []
    notes = []
    for slot, label in enumerate(labels):
        values = [row[slot] for row in transformed]
        hits = _collisions(values, DISTINCTNESS_TOL)
        for (i, j), gap in hits:
            violations.append(Violation(f"slot-distinct:{label}", (i, j), gap))
        if len(values) > 1 and max(values) - min(values) <= DISTINCTNESS_TOL:
            notes.append(
                f"slot {label} holds a single value across all branches; "
                "it carries no record of the branch index in this frame"
            )
    return tuple(transformed), _as_report(violations, notes)


# ---------------------------------------------------------------------------
# strict objectivity: pure localized environments, one shared spectrum


def check_strict_objectivity(spec: BranchSpec, tol: float = DISTINCTNESS_TOL):
    """Verify the five conditions for frame-independent objectivity.

    a) every environment conditional is a pure position eigenstate;
    b) system wavefunctions are pairwise orthogonal;
    c) per environment, branch positions are pairwise distinct;
    d) per environment pair, relative positions are distinct across
       branches;
    e) per environment, the system wavefunctions shifted by that
       environment's branch positions stay pairwise orthogonal.
    A pass means every frame sees the same broadcast spectrum p.
    """
    violations = []
    notes = []
    n = spec.n_branches
    n_env = spec.n_envs

    located = {}
    for i in range(n):
        for j in range(n_env):
            cond = spec.env_conditionals[i][j]
            m = cond.array()
            k_star = int(np.argmax(np.real(np.diagonal(m))))
            probe = np.zeros_like(m)
            probe[k_star, k_star] = 1.0
            deviation = float(np.max(np.abs(m - probe)))
            if deviation > tol:
                violations.append(
                    Violation("a-env-pure-localized", (i, j + 1), deviation)
                )
            else:
                located[(i, j)] = cond.positions[k_star]

    for i in range(n):
        for k in range(i + 1, n):
            ov = abs(
                _shifted_overlap(
                    spec.system_wavefunctions[i],
                    0.0,
                    spec.system_wavefunctions[k],
                    0.0,
                    tol,
                )
            )
            if ov > tol:
                violations.append(Violation("b-system-orthogonal", (i, k), ov))

    for j in range(n_env):
        known = [(i, located[(i, j)]) for i in range(n) if (i, j) in located]
        if len(known) < n:
            notes.append(
                f"environment {j + 1}: position conditions skipped for branches "
                "without a localized conditional"
            )
        idx = [i for i, _ in known]
        vals = [x for _, x in known]
        for (a, b), gap in _collisions(vals, tol):
            violations.append(
                Violation("c-env-positions-distinct", (j + 1, idx[a], idx[b]), gap)
            )

    for j in range(n_env):
        for k in range(j + 1, n_env):
            idx = [
                i for i in range(n) if (i, j) in located and (i, k) in located
            ]
            vals = [located[(i, j)] - located[(i, k)] for i in idx]
            for (a, b), gap in _collisions(vals, tol):
                violations.append(
                    Violation(
                        "d-relative-positions-distinct",
                        (j + 1, k + 1, idx[a], idx[b]),
                        gap,
                    )
                )

    for j in range(n_env):
        idx = [i for i in range(n) if (i, j) in located]
        for a in range(len(idx)):
            for b in range(a + 1, len(idx)):
                ia, ib = idx[a], idx[b]
                ov = abs(
                    _shifted_overlap(
                        spec.system_wavefunctions[ia],
                        located[(ia, j)],
                        spec.system_wavefunctions[ib],
                        located[(ib, j)],
                        tol,
                    )
                )
                if ov > tol:
                    violations.append(
                        Violation("e-shifted-system-orthogonal", (j + 1, ia, ib), ov)
                    )

    return _as_report(violations, notes)


# ---------------------------------------------------------------------------
# mixture objectivity: incoherent environments, one spectrum per frame


def check_mixture_objectivity(spec: BranchSpec, tol: float = DISTINCTNESS_TOL):
    """Verify objectivity of incoherent-environment branch states.

    Requires every environment conditional to be diagonal in position
    (a coherent conditional is reported as a precondition violation,
    not raised).  On top of the lab-frame conditions, each environment
    frame splits branch i into sub-branches, one per support point q of
    that environment's mixture; the check confirms the shifted system
    states and the shifted remaining environments still separate all
    sub-branches.

    Returns (report, new_spectra) where new_spectra[j] lists, for the
    frame of environment j (1-based), triples (i, q, weight) with
    weight = p_i * t_j(q | i); the weights are that frame's broadcast
    spectrum.
    """
    violations = []
    notes = []
    n = spec.n_branches
    n_env = spec.n_envs

    for i in range(n):
        for j in range(n_env):
            off = spec.env_conditionals[i][j].max_off_diagonal()
            if off > tol:
                violations.append(Violation("incoherent-env", (i, j + 1), off))
    if violations:
        notes.append("precondition failed; frame-wise conditions not evaluated")
        return _as_report(violations, notes), {}

    supports = {
        (i, j): spec.env_conditionals[i][j].support(tol)
        for i in range(n)
        for j in range(n_env)
    }

    for i in range(n):
        for k in range(i + 1, n):
            ov = abs(
                _shifted_overlap(
                    spec.system_wavefunctions[i],
                    0.0,
                    spec.system_wavefunctions[k],
                    0.0,
                    tol,
                )
            )
            if ov > tol:
                violations.append(Violation("system-orthogonal", (i, k), ov))

    for j in range(n_env):
        for i in range(n):
            for k in range(i + 1, n):
                gaps = [
                    abs(q - r)
                    for q, _ in supports[(i, j)]
                    for r, _ in supports[(k, j)]
                ]
                if gaps and min(gaps) <= tol:
                    violations.append(
                        Violation("env-support-disjoint", (j + 1, i, k), min(gaps))
                    )

    new_spectra = {}
    for j in range(n_env):
        branches = [
            (i, q, spec.p[i] * w) for i in range(n) for q, w in supports[(i, j)]
        ]
        new_spectra[j + 1] = tuple(branches)

        for a in range(len(branches)):
            for b in range(a + 1, len(branches)):
                ia, qa, _ = branches[a]
                ib, qb, _ = branches[b]
                ov = abs(
                    _shifted_overlap(
                        spec.system_wavefunctions[ia],
                        qa,
                        spec.system_wavefunctions[ib],
                        qb,
                        tol,
                    )
                )
                if ov > tol:
                    violations.append(
                        Violation(
                            "shifted-system-orthogonal",
                            (j + 1, (ia, qa), (ib, qb)),
                            ov,
                        )
                    )
                for k in range(n_env):
                    if k == j:
                        continue
                    gaps = [
                        abs((q - qa) - (r - qb))
                        for q, _ in supports[(ia, k)]
                        for r, _ in supports[(ib, k)]
                    ]
                    if gaps and min(gaps) <= tol:
                        violations.append(
                            Violation(
                                "shifted-env-disjoint",
                                (j + 1, k + 1, (ia, qa), (ib, qb)),
                                min(gaps),
                            )
                        )

    if n == 1:
        notes.append("single branch: lab-frame separation is vacuous")
    return _as_report(violations, notes), new_spectra


# ---------------------------------------------------------------------------
# numeric reduced-state check on ring states


def check_reduced_objectivity(
    rho: DensityMatrix,
    layout: SubsystemLayout,
    target_frame: str,
    tol: float = 1e-9,
    threshold: float | None = None,
):
    """Test the broadcast form of a ring state seen from target_frame.

    For an environment target the state is transformed into that
    frame and the old frame's slot (labelled C) is traced out; for
    target "C" the state is used as is.  The surviving state must then
    have a diagonal pointer ("S") decomposition: off-diagonal pointer
    blocks below tol in trace norm, pairwise conditional-state
    fidelities below tol for every observer, and mean conditional
    mutual information below tol for every observer pair.
    """
    threshold = CONDITIONAL_THRESHOLD if threshold is None else threshold
    if "S" not in layout.labels:
        raise ValidationError("layout must contain the pointer subsystem S")
    if target_frame == "C":
        work, lay = rho, layout
    else:
        if target_frame not in layout.labels:
            raise ValidationError(f"unknown frame {target_frame!r}")
        D = layout.dims[0]
        perm = build_frame_permutation(D, layout, target_frame)
        transformed = apply_frame_transform(rho, perm)
        keep = tuple(l for l in perm.layout_out.labels if l != "C")
        work = partial_trace(transformed, perm.layout_out, keep)
        lay = perm.layout_out.restrict(keep)

    violations = []
    notes = []
    m4, _ = _system_blocks(work, lay, "S")
    d_s = m4.shape[0]
    for i in range(d_s):
        for k in range(i + 1, d_s):
            tn = trace_norm(m4[i, :, k, :])
            if tn > tol:
                violations.append(Violation("pointer-offdiagonal", (i, k), tn))

    p = system_spectrum(work, lay, "S")
    valid = [i for i in range(d_s) if p[i] >= threshold]
    observers = tuple(l for l in lay.labels if l != "S")

    if observers:
        for obs in observers:
            reduced = {
                i: conditional_state(work, lay, "S", obs, i, threshold=threshold)
                for i in valid
            }
            for a in range(len(valid)):
                for b in range(a + 1, len(valid)):
                    i, k = valid[a], valid[b]
                    fid = fidelity_B(reduced[i], reduced[k])
                    if fid > tol:
                        violations.append(
                            Violation("conditional-overlap", (obs, i, k), fid)
                        )
    if len(observers) >= 2:
        for a in range(len(observers)):
            for b in range(a + 1, len(observers)):
                pair = (observers[a], observers[b])
                i_mean = conditional_mutual_information(
                    work, lay, "S", pair, threshold=threshold
                )
                if i_mean > tol:
                    violations.append(
                        Violation("conditional-dependence", pair, i_mean)
                    )
    elif len(observers) == 1:
        notes.append("single observer: independence is vacuous")
    else:
        notes.append("no observers survive; only pointer diagonality was tested")

    if len(valid) <= 1:
        notes.append("degenerate branch structure: at most one outcome has weight")
    return _as_report(violations, notes, spectrum=tuple(float(x) for x in p))


# ---------------------------------------------------------------------------
# injectivity of tabulated relation maps


@dataclass(frozen=True)
class TabulatedMap:
    """A sampled function: y[k] = f(x[k]) on a shared grid."""

    x: tuple
    y: tuple

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ValidationError("need at least two sample points")
        if y.shape != x.shape:
            raise ValidationError("y must match x in length")
        if np.unique(x).size != x.size:
            raise ValidationError("sample points must be distinct")
        object.__setattr__(self, "x", tuple(float(v) for v in x))
        object.__setattr__(self, "y", tuple(float(v) for v in y))


def check_injectivity(maps, frame: int, tol: float = DISTINCTNESS_TOL):
    """Test whether relational descriptions stay one-to-one in a frame.

    maps[j-1] tabulates environment j's position as a function of a
    shared parameter grid; frame picks the environment adopted as the
    reference (1-based).  With f the frame's map, the functions that
    must stay injective are x - f(x) (the old frame's relative record)
    and g_j(x) = maps_j(x) - f(x) for every other environment.  The
    verdict comes from exact duplicate detection on the sampled
    values; a finite-difference slope comparison against the frame map
    is reported in the notes as a separate sufficient criterion.
    """
    maps = tuple(maps)
    if not maps:
        raise ValidationError("need at least one map")
    for j, m in enumerate(maps):
        if not isinstance(m, TabulatedMap):
            raise ValidationError("maps must hold TabulatedMap values")
        if m.x != maps[0].x:
            raise ValidationError("all maps must share the same sample grid")
        hits = _collisions(m.y, tol)
        if hits:
            (i, k), gap = hits[0]
            raise ValidationError(
                f"map {j + 1} is not one-to-one on its samples "
                f"(outputs {i} and {k} coincide within {gap:.3e})"
            )
    if not 1 <= int(frame) <= len(maps):
        raise ValidationError(f"frame must be in 1..{len(maps)}, got {frame}")

    f = np.asarray(maps[frame - 1].y)
    x = np.asarray(maps[0].x)
    violations = []
    notes = []

    for (i, k), gap in _collisions(x - f, tol):
        violations.append(Violation("frame-map-collision", (i, k), gap))

    order = np.argsort(x)
    df = np.diff(f[order])
    for j, m in enumerate(maps, start=1):
        if j == frame:
            continue
        g = np.asarray(m.y) - f
        for (i, k), gap in _collisions(g, tol):
            violations.append(Violation("composed-map-collision", (j, i, k), gap))
        ratio = np.diff(np.asarray(m.y)[order]) / df
        if np.all(ratio > 1 + tol):
            notes.append(f"map {j}: slope ratio stays above 1 (sufficient criterion)")
        elif np.all(ratio < 1 - tol):
            notes.append(f"map {j}: slope ratio stays below 1 (sufficient criterion)")
        else:
            notes.append(
                f"map {j}: slope-ratio criterion inconclusive; "
                "verdict rests on the duplicate test"
            )
    return _as_report(violations, notes)


# ---------------------------------------------------------------------------
# ring instantiation for cross-checking against the numeric pipeline


@dataclass(frozen=True)
class RingEmbedding:
    """A branch spec realized as a density matrix on a ring."""

    rho: DensityMatrix
    layout: SubsystemLayout
    D: int
    resolution: float
    origin: float


def _all_positions(spec: BranchSpec):
    out = []
    for psi in spec.system_wavefunctions:
        out.extend(psi.positions)
    for row in spec.env_conditionals:
        for cond in row:
            out.extend(cond.positions)
    return np.asarray(out, dtype=float)


def instantiate_on_ring(spec: BranchSpec, resolution: float | None = None):
    """Embed a branch spec into ring coordinates.

    Positions are snapped to integer multiples of `resolution` (by
    default the smallest pairwise gap between distinct positions) and
    the ring dimension is chosen just large enough that distinct
    positions and distinct pairwise differences never wrap onto each
    other.  Raises if snapping would merge or visibly move positions.
    """
    values = _all_positions(spec)
    distinct = np.unique(values)
    if resolution is None:
        if distinct.size < 2:
            resolution = 1.0
        else:
            resolution = float(np.min(np.diff(distinct)))
    if resolution <= 0:
        raise ValidationError("resolution must be positive")
    origin = float(distinct.min())
    scaled = (values - origin) / resolution
    snapped = np.rint(scaled)
    if np.max(np.abs(scaled - snapped)) > 0.3:
        raise ValidationError(
            "positions are not commensurate with the chosen resolution"
        )
    if np.unique(snapped).size != distinct.size:
        raise ValidationError("snapping would merge distinct positions")

    span = int(snapped.max())
    D = max(2, 2 * span + 1)

    def site(x: float) -> int:
        return int(np.rint((x - origin) / resolution)) % D

    n_env = spec.n_envs
    labels = ("S",) + tuple(f"E{j}" for j in range(1, n_env + 1))
    layout = SubsystemLayout(labels, (D,) * (n_env + 1))
    total = np.zeros((layout.dim, layout.dim), dtype=complex)
    for i in range(spec.n_branches):
        psi = spec.system_wavefunctions[i]
        vec = np.zeros(D, dtype=complex)
        for x, a in zip(psi.positions, psi.amplitudes):
            vec[site(x)] = a
        block = np.outer(vec, vec.conj())
        for cond in spec.env_conditionals[i]:
            env = np.zeros((D, D), dtype=complex)
            m = cond.array()
            for a_idx, xa in enumerate(cond.positions):
                for b_idx, xb in enumerate(cond.positions):
                    env[site(xa), site(xb)] = m[a_idx, b_idx]
            block = np.kron(block, env)
        total += spec.p[i] * block
    rho = DensityMatrix(total)
    return RingEmbedding(
        rho=rho, layout=layout, D=D, resolution=float(resolution), origin=origin
    )
