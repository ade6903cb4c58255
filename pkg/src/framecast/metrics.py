"""Objectivity diagnostics for multipartite states.

Everything here is computed relative to a chosen system subsystem and a
pointer basis on it (the ring position basis by default): the broadcast
spectrum, conditional observer states, pairwise fidelity tables,
distinguishability error bounds, the eta upper bound on the distance
from broadcast structure, the decoherence factor, the mean conditional
mutual information, Holevo and quantum mutual information, and
long-time saturation statistics of a mutual-information series.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DensityMatrix,
    ValidationError,
    entropy_of_spectrum,
    partial_trace,
    partial_trace_array,
    von_neumann_entropy,
)

CONDITIONAL_THRESHOLD = 1e-12
BASIS_TOL = 1e-10


@dataclass(frozen=True)
class SaturationStats:
    """Long-time statistics of a mutual-information time series.

    i_sat is the mean over the averaging window, sigma_i the RMS
    deviation inside it, and t_sat the first time in the full series at
    which the series reaches i_sat - sigma_i.
    """

    i_sat: float
    sigma_i: float
    t_sat: float


@dataclass(frozen=True)
class SbsReport:
    """All diagnostics of one state in one frame.

    fidelity_tables, error_bounds, holevo and qmi are keyed by observer
    label. Table entries for pointer outcomes whose probability falls
    below the conditional threshold are NaN. The eta field uses
    off-diagonal system-block trace norms together with the fidelity
    sums; gamma is the absolute off-diagonal sum of the reduced system
    state alone.
    """

    frame: str
    spectrum: np.ndarray
    fidelity_tables: dict = field(repr=False)
    error_bounds: dict
    eta: float
    gamma: float
    i_mean: float
    holevo: dict
    qmi: dict

    def __post_init__(self):
        total = float(np.sum(self.spectrum))
        if abs(total - 1.0) > 1e-10:
            raise ValidationError(f"broadcast spectrum sums to {total}, expected 1")
        for label, table in self.fidelity_tables.items():
            if not np.allclose(table, table.T, atol=1e-9, equal_nan=True):
                raise ValidationError(f"fidelity table for {label!r} is not symmetric")
            lower, upper = self.error_bounds[label]
            if lower > upper + 1e-12:
                raise ValidationError(
                    f"error bounds for {label!r} are inverted: {lower} > {upper}"
                )

    @property
    def observers(self) -> tuple:
        return tuple(self.fidelity_tables)


# ---------------------------------------------------------------------------
# internal helpers


def _system_blocks(rho, layout, system, basis=None):
    """Reshape the state into (d_s, R, d_s, R) system blocks.

    Axis 0 and 2 index the system in the pointer basis, axes 1 and 3
    the remaining subsystems flattened in layout order. Returns the
    block tensor together with the layout of the remaining subsystems.
    """
    if rho.dim != layout.dim:
        raise ValidationError(
            f"state dim {rho.dim} does not match layout dim {layout.dim}"
        )
    s_ax = layout.index(system)
    n = layout.size
    dims = layout.dims
    d_s = dims[s_ax]
    t = rho.matrix.reshape(dims + dims)
    t = np.moveaxis(t, (s_ax, n + s_ax), (0, n))
    rest = layout.drop([system])
    r = rest.dim
    m4 = t.reshape(d_s, r, d_s, r)
    if basis is not None:
        q = np.asarray(basis, dtype=complex)
        if q.shape != (d_s, d_s):
            raise ValidationError(
                f"pointer basis shape {q.shape} does not match system dim {d_s}"
            )
        if np.max(np.abs(q.conj().T @ q - np.eye(d_s))) > BASIS_TOL:
            raise ValidationError("pointer basis columns are not orthonormal")
        m4 = np.einsum("ia,arbs,bj->irjs", q.conj().T, m4, q, optimize=True)
    return m4, rest


def _batched_partial_trace(stack, dims, keep_axes):
    """Partial trace applied to every matrix in a leading-axis stack."""
    n = len(dims)
    shaped = stack.reshape((stack.shape[0],) + tuple(dims) * 2)
    remaining = list(range(n))
    for ax in sorted(range(n), reverse=True):
        if ax in keep_axes:
            continue
        pos = remaining.index(ax)
        shaped = np.trace(shaped, axis1=1 + pos, axis2=1 + len(remaining) + pos)
        remaining.pop(pos)
    kept = int(np.prod([dims[ax] for ax in remaining])) if remaining else 1
    return shaped.reshape(stack.shape[0], kept, kept)


# Conditional states divide a system block by its (possibly tiny)
# probability, which amplifies rounding noise well past the strict
# validation floor used for user-facing states; these internal paths
# therefore tolerate somewhat deeper spurious negativity before
# clamping to zero.
_CONDITIONAL_PSD_FLOOR = -1e-8


def _batched_entropy(stack):
    """Base-2 von Neumann entropy of every matrix in a stack."""
    if stack.shape[0] == 0:
        return np.zeros(0)
    w = np.linalg.eigvalsh(stack)
    if w.min() < _CONDITIONAL_PSD_FLOOR:
        raise ValidationError(
            f"conditional state has negative eigenvalue {w.min():.3e}"
        )
    w = np.clip(w, 0.0, None)
    safe = np.where(w > 0, w, 1.0)
    return -np.sum(w * np.log2(safe), axis=1)


def _batched_sqrt(stack):
    """Principal square root of every PSD matrix in a stack."""
    w, v = np.linalg.eigh(stack)
    if w.size and w.min() < _CONDITIONAL_PSD_FLOOR:
        raise ValidationError(
            f"conditional state has negative eigenvalue {w.min():.3e}"
        )
    w = np.clip(w, 0.0, None)
    return np.einsum("nij,nj,nkj->nik", v, np.sqrt(w), v.conj(), optimize=True)


def _pair_fidelities(conds):
    """Fidelity B for every unordered pair in a stack of states."""
    nv = conds.shape[0]
    table = np.eye(nv)
    if nv < 2:
        return table
    sq = _batched_sqrt(conds)
    ii, jj = np.triu_indices(nv, 1)
    prods = np.matmul(sq[ii], sq[jj])
    svals = np.linalg.svd(prods, compute_uv=False)
    b = svals.sum(axis=1)
    table[ii, jj] = b
    table[jj, ii] = b
    return table


def _expand_table(compact, valid):
    """Embed a valid-only table into full size with NaN elsewhere."""
    d = valid.size
    table = np.full((d, d), np.nan)
    idx = np.flatnonzero(valid)
    table[np.ix_(idx, idx)] = compact
    return table


# ---------------------------------------------------------------------------
# spectrum and conditionals


def system_spectrum(rho, layout, system, basis=None):
    """Pointer-basis populations of the reduced system state."""
    m4, _ = _system_blocks(rho, layout, system, basis)
    return np.einsum("irir->i", m4).real


def conditional_state(rho, layout, system, observer, i, basis=None, threshold=None):
    """Observer state conditioned on pointer outcome ``i`` of the system.

    Raises when the outcome probability is below the threshold, since
    the conditional is undefined there.
    """
    threshold = CONDITIONAL_THRESHOLD if threshold is None else threshold
    m4, rest = _system_blocks(rho, layout, system, basis)
    d_s = m4.shape[0]
    if not 0 <= i < d_s:
        raise ValidationError(f"pointer index {i} out of range for dim {d_s}")
    block = m4[i, :, i, :]
    p_i = np.trace(block).real
    if p_i < threshold:
        raise ValidationError(
            f"undefined conditional: outcome {i} has probability {p_i:.3e}"
        )
    labels = {observer} if isinstance(observer, str) else set(observer)
    keep = [ax for ax, lab in enumerate(rest.labels) if lab in labels]
    unknown = labels - set(rest.labels)
    if unknown:
        raise ValidationError(f"unknown observer labels {sorted(unknown)!r}")
    reduced = partial_trace_array(block / p_i, rest.dims, keep)
    return DensityMatrix(reduced, validate=False)


# ---------------------------------------------------------------------------
# bounds and decoherence


def error_bounds(p, fid):
    """Lower and upper bounds on the minimum discrimination error.

    lower = sum_{i<j} p_i p_j B_ij^2 and upper = sum_{i!=j}
    sqrt(p_i p_j) B_ij. The upper bound is reported even when it
    exceeds one; use bound_is_trivial to flag that case.
    """
    p = np.asarray(p, dtype=float)
    f = np.asarray(fid, dtype=float)
    if f.shape != (p.size, p.size):
        raise ValidationError(
            f"fidelity table shape {f.shape} does not match {p.size} probabilities"
        )
    if not np.allclose(f, f.T, atol=1e-9, equal_nan=True):
        raise ValidationError("fidelity table is not symmetric")
    finite = np.isfinite(f)
    if np.any((f[finite] < -1e-9) | (f[finite] > 1 + 1e-9)):
        raise ValidationError("fidelity entries must lie in [0, 1]")
    ii, jj = np.triu_indices(p.size, 1)
    b = f[ii, jj]
    ok = np.isfinite(b)
    bad = ~ok & (np.minimum(p[ii], p[jj]) >= CONDITIONAL_THRESHOLD)
    if np.any(bad):
        raise ValidationError("fidelity table has NaN entries at defined outcomes")
    pc = np.clip(p, 0.0, None)
    w_low = pc[ii] * pc[jj]
    w_up = np.sqrt(pc[ii] * pc[jj])
    lower = float(np.sum(w_low[ok] * b[ok] ** 2))
    upper = float(2.0 * np.sum(w_up[ok] * b[ok]))
    return lower, upper


def bound_is_trivial(upper):
    """True when the upper error bound carries no information."""
    return bool(upper >= 1.0)


def decoherence_gamma(rho, layout, system, basis=None):
    """Absolute off-diagonal sum of the reduced system state."""
    m4, _ = _system_blocks(rho, layout, system, basis)
    reduced = np.einsum("irjr->ij", m4)
    off = np.abs(reduced) - np.diag(np.diag(np.abs(reduced)))
    return float(np.sum(off))


def eta_bound(rho, layout, system, basis=None, threshold=None):
    """Upper bound on the distance from spectrum broadcast structure.

    Sum of the trace norms of all off-diagonal system blocks plus the
    probability-weighted pairwise fidelity sums of every observer's
    conditional states. Zero exactly on states with diagonal system
    correlations and orthogonal conditional branches.
    """
    threshold = CONDITIONAL_THRESHOLD if threshold is None else threshold
    m4, rest = _system_blocks(rho, layout, system, basis)
    d_s = m4.shape[0]
    p = np.einsum("irir->i", m4).real
    valid = p >= threshold

    gamma_blocks = 0.0
    ii, jj = np.triu_indices(d_s, 1)
    if ii.size:
        off = m4[ii, :, jj, :]
        svals = np.linalg.svd(off, compute_uv=False)
        gamma_blocks = 2.0 * float(svals.sum())

    pv = p[valid]
    weights = 0.0
    if pv.size >= 2:
        vi, vj = np.triu_indices(pv.size, 1)
        w = np.sqrt(pv[vi] * pv[vj])
        blocks = m4[np.arange(d_s), :, np.arange(d_s), :][valid]
        conds = blocks / pv[:, None, None]
        fid_sum = np.zeros(vi.size)
        for ax in range(rest.size):
            reduced = _batched_partial_trace(conds, rest.dims, [ax])
            table = _pair_fidelities(reduced)
            fid_sum += table[vi, vj]
        weights = 2.0 * float(np.sum(w * fid_sum))
    return gamma_blocks + weights


# ---------------------------------------------------------------------------
# information measures


def conditional_mutual_information(
    rho, layout, system, observers, basis=None, threshold=None
):
    """Mean mutual information between two observers given the system.

    Averages, over pointer outcomes of the system, the mutual
    information of the two observers' conditional joint state.
    Outcomes below the probability threshold are skipped.
    """
    threshold = CONDITIONAL_THRESHOLD if threshold is None else threshold
    a_label, b_label = observers
    if a_label == b_label:
        raise ValidationError("observers must be two distinct labels")
    m4, rest = _system_blocks(rho, layout, system, basis)
    for lab in (a_label, b_label):
        if lab not in rest.labels:
            raise ValidationError(f"unknown observer label {lab!r}")
    d_s = m4.shape[0]
    p = np.einsum("irir->i", m4).real
    valid = p >= threshold
    pv = p[valid]
    if pv.size == 0:
        return 0.0
    blocks = m4[np.arange(d_s), :, np.arange(d_s), :][valid]
    conds = blocks / pv[:, None, None]
    ax_a = rest.index(a_label)
    ax_b = rest.index(b_label)
    joint = _batched_partial_trace(conds, rest.dims, [ax_a, ax_b])
    h_ab = _batched_entropy(joint)
    h_a = _batched_entropy(_batched_partial_trace(conds, rest.dims, [ax_a]))
    h_b = _batched_entropy(_batched_partial_trace(conds, rest.dims, [ax_b]))
    return float(np.sum(pv * (h_a + h_b - h_ab)))


def holevo_information(p, states, threshold=None):
    """Holevo quantity of the ensemble {p_i, rho_i}.

    Entropy of the probability-weighted average state minus the average
    entropy. Members with probability below the threshold are skipped
    without renormalizing the rest.
    """
    threshold = CONDITIONAL_THRESHOLD if threshold is None else threshold
    p = np.asarray(p, dtype=float)
    mats = [s.matrix if isinstance(s, DensityMatrix) else np.asarray(s) for s in states]
    if p.size != len(mats):
        raise ValidationError(
            f"{p.size} probabilities given for {len(mats)} states"
        )
    included = [k for k in range(p.size) if p[k] >= threshold]
    if not included:
        return 0.0
    dim = mats[included[0]].shape[0]
    for k in included:
        if mats[k].shape != (dim, dim):
            raise ValidationError("ensemble states must share one dimension")
        if abs(np.trace(mats[k]).real - 1.0) > 1e-8:
            raise ValidationError(f"ensemble state {k} is not normalized")
    avg = sum(p[k] * mats[k] for k in included)
    h_avg = entropy_of_spectrum(np.linalg.eigvalsh(avg))
    h_each = sum(
        p[k] * entropy_of_spectrum(np.linalg.eigvalsh(mats[k])) for k in included
    )
    return float(h_avg - h_each)


def quantum_mutual_information(rho, layout, a, b):
    """Mutual information H(A) + H(B) - H(AB) between two subsystems."""
    set_a = {a} if isinstance(a, str) else set(a)
    set_b = {b} if isinstance(b, str) else set(b)
    if set_a & set_b:
        raise ValidationError(f"subsystems overlap: {sorted(set_a & set_b)!r}")
    rho_a = partial_trace(rho, layout, set_a)
    rho_b = partial_trace(rho, layout, set_b)
    rho_ab = partial_trace(rho, layout, set_a | set_b)
    return float(
        von_neumann_entropy(rho_a)
        + von_neumann_entropy(rho_b)
        - von_neumann_entropy(rho_ab)
    )


# ---------------------------------------------------------------------------
# saturation statistics


def saturation_stats(series, window):
    """Saturation value, spread and onset time of a time series.

    The series is a sequence of (t, value) pairs sorted by t; the
    window is an inclusive (t_min, t_max) interval over which the mean
    and RMS deviation are taken. The onset time is the first time in
    the whole series at which the value reaches mean minus RMS.
    """
    pairs = [(float(t), float(v)) for t, v in series]
    if not pairs:
        raise ValidationError("empty series")
    times = np.array([t for t, _ in pairs])
    values = np.array([v for _, v in pairs])
    if np.any(np.diff(times) < 0):
        raise ValidationError("series must be sorted by time")
    t_min, t_max = window
    in_window = (times >= t_min) & (times <= t_max)
    if not np.any(in_window):
        raise ValidationError(
            f"window [{t_min}, {t_max}] contains no samples"
        )
    sample = values[in_window]
    i_sat = float(np.mean(sample))
    sigma_i = float(np.sqrt(np.mean((sample - i_sat) ** 2)))
    reached = np.flatnonzero(values >= i_sat - sigma_i)
    t_sat = float(times[reached[0]])
    return SaturationStats(i_sat=i_sat, sigma_i=sigma_i, t_sat=t_sat)


# ---------------------------------------------------------------------------
# full report


def compile_report(
    rho,
    layout,
    system,
    frame="C",
    basis=None,
    threshold=None,
    cmi_pair=None,
):
    """Assemble every diagnostic of one state into an SbsReport.

    Observers are all subsystems other than the system, in layout
    order. cmi_pair picks the two observers for the mean conditional
    mutual information; it defaults to the observer pair when there are
    exactly two observers.
    """
    threshold = CONDITIONAL_THRESHOLD if threshold is None else threshold
    m4, rest = _system_blocks(rho, layout, system, basis)
    d_s = m4.shape[0]
    p = np.einsum("irir->i", m4).real
    valid = p >= threshold
    pv = p[valid]
    blocks = m4[np.arange(d_s), :, np.arange(d_s), :][valid]
    conds = blocks / pv[:, None, None]

    reduced_sys = np.einsum("irjr->ij", m4)
    gamma = float(np.sum(np.abs(reduced_sys)) - np.sum(np.abs(np.diag(reduced_sys))))

    ii, jj = np.triu_indices(d_s, 1)
    gamma_blocks = 0.0
    if ii.size:
        off = m4[ii, :, jj, :]
        svals = np.linalg.svd(off, compute_uv=False)
        gamma_blocks = 2.0 * float(svals.sum())

    tables = {}
    bounds = {}
    holevo = {}
    qmi = {}
    eta_fid = 0.0
    vi, vj = np.triu_indices(pv.size, 1)
    for ax, label in enumerate(rest.labels):
        obs_conds = _batched_partial_trace(conds, rest.dims, [ax])
        compact = _pair_fidelities(obs_conds)
        tables[label] = _expand_table(compact, valid)
        bounds[label] = error_bounds(p, tables[label])
        if pv.size >= 2:
            eta_fid += 2.0 * float(
                np.sum(np.sqrt(pv[vi] * pv[vj]) * compact[vi, vj])
            )
        avg = np.einsum("n,nab->ab", pv, obs_conds)
        h_each = float(np.sum(pv * _batched_entropy(obs_conds)))
        holevo[label] = float(
            entropy_of_spectrum(np.linalg.eigvalsh(avg)) - h_each
        )
        qmi[label] = quantum_mutual_information(rho, layout, system, label)

    if cmi_pair is None:
        if rest.size == 2:
            cmi_pair = rest.labels
        else:
            raise ValidationError(
                "cmi_pair must be given when there are not exactly two observers"
            )
    i_mean = conditional_mutual_information(
        rho, layout, system, cmi_pair, basis=basis, threshold=threshold
    )

    return SbsReport(
        frame=frame,
        spectrum=p,
        fidelity_tables=tables,
        error_bounds=bounds,
        eta=gamma_blocks + eta_fid,
        gamma=gamma,
        i_mean=i_mean,
        holevo=holevo,
        qmi=qmi,
    )
