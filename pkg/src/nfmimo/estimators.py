"""Maximum-likelihood target localization by cyclic grid search.

Two concentrated criteria are supported. The general-noise criterion plugs the
approximate-ML coefficient estimate into the determinant of the residual Gram
matrix; the white-noise criterion minimizes the summed squared residual with
coefficients from the exact linear stationarity system. Both are minimized by
the same incremental-then-cyclic coordinate descent: locate one target, add
targets one at a time, and after each addition re-optimize targets cyclically
over a shrinking grid until the objective improvement falls below epsilon.

Grid objectives are evaluated in batches of candidate locations with the
linear algebra vectorized over the batch; evaluation order is fixed, so runs
are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .channel import EXACT, steering_matrix
from .errors import DegenerateSceneError, NumericalError
from .geometry import ArrayGeometry, CarrierSpec

ACO = "aco"
CO_WGN = "co-wgn"

_CHUNK = 256
_DET_RTOL = 1e-12
# Relative slack on the monotone-descent assertion; grid values computed in
# different batches can disagree in the last bits.
_DESCENT_RTOL = 1e-9


@dataclass(frozen=True)
class GridSchedule:
    """Search region and refinement plan for one location update.

    Level 0 is a full grid over the region with `initial_points_per_axis`
    points per axis; each of the `refine_levels` following levels recenters on
    the incumbent, divides the spacing by `refine_factor`, and spans
    `refine_span` previous-level cells on each side.
    """

    region_min: tuple
    region_max: tuple
    initial_points_per_axis: int = 21
    refine_levels: int = 3
    refine_factor: int = 5
    refine_span: int = 2

    def __post_init__(self):
        lo = np.asarray(self.region_min, dtype=float)
        hi = np.asarray(self.region_max, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,) or not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
            raise ValueError("region bounds must be finite 3D coordinates")
        if np.any(hi <= lo):
            raise ValueError("search region must be non-degenerate (max > min on every axis)")
        if self.initial_points_per_axis < 2:
            raise ValueError("initial_points_per_axis must be at least 2")
        if self.refine_levels < 0:
            raise ValueError("refine_levels must be non-negative")
        if self.refine_factor <= 1:
            raise ValueError("refine_factor must exceed 1")
        if self.refine_span < 1:
            raise ValueError("refine_span must be at least 1")
        object.__setattr__(self, "region_min", tuple(lo))
        object.__setattr__(self, "region_max", tuple(hi))

    @property
    def initial_spacing(self) -> np.ndarray:
        lo = np.asarray(self.region_min)
        hi = np.asarray(self.region_max)
        return (hi - lo) / (self.initial_points_per_axis - 1)

    @property
    def final_spacing(self) -> np.ndarray:
        return self.initial_spacing / float(self.refine_factor) ** self.refine_levels


@dataclass
class EstimateResult:
    """Localization output: positions, coefficients, and nuisance estimates.

    `objective_trace` lists (update_index, objective) after every location
    update; it is non-increasing within each cyclic stage. `noise_estimate`
    holds {'q_hat': M x M matrix} for the general criterion or
    {'sigma2_hat': float} for the white-noise one.
    """

    positions: np.ndarray
    coefficients: np.ndarray
    objective_trace: list
    noise_estimate: dict
    converged: bool
    criterion: str


def _check_dgc_dims(a_mat, s_mat, y):
    a_mat = np.asarray(a_mat, dtype=complex)
    s_mat = np.asarray(s_mat, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if a_mat.ndim != 2 or s_mat.ndim != 2 or y.ndim != 2:
        raise ValueError("A, S, Y must be matrices")
    if a_mat.shape[1] != s_mat.shape[0]:
        raise ValueError("A and S disagree on the number of targets")
    if y.shape != (a_mat.shape[0], s_mat.shape[1]):
        raise ValueError("Y shape does not match A and S")
    return a_mat, s_mat, y


def _regularized_residual_cov(s_mat, y):
    """J = sample covariance of Y after projecting out the row space of S.

    Returns J + delta*I with delta = 1e-12 tr(J)/M (floor 1e-18); J is exactly
    singular on noiseless data, and delta cancels from the coefficient
    estimate, so the shift is applied unconditionally.
    """
    ell = y.shape[1]
    ssh = s_mat @ s_mat.conj().T
    ysh = y @ s_mat.conj().T
    try:
        proj = np.linalg.solve(ssh, ysh.conj().T)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("S S^H is singular: waveform does not excite all targets") from exc
    j = (y @ y.conj().T - ysh @ proj) / ell
    j = 0.5 * (j + j.conj().T)
    delta = max(1e-12 * np.trace(j).real / j.shape[0], 1e-18)
    return j + delta * np.eye(j.shape[0])


def aml_coefficients(a_mat, s_mat, y) -> np.ndarray:
    """Approximate-ML reflection coefficients for Y = A diag(b) S + Z.

    b solves [(A^H J^{-1} A) o (S S^H)^T] b = vecd(A^H J^{-1} Y S^H), with J
    the regularized residual covariance of Y given the row space of S.
    """
    a_mat, s_mat, y = _check_dgc_dims(a_mat, s_mat, y)
    j = _regularized_residual_cov(s_mat, y)
    ji_a = np.linalg.solve(j, a_mat)
    ji_y = np.linalg.solve(j, y)
    lhs = (a_mat.conj().T @ ji_a) * (s_mat @ s_mat.conj().T).T
    rhs = np.einsum("mi,ml,il->i", a_mat.conj(), ji_y, s_mat.conj())
    try:
        return np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSceneError("coefficient system is singular (coincident targets?)") from exc


def concentrated_nll_aco(locations, geometry: ArrayGeometry, carrier: CarrierSpec, x, y, mode=EXACT) -> float:
    """General-noise concentrated objective L ln det(residual Gram matrix).

    The Gram matrix gets the same relative delta ridge as the coefficient
    solve: the residual of a rank-deficient snapshot matrix (noiseless data)
    is itself rank deficient, so the bare determinant is zero at every
    candidate and could not rank them.
    """
    locations = np.atleast_2d(np.asarray(locations, dtype=float))
    a_mat = steering_matrix(geometry.rx_positions, locations, carrier, mode)
    s_mat = steering_matrix(geometry.tx_positions, locations, carrier, mode).T @ x
    b = aml_coefficients(a_mat, s_mat, y)
    resid = y - (a_mat * b) @ s_mat
    gram = resid @ resid.conj().T
    m = gram.shape[0]
    delta = max(1e-12 * np.trace(gram).real / m, 1e-18)
    sign, logdet = np.linalg.slogdet(gram + delta * np.eye(m))
    if sign == 0 or not np.isfinite(logdet):
        return -np.inf
    return float(y.shape[1] * logdet)


def wgn_coefficients(a_mat, s_mat, y) -> np.ndarray:
    """Least-squares reflection coefficients under white noise.

    Solves the stationarity system Sigma b = lambda, where lambda_i and the
    unit-diagonal coupling matrix Sigma are normalized inner products of the
    per-target rank-one signatures a_i s_i.
    """
    a_mat, s_mat, y = _check_dgc_dims(a_mat, s_mat, y)
    a_norm2 = np.einsum("mi,mi->i", a_mat.conj(), a_mat).real
    s_norm2 = np.einsum("il,il->i", s_mat, s_mat.conj()).real
    scale = a_norm2 * s_norm2
    if np.any(scale <= 0.0):
        raise DegenerateSceneError("a target has a zero steering or waveform signature")
    lam = np.einsum("mi,ml,il->i", a_mat.conj(), y, s_mat.conj()) / scale
    gram = (a_mat.conj().T @ a_mat) * (s_mat @ s_mat.conj().T).T
    sigma = gram / scale[:, None]
    if abs(np.linalg.det(sigma)) < _DET_RTOL:
        raise DegenerateSceneError("coupling matrix is singular (coincident targets?)")
    return np.linalg.solve(sigma, lam)


def concentrated_nll_wgn(locations, geometry: ArrayGeometry, carrier: CarrierSpec, x, y, mode=EXACT):
    """White-noise concentrated objective and the implied noise power.

    Returns (f, sigma2_hat) with f the squared Frobenius residual at the
    least-squares coefficients and sigma2_hat = f / (L*M).
    """
    locations = np.atleast_2d(np.asarray(locations, dtype=float))
    a_mat = steering_matrix(geometry.rx_positions, locations, carrier, mode)
    s_mat = steering_matrix(geometry.tx_positions, locations, carrier, mode).T @ x
    b = wgn_coefficients(a_mat, s_mat, y)
    resid = y - (a_mat * b) @ s_mat
    f = float(np.sum(np.abs(resid) ** 2))
    return f, f / y.size


class _BatchObjective:
    """Concentrated objective over candidate locations for one free target.

    The candidate is appended as the last column after the fixed targets;
    both criteria are invariant to target ordering. Evaluation is chunked and
    sequential, so values do not depend on how callers split the grid.
    """

    def __init__(self, criterion, geometry, carrier, x, y, mode, fixed_positions):
        self.criterion = criterion
        self.geometry = geometry
        self.carrier = carrier
        self.mode = mode
        self.x = np.asarray(x, dtype=complex)
        self.y = np.asarray(y, dtype=complex)
        fixed = np.asarray(fixed_positions, dtype=float).reshape(-1, 3)
        self.fixed = fixed
        if fixed.shape[0]:
            self.a_fixed = steering_matrix(geometry.rx_positions, fixed, carrier, mode)
            self.s_fixed = steering_matrix(geometry.tx_positions, fixed, carrier, mode).T @ self.x
        else:
            self.a_fixed = np.zeros((geometry.n_rx, 0), dtype=complex)
            self.s_fixed = np.zeros((0, self.x.shape[1]), dtype=complex)
        if criterion == ACO:
            self._prepare_aco()
        else:
            self.y_norm2 = float(np.sum(np.abs(self.y) ** 2))

    def _prepare_aco(self):
        """Factor the data Gram matrices once so each candidate only needs
        K-dimensional linear algebra (Woodbury for J^{-1}, the determinant
        lemma for the residual Gram determinant). Falls back to forming the
        full residual when Y Y^H is rank deficient (noiseless data)."""
        from scipy.linalg import cho_factor, cho_solve

        y = self.y
        m, ell = y.shape
        gram = y @ y.conj().T
        eigs = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
        self.fast = ell >= m and eigs[0] > 1e-10 * max(eigs[-1], 0.0)
        if not self.fast:
            self.ryy = gram / ell
            return
        delta = max(1e-12 * np.trace(gram).real / (ell * m), 1e-18)
        g0 = gram / ell + delta * np.eye(m)
        self._kern = []
        for mat in (gram, g0):
            cho = cho_factor(mat, lower=True)
            gi_y = cho_solve(cho, y)
            self._kern.append({
                "cho": cho,
                "h_yy": y.conj().T @ gi_y,  # Y^H Gk^{-1} Y
                "za_fixed": cho_solve(cho, self.a_fixed),
            })
        self.logdet_gram = 2.0 * float(np.sum(np.log(np.diag(self._kern[0]["cho"][0]).real)))

    def __call__(self, candidates):
        candidates = np.asarray(candidates, dtype=float).reshape(-1, 3)
        out = np.empty(candidates.shape[0])
        for start in range(0, candidates.shape[0], _CHUNK):
            chunk = candidates[start : start + _CHUNK]
            out[start : start + chunk.shape[0]] = self._eval_chunk(chunk)
        return out

    def _stacked_matrices(self, chunk):
        p = chunk.shape[0]
        kf = self.fixed.shape[0]
        a_cand = steering_matrix(self.geometry.rx_positions, chunk, self.carrier, self.mode)
        s_cand = steering_matrix(self.geometry.tx_positions, chunk, self.carrier, self.mode).T @ self.x
        a_b = np.empty((p, self.geometry.n_rx, kf + 1), dtype=complex)
        a_b[:, :, :kf] = self.a_fixed
        a_b[:, :, kf] = a_cand.T
        s_b = np.empty((p, kf + 1, self.x.shape[1]), dtype=complex)
        s_b[:, :kf, :] = self.s_fixed
        s_b[:, kf, :] = s_cand
        return a_b, s_b, a_cand

    @staticmethod
    def _mask_singular(mats):
        """Boolean mask of near-singular batch matrices, replaced by identity
        in place so a batched solve cannot raise."""
        diag = np.abs(np.diagonal(mats, axis1=1, axis2=2))
        floor = _DET_RTOL * np.prod(np.maximum(diag, 1e-300), axis=1)
        bad = ~(np.abs(np.linalg.det(mats)) > floor)
        if np.any(bad):
            mats[bad] = np.eye(mats.shape[1])
        return bad

    def _aco_direct(self, a_b, s_b, gram_s, bad):
        """Reference path: form J and the residual explicitly (O(M^2) per
        candidate). Used when Y Y^H is singular, e.g. noiseless data."""
        p, m, k = a_b.shape
        ell = s_b.shape[2]
        t = np.einsum("ml,pkl->pmk", self.y, s_b.conj())  # Y S^H
        j = self.ryy - (t @ np.linalg.solve(gram_s, np.conj(np.swapaxes(t, 1, 2)))) / ell
        j = 0.5 * (j + np.conj(np.swapaxes(j, 1, 2)))
        tr = np.einsum("pmm->p", j).real
        delta = np.maximum(1e-12 * tr / m, 1e-18)
        j[:, np.arange(m), np.arange(m)] += delta[:, None]
        rhs = np.concatenate([a_b, np.broadcast_to(self.y, (p, m, ell))], axis=2)
        ji = np.linalg.solve(j, rhs)
        ji_a, ji_y = ji[:, :, :k], ji[:, :, k:]
        lhs = np.einsum("pmi,pmk->pik", a_b.conj(), ji_a) * np.swapaxes(gram_s, 1, 2)
        bad |= self._mask_singular(lhs)
        vec = np.einsum("pmi,pml,pil->pi", a_b.conj(), ji_y, s_b.conj())
        b = np.linalg.solve(lhs, vec[:, :, None])[:, :, 0]
        resid = self.y - np.einsum("pmk,pk,pkl->pml", a_b, b, s_b)
        gram_r = resid @ np.conj(np.swapaxes(resid, 1, 2))
        tr_r = np.einsum("pmm->p", gram_r).real
        delta_r = np.maximum(1e-12 * tr_r / m, 1e-18)
        gram_r[:, np.arange(m), np.arange(m)] += delta_r[:, None]
        sign, logdet = np.linalg.slogdet(gram_r)
        return np.where(sign == 0, -np.inf, ell * logdet)

    def _kernel_products(self, which, a_b, s_b, a_cand):
        """A^H Gk^{-1} A, A^H Gk^{-1} t, and t^H Gk^{-1} t for t = Y S^H,
        using only the precomputed factorization of the M x M kernel."""
        from scipy.linalg import cho_solve

        kern = self._kern[which]
        p, m, k = a_b.shape
        kf = self.fixed.shape[0]
        za = np.empty((p, m, k), dtype=complex)
        za[:, :, :kf] = kern["za_fixed"]
        za[:, :, kf] = cho_solve(kern["cho"], a_cand).T
        aa = np.einsum("pmi,pmk->pik", a_b.conj(), za)
        ya = np.matmul(self.y.conj().T[None, :, :], za)  # (P, L, K) = Y^H Gk^{-1} A
        at = np.einsum("pli,pkl->pik", ya.conj(), s_b.conj())  # A^H Gk^{-1} t
        sh = np.matmul(s_b, kern["h_yy"])
        tt = np.einsum("pil,pkl->pik", sh, s_b.conj())  # t^H Gk^{-1} t
        return aa, at, tt

    def _aco_fast(self, a_b, s_b, gram_s, a_cand, bad):
        """Concentrated objective via low-rank identities.

        J^{-1} = (G0 - t (L Gs)^{-1} t^H)^{-1} by Woodbury with G0 the
        regularized scaled data Gram, and det of the residual Gram by the
        determinant lemma around Y Y^H, so no M x M operation depends on the
        candidate."""
        p, m, k = a_b.shape
        ell = s_b.shape[2]
        eye_k = np.eye(k)

        aa0, at0, tt0 = self._kernel_products(1, a_b, s_b, a_cand)
        mid = ell * gram_s - tt0
        bad |= self._mask_singular(mid)
        minv = np.linalg.inv(mid)
        aja = aa0 + at0 @ minv @ np.conj(np.swapaxes(at0, 1, 2))
        ajt = at0 + at0 @ minv @ tt0
        lhs = aja * np.swapaxes(gram_s, 1, 2)
        bad |= self._mask_singular(lhs)
        vec = np.diagonal(ajt, axis1=1, axis2=2)
        b = np.linalg.solve(lhs, vec[:, :, None])[:, :, 0]

        aag, atg, ttg = self._kernel_products(0, a_b, s_b, a_cand)
        bl = b.conj()[:, :, None]
        br = b[:, None, :]
        m2 = np.empty((p, 2 * k, 2 * k), dtype=complex)
        m2[:, :k, :k] = bl * aag * br
        m2[:, :k, k:] = bl * atg
        m2[:, k:, :k] = np.conj(np.swapaxes(atg, 1, 2)) * br
        m2[:, k:, k:] = ttg
        cmat = np.zeros((p, 2 * k, 2 * k), dtype=complex)
        cmat[:, :k, :k] = gram_s
        cmat[:, :k, k:] = -eye_k
        cmat[:, k:, :k] = -eye_k
        sign, logdet = np.linalg.slogdet(np.eye(2 * k) + cmat @ m2)
        return np.where(sign == 0, -np.inf, ell * (self.logdet_gram + logdet))

    def _eval_chunk(self, chunk):
        a_b, s_b, a_cand = self._stacked_matrices(chunk)
        gram_s = s_b @ np.conj(np.swapaxes(s_b, 1, 2))  # (P, K, K) = S S^H
        bad = self._mask_singular(gram_s)

        if self.criterion == ACO:
            if self.fast:
                vals = self._aco_fast(a_b, s_b, gram_s, a_cand, bad)
            else:
                vals = self._aco_direct(a_b, s_b, gram_s, bad)
        else:
            a_norm2 = np.einsum("pmi,pmi->pi", a_b.conj(), a_b).real
            s_norm2 = np.einsum("pil,pil->pi", s_b, s_b.conj()).real
            scale = a_norm2 * s_norm2
            zero_sig = np.any(scale <= 0.0, axis=1)
            scale[zero_sig] = 1.0
            c = np.einsum("pmi,ml,pil->pi", a_b.conj(), self.y, s_b.conj())
            gram = np.einsum("pmi,pmk->pik", a_b.conj(), a_b) * np.swapaxes(gram_s, 1, 2)
            sigma = gram / scale[:, :, None]
            bad |= zero_sig
            bad |= self._mask_singular(sigma)
            b = np.linalg.solve(sigma, (c / scale)[:, :, None])[:, :, 0]
            quad = np.einsum("pi,pik,pk->p", b.conj(), gram, b).real
            vals = self.y_norm2 - 2.0 * np.einsum("pi,pi->p", b.conj(), c).real + quad

        vals = np.asarray(vals, dtype=float)
        vals[bad] = np.inf
        return vals


def _axis_grid(center, spacing, span, factor):
    steps = np.arange(-span * factor, span * factor + 1)
    return center[:, None] + steps[None, :] * (spacing / factor)[:, None]


def _grid_points(axes):
    gx, gy, gz = np.meshgrid(axes[0], axes[1], axes[2], indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])


def _lexi_argmin(points, values):
    vmin = np.min(values)
    if np.isposinf(vmin):
        raise DegenerateSceneError("objective is singular on the entire search grid")
    tied = np.flatnonzero(values == vmin)
    pts = points[tied]
    order = np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0]))
    return points[tied[order[0]]].copy(), float(vmin)


def refine_search(objective, schedule: GridSchedule, start=None):
    """Grid argmin of `objective` with iterative local refinement.

    Returns (location, value). `start` is an extra candidate injected into the
    coarse grid; passing the incumbent location makes the result never worse
    than it. Ties break toward the lexicographically smallest (x, y, z), so
    the search is deterministic regardless of evaluation order.
    """
    lo = np.asarray(schedule.region_min)
    hi = np.asarray(schedule.region_max)
    axes = [np.linspace(lo[i], hi[i], schedule.initial_points_per_axis) for i in range(3)]
    points = _grid_points(axes)
    if start is not None:
        points = np.vstack([points, np.asarray(start, dtype=float).reshape(1, 3)])
    best, best_val = _lexi_argmin(points, objective(points))

    spacing = schedule.initial_spacing.copy()
    for _ in range(schedule.refine_levels):
        # step spacing/refine_factor over +-refine_span previous-level cells
        axes = _axis_grid(best, spacing, schedule.refine_span, schedule.refine_factor)
        axes = [np.clip(ax, lo[i], hi[i]) for i, ax in enumerate(axes)]
        points = _grid_points(axes)
        cand, val = _lexi_argmin(points, objective(points))
        if val < best_val or (val == best_val and tuple(cand) < tuple(best)):
            best, best_val = cand, val
        spacing = spacing / schedule.refine_factor
    return best, best_val


def _make_objective(criterion, geometry, carrier, x, y, mode, fixed_positions):
    return _BatchObjective(criterion, geometry, carrier, x, y, mode, fixed_positions)


def localize(
    y,
    x,
    geometry: ArrayGeometry,
    carrier: CarrierSpec,
    k_max: int,
    schedule: GridSchedule,
    criterion: str = ACO,
    epsilon: float = 1e-5,
    mode=EXACT,
    max_sweeps: int = 50,
) -> EstimateResult:
    """Incremental-plus-cyclic grid localization of up to k_max targets.

    A first target is located by full grid search; each further target is
    added by grid search with the others fixed, then all current targets are
    re-optimized cyclically (one per iteration, p wrapping around) until one
    update improves the objective by at most epsilon. The descent is monotone
    by construction since every grid includes the incumbent.
    """
    if criterion not in (ACO, CO_WGN):
        raise ValueError(f"criterion must be {ACO!r} or {CO_WGN!r}")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if not (np.isfinite(epsilon) and epsilon > 0):
        raise ValueError("epsilon must be positive")
    y = np.asarray(y, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if y.shape[1] != x.shape[1]:
        raise ValueError("Y and X must share the snapshot count")
    if y.shape[0] != geometry.n_rx or x.shape[0] != geometry.n_tx:
        raise ValueError("Y/X antenna dimensions do not match the geometry")

    trace = []
    update = 0
    converged = True

    def record(val):
        nonlocal update
        trace.append((update, val))
        update += 1

    obj = _make_objective(criterion, geometry, carrier, x, y, mode, np.empty((0, 3)))
    pos, f_new = refine_search(obj, schedule)
    positions = [pos]
    record(f_new)

    for _ in range(1, k_max):
        obj = _make_objective(criterion, geometry, carrier, x, y, mode, np.array(positions))
        pos, f_new = refine_search(obj, schedule)
        positions.append(pos)
        record(f_new)

        k_hat = len(positions)
        f_old = f_new + 2.0 * epsilon
        p = 0
        iters = 0
        while f_old - f_new > epsilon:
            if iters >= max_sweeps * k_hat:
                converged = False
                break
            f_old = f_new
            others = [positions[i] for i in range(k_hat) if i != p]
            obj = _make_objective(criterion, geometry, carrier, x, y, mode, np.array(others))
            cand, val = refine_search(obj, schedule, start=positions[p])
            if val <= f_new + _DESCENT_RTOL * max(abs(f_new), 1.0):
                positions[p] = cand
                f_new = min(val, f_new)
            record(f_new)
            p = (p + 1) % k_hat
            iters += 1

    final = np.array(positions)
    a_mat = steering_matrix(geometry.rx_positions, final, carrier, mode)
    s_mat = steering_matrix(geometry.tx_positions, final, carrier, mode).T @ x
    if criterion == ACO:
        coeffs = aml_coefficients(a_mat, s_mat, y)
        resid = y - (a_mat * coeffs) @ s_mat
        noise = {"q_hat": (resid @ resid.conj().T) / y.shape[1]}
    else:
        coeffs = wgn_coefficients(a_mat, s_mat, y)
        resid = y - (a_mat * coeffs) @ s_mat
        noise = {"sigma2_hat": float(np.sum(np.abs(resid) ** 2)) / y.size}
    return EstimateResult(
        positions=final,
        coefficients=coeffs,
        objective_trace=trace,
        noise_estimate=noise,
        converged=converged,
        criterion=criterion,
    )


class CyclicLocalizer(BaseEstimator):
    """Estimator-style wrapper around `localize`.

    fit(Y) runs the search against the configured geometry and transmit
    snapshots; estimated positions land in `positions_` and coefficients in
    `coefficients_`. Only the fit side of the scikit-learn protocol applies
    (there is nothing to predict), so predict is not provided.
    """

    def __init__(self, geometry=None, carrier=None, waveform=None, k_max=1,
                 schedule=None, criterion=ACO, epsilon=1e-5, mode=EXACT):
        self.geometry = geometry
        self.carrier = carrier
        self.waveform = waveform
        self.k_max = k_max
        self.schedule = schedule
        self.criterion = criterion
        self.epsilon = epsilon
        self.mode = mode

    def fit(self, y):
        if self.geometry is None or self.carrier is None or self.waveform is None or self.schedule is None:
            raise ValueError("geometry, carrier, waveform, and schedule must be set")
        x = getattr(self.waveform, "snapshots", self.waveform)
        y = getattr(y, "snapshots", y)
        result = localize(
            y, x, self.geometry, self.carrier, self.k_max, self.schedule,
            criterion=self.criterion, epsilon=self.epsilon, mode=self.mode,
        )
        self.result_ = result
        self.positions_ = result.positions
        self.coefficients_ = result.coefficients
        self.converged_ = result.converged
        return self
