"""EM estimation of the switching VAR, plus the K=1 OLS oracle.

E-step: Hamilton filter + Kim smoother.  M-step: switching coefficient
blocks by regime-probability-weighted least squares per regime; common
blocks by one pooled feasible-GLS pass weighted with the current regime
covariances; covariances from weighted residual outer products (with ridge
escalation when near singular); transition matrix from normalized expected
pairwise counts.  Each update is an exact conditional maximization, so the
log-likelihood trace never decreases beyond rounding.

Restarts are independent: one contiguous time-block assignment, k-means
cluster assignments on standardized levels and on residual norms, and
jittered pooled-OLS draws, with per-restart RNG streams split from the
master seed.  The best final log-likelihood wins and regimes are relabeled
chronologically (earliest modal period first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from regimevar.exceptions import ConfigError, EstimationError
from regimevar.panel import ModelDataset
from regimevar.msvar.filtering import filter_arrays, kim_smoother
from regimevar.msvar.model import (
    EstimatedMsVar,
    FilterOutput,
    ModelSpec,
    MsVarParameters,
    RegimeParameterSet,
    TransitionMatrix,
    regression_arrays,
)

__all__ = ["em_fit", "ols_var_fit", "loglikelihood"]

TRANSITION_FLOOR = 1e-6
RIDGE_BASE = 1e-8
RIDGE_MAX = 1e-4
SE_STEP_SCALE = 1e-5
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class _Design:
    """Regression arrays plus the column layout of the stacked design U."""

    Y: np.ndarray            # (T, n)
    U: np.ndarray            # (T, q) = [1 | lags | exog]
    groups: tuple[tuple[str, slice, bool], ...]  # (name, columns, switching)
    n_vars: int
    n_regimes: int

    @property
    def n_obs(self) -> int:
        return self.Y.shape[0]

    @property
    def switching_cols(self) -> np.ndarray:
        return self._cols(True)

    @property
    def common_cols(self) -> np.ndarray:
        return self._cols(False)

    def _cols(self, switching: bool) -> np.ndarray:
        idx: list[int] = []
        for _, sl, sw in self.groups:
            if sw == switching:
                idx.extend(range(sl.start, sl.stop))
        return np.array(idx, dtype=int)


def _build_design(spec: ModelSpec, dataset: ModelDataset) -> _Design:
    Y_eff, Z, X = regression_arrays(dataset, spec.lag_order)
    cols = []
    groups = []
    offset = 0
    switching = spec.switching if spec.n_regimes > 1 else None
    if spec.include_intercept:
        cols.append(np.ones((Y_eff.shape[0], 1)))
        groups.append(("intercept", slice(offset, offset + 1), bool(switching and switching.intercept)))
        offset += 1
    cols.append(Z)
    groups.append(("lag_matrices", slice(offset, offset + Z.shape[1]),
                   bool(switching and switching.lag_matrices)))
    offset += Z.shape[1]
    if X.shape[1]:
        cols.append(X)
        groups.append(("exog_coeffs", slice(offset, offset + X.shape[1]),
                       bool(switching and switching.exog_coefficients)))
        offset += X.shape[1]
    U = np.column_stack(cols)
    return _Design(Y=Y_eff, U=U, groups=tuple(groups), n_vars=Y_eff.shape[1], n_regimes=spec.n_regimes)


@dataclass
class _EmState:
    """Mutable working parameters inside the EM loop."""

    C: np.ndarray            # (K, n, q) coefficient matrices against U
    covariances: np.ndarray  # (K, n, n)
    P: np.ndarray            # (K, K)
    rho: np.ndarray          # (K,) initial regime law


def _ensure_pd(S: np.ndarray, base: float = RIDGE_BASE, max_ridge: float = RIDGE_MAX) -> np.ndarray:
    """Symmetrize and, if needed, ridge the covariance until well conditioned."""
    S = 0.5 * (S + S.T)
    n = S.shape[0]
    tr = float(np.trace(S)) / n
    if not np.isfinite(tr) or tr <= 0:
        raise EstimationError("covariance update produced a non-positive trace")
    lam = 0.0
    while True:
        candidate = S + (lam * tr) * np.eye(n)
        try:
            L = np.linalg.cholesky(candidate)
            d = np.diag(L)
            if (d.min() / d.max()) ** 2 > 1e-13:
                return candidate
        except np.linalg.LinAlgError:
            pass
        lam = base if lam == 0.0 else lam * 10.0
        if lam > max_ridge * (1.0 + 1e-12):
            raise EstimationError(
                f"covariance stayed ill-conditioned after ridge escalation to {max_ridge:g}"
            )


def _state_logliks(state: _EmState, design: _Design) -> np.ndarray:
    """Per-period regime-conditional Gaussian log densities for raw state arrays."""
    T, n = design.Y.shape
    K = state.C.shape[0]
    out = np.empty((T, K))
    for k in range(K):
        resid = design.Y - design.U @ state.C[k].T
        try:
            L = np.linalg.cholesky(state.covariances[k])
        except np.linalg.LinAlgError as exc:
            raise EstimationError(f"regime {k} covariance lost positive definiteness") from exc
        white = solve_triangular(L, resid.T, lower=True, check_finite=False)
        with np.errstate(over="ignore"):  # inf quad form means log density -inf
            quad = np.sum(white * white, axis=0)
        logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
        out[:, k] = -0.5 * (n * _LOG_2PI + logdet + quad)
    return out


def _update_coefficients(state: _EmState, design: _Design, W: np.ndarray) -> None:
    """Conditional maximization of the mean coefficients.

    Switching columns: weighted least squares per regime (the regime
    covariance cancels because the system shares regressors).  Common
    columns: pooled GLS weighted by each regime's inverse covariance,
    solved as one stacked linear system.
    """
    K, n, _ = state.C.shape
    s_cols = design.switching_cols
    c_cols = design.common_cols
    Y, U = design.Y, design.U

    if s_cols.size:
        Us = U[:, s_cols]
        for k in range(K):
            w = W[:, k]
            if w.sum() < 1e-10:
                continue  # starved regime keeps its previous coefficients
            R = Y if not c_cols.size else Y - U[:, c_cols] @ state.C[k][:, c_cols].T
            Uw = Us * w[:, None]
            A = Us.T @ Uw
            B = Uw.T @ R
            try:
                theta = np.linalg.solve(A, B)
            except np.linalg.LinAlgError:
                theta = np.linalg.lstsq(A, B, rcond=None)[0]
            state.C[k][:, s_cols] = theta.T

    if c_cols.size:
        Uc = U[:, c_cols]
        qc = c_cols.size
        H = np.zeros((n * qc, n * qc))
        b = np.zeros(n * qc)
        for k in range(K):
            w = W[:, k]
            R = Y if not s_cols.size else Y - U[:, s_cols] @ state.C[k][:, s_cols].T
            Ucw = Uc * w[:, None]
            Nk = Uc.T @ Ucw
            Mk = (R * w[:, None]).T @ Uc
            Sinv = np.linalg.inv(state.covariances[k])
            H += np.kron(Nk, Sinv)
            b += (Sinv @ Mk).ravel(order="F")
        try:
            cvec = np.linalg.solve(H, b)
        except np.linalg.LinAlgError:
            cvec = np.linalg.lstsq(H, b, rcond=None)[0]
        Cc = cvec.reshape((n, qc), order="F")
        state.C[:, :, c_cols] = Cc[None, :, :]


def _update_covariances(state: _EmState, design: _Design, W: np.ndarray, switching_cov: bool) -> None:
    K = state.C.shape[0]
    T = design.n_obs
    if switching_cov:
        for k in range(K):
            w = W[:, k]
            total = float(w.sum())
            if total < 1e-10:
                continue
            resid = design.Y - design.U @ state.C[k].T
            S = (resid * w[:, None]).T @ resid / total
            state.covariances[k] = _ensure_pd(S)
    else:
        pooled = np.zeros((design.n_vars, design.n_vars))
        for k in range(K):
            resid = design.Y - design.U @ state.C[k].T
            pooled += (resid * W[:, k][:, None]).T @ resid
        pooled = _ensure_pd(pooled / T)
        state.covariances[:] = pooled[None, :, :]


def _update_transition(state: _EmState, smoothed: np.ndarray, pairwise: np.ndarray) -> None:
    K = state.P.shape[0]
    if K == 1:
        state.P[:] = 1.0
        state.rho[:] = 1.0
        return
    counts = pairwise.sum(axis=0)
    visits = smoothed[:-1].sum(axis=0)
    P = np.empty_like(state.P)
    for i in range(K):
        if visits[i] > 1e-12:
            P[i] = counts[i] / visits[i]
        else:
            P[i] = 1.0 / K
    P = np.maximum(P, TRANSITION_FLOOR)
    P /= P.sum(axis=1, keepdims=True)
    state.P[:] = P
    rho = np.maximum(smoothed[0], 0.0)
    state.rho[:] = rho / rho.sum()


def _switching_params_per_regime(spec: ModelSpec) -> int:
    n, p, m = spec.n_vars, spec.lag_order, spec.n_exog
    mask = spec.switching
    count = 0
    if spec.include_intercept and mask.intercept:
        count += n
    if mask.lag_matrices:
        count += n * n * p
    if mask.exog_coefficients:
        count += n * m
    if mask.covariance:
        count += n * (n + 1) // 2
    return count


def _check_sample_size(spec: ModelSpec, design: _Design) -> None:
    T = design.n_obs
    q = design.U.shape[1]
    if T <= q:
        raise EstimationError(
            f"effective sample T={T} cannot identify {q} regressors per equation"
        )
    if spec.n_regimes > 1:
        floor = _switching_params_per_regime(spec)
        if T < floor:
            n, p, m = spec.n_vars, spec.lag_order, spec.n_exog
            raise EstimationError(
                f"effective sample T={T} is below the identifiability floor {floor} "
                f"(switching parameters per regime; n={n}, p={p}, m={m}, "
                f"K={spec.n_regimes}, mask={spec.switching})"
            )


def _pooled_ols(design: _Design) -> tuple[np.ndarray, np.ndarray]:
    """Equation-by-equation OLS of Y on U; returns (C (n,q), Sigma MLE)."""
    coef, *_ = np.linalg.lstsq(design.U, design.Y, rcond=None)
    resid = design.Y - design.U @ coef
    sigma = _ensure_pd(resid.T @ resid / design.n_obs)
    return coef.T, sigma


def _initial_transition(K: int) -> np.ndarray:
    if K == 1:
        return np.ones((1, 1))
    P = np.full((K, K), 0.2 / (K - 1))
    np.fill_diagonal(P, 0.8)
    return P


def _block_weights(T: int, K: int) -> np.ndarray:
    """Hard regime responsibilities from K contiguous time blocks."""
    W = np.zeros((T, K))
    edges = np.linspace(0, T, K + 1).astype(int)
    for k in range(K):
        W[edges[k]: edges[k + 1], k] = 1.0
    return W


def _weights_from_labels(labels: np.ndarray, K: int) -> np.ndarray:
    W = np.zeros((labels.shape[0], K))
    W[np.arange(labels.shape[0]), labels] = 1.0
    return W


def _kmeans(X: np.ndarray, K: int, rng: np.random.Generator, n_iter: int = 50) -> np.ndarray:
    """Lloyd's algorithm with k-means++ seeding; deterministic given rng."""
    X = np.atleast_2d(X.T).T if X.ndim == 1 else X
    T = X.shape[0]
    centers = np.empty((K, X.shape[1]))
    centers[0] = X[int(rng.integers(T))]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for k in range(1, K):
        total = d2.sum()
        probs = d2 / total if total > 0 else np.full(T, 1.0 / T)
        centers[k] = X[int(rng.choice(T, p=probs))]
        d2 = np.minimum(d2, np.sum((X - centers[k]) ** 2, axis=1))
    labels = np.full(T, -1, dtype=int)
    for _ in range(n_iter):
        dists = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dists.argmin(axis=1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for k in range(K):
            members = X[labels == k]
            if members.shape[0]:
                centers[k] = members.mean(axis=0)
            else:
                centers[k] = X[int(np.argmax(dists.min(axis=1)))]
    return labels


def _cluster_weight_candidates(
    design: _Design, ols_C: np.ndarray, K: int, seed: int
) -> list[np.ndarray]:
    """Hard assignments targeting the two common separation patterns.

    Clustering the standardized levels finds mean-separated regimes (pooled
    OLS hides those in a near-unit-root lag matrix, so its residuals carry no
    cluster structure); clustering residual norms finds variance-separated
    regimes.
    """
    levels = design.Y - design.Y.mean(axis=0)
    scale = levels.std(axis=0)
    scale[scale == 0] = 1.0
    levels = levels / scale
    resid = design.Y - design.U @ ols_C.T
    norms = np.linalg.norm(resid - resid.mean(axis=0), axis=1)[:, None]
    streams = np.random.SeedSequence([seed, 0xC1]).spawn(3)
    return [
        _weights_from_labels(_kmeans(levels, K, np.random.default_rng(streams[0])), K),
        _weights_from_labels(_kmeans(levels, K, np.random.default_rng(streams[1])), K),
        _weights_from_labels(_kmeans(norms, K, np.random.default_rng(streams[2])), K),
    ]


def _initial_states(
    spec: ModelSpec,
    design: _Design,
    n_restarts: int,
    seed: int,
    init_strategy: str,
) -> list[_EmState]:
    K, n, q = spec.n_regimes, design.n_vars, design.U.shape[1]
    ols_C, ols_sigma = _pooled_ols(design)
    scales = (0.5, 1.0, 2.0)
    y_scale = design.Y.std(axis=0)
    y_scale[y_scale == 0] = 1.0
    switching_cov = K > 1 and spec.switching.covariance

    states: list[_EmState] = []
    if K == 1:
        return [
            _EmState(
                C=ols_C[None, :, :].copy(),
                covariances=ols_sigma[None, :, :].copy(),
                P=np.ones((1, 1)),
                rho=np.ones(1),
            )
        ]

    if init_strategy not in ("auto", "blocks", "cluster", "jitter"):
        raise ConfigError(f"unknown init_strategy {init_strategy!r}")
    want_blocks = init_strategy in ("auto", "blocks")
    want_cluster = init_strategy in ("auto", "cluster")
    want_jitter = init_strategy in ("auto", "jitter")

    def state_from_weights(W0: np.ndarray) -> _EmState | None:
        state = _EmState(
            C=np.repeat(ols_C[None, :, :], K, axis=0),
            covariances=np.repeat(ols_sigma[None, :, :], K, axis=0),
            P=_initial_transition(K),
            rho=np.full(K, 1.0 / K),
        )
        try:
            # alternate the conditional updates so the switching and common
            # blocks co-adapt; a single pass would leave the common lag
            # matrix at its pooled (near unit root) OLS value
            for _ in range(10):
                _update_coefficients(state, design, W0)
                _update_covariances(state, design, W0, switching_cov)
        except EstimationError:
            return None
        return state

    if want_blocks:
        state = state_from_weights(_block_weights(design.n_obs, K))
        if state is not None:
            states.append(state)
    if want_cluster:
        for W0 in _cluster_weight_candidates(design, ols_C, K, seed):
            state = state_from_weights(W0)
            if state is not None:
                states.append(state)

    if want_jitter:
        streams = np.random.SeedSequence(seed).spawn(max(n_restarts, 1))
        s_cols = design.switching_cols
        intercept_col = None
        for name, sl, sw in design.groups:
            if name == "intercept" and sw:
                intercept_col = sl.start
        jitter_index = 0
        while len(states) < n_restarts and jitter_index < len(streams):
            rng = np.random.default_rng(streams[jitter_index])
            jitter_index += 1
            C = np.repeat(ols_C[None, :, :], K, axis=0)
            common_jitter = 1.0 + 0.05 * rng.standard_normal((n, q))
            for k in range(K):
                C[k] *= common_jitter
                if s_cols.size:
                    C[k][:, s_cols] *= 1.0 + 0.05 * rng.standard_normal((n, s_cols.size))
                if intercept_col is not None:
                    C[k][:, intercept_col] += 0.05 * y_scale * rng.standard_normal(n)
            covs = np.empty((K, n, n))
            for k in range(K):
                covs[k] = ols_sigma * (scales[k % len(scales)] if switching_cov else 1.0)
            states.append(
                _EmState(C=C, covariances=covs, P=_initial_transition(K), rho=np.full(K, 1.0 / K))
            )
    if not states:
        raise ConfigError("initialization produced no candidate states")
    return states[:n_restarts]


@dataclass
class _EmRun:
    state: _EmState
    trace: list[float]
    smoothed: np.ndarray
    filtered: np.ndarray
    predicted: np.ndarray
    logf: np.ndarray
    per_period: np.ndarray
    converged: bool


def _run_em(
    state: _EmState,
    design: _Design,
    spec: ModelSpec,
    max_iter: int,
    tol: float,
) -> _EmRun:
    trace: list[float] = []
    prev_ll = -np.inf
    converged = False
    last = None
    switching_cov = spec.n_regimes > 1 and spec.switching.covariance
    for it in range(max_iter):
        logf = _state_logliks(state, design)
        filtered, predicted, per_period = filter_arrays(logf, state.P, state.rho)
        ll = float(per_period.sum())
        fo = FilterOutput(
            filtered_probs=filtered,
            predicted_probs=predicted,
            log_likelihood=ll,
            conditional_logliks=logf,
            per_period_loglik=per_period,
        )
        smoothed, pairwise = kim_smoother(fo, TransitionMatrix(state.P.copy()))
        trace.append(ll)
        last = (smoothed, filtered, predicted, logf, per_period)
        if np.isfinite(prev_ll) and ll - prev_ll < tol * (abs(prev_ll) + 1.0):
            converged = True
            break
        prev_ll = ll
        if it == max_iter - 1:
            break  # the last E-step defines the returned parameters
        _update_coefficients(state, design, smoothed)
        _update_covariances(state, design, smoothed, switching_cov)
        _update_transition(state, smoothed, pairwise)
    smoothed, filtered, predicted, logf, per_period = last
    return _EmRun(
        state=state,
        trace=trace,
        smoothed=smoothed,
        filtered=filtered,
        predicted=predicted,
        logf=logf,
        per_period=per_period,
        converged=converged,
    )


def _coefficients_to_blocks(
    spec: ModelSpec, design: _Design, C: np.ndarray
) -> list[dict[str, np.ndarray]]:
    """Split (K, n, q) stacked coefficients back into named per-regime blocks."""
    K, n, _ = C.shape
    p, m = spec.lag_order, spec.n_exog
    blocks = []
    for k in range(K):
        entry = {
            "intercept": np.zeros(n),
            "lag_matrices": np.zeros((p, n, n)),
            "exog_coeffs": np.zeros((n, m)),
        }
        for name, sl, _ in design.groups:
            part = C[k][:, sl]
            if name == "intercept":
                entry["intercept"] = part[:, 0]
            elif name == "lag_matrices":
                entry["lag_matrices"] = part.reshape(n, p, n).swapaxes(0, 1)
            else:
                entry["exog_coeffs"] = part
        blocks.append(entry)
    return blocks


def _chronological_permutation(smoothed: np.ndarray, covariances: np.ndarray) -> list[int]:
    """Order regimes by first period of modal smoothed probability; ties by |Sigma|."""
    T, K = smoothed.shape
    modal = np.argmax(smoothed, axis=1)
    keys = []
    for k in range(K):
        hits = np.nonzero(modal == k)[0]
        first = int(hits[0]) if hits.size else T + K
        keys.append((first, float(np.linalg.det(covariances[k])), k))
    return [k for _, _, k in sorted(keys)]


def _apply_permutation(run: _EmRun, perm: list[int]) -> None:
    idx = np.array(perm, dtype=int)
    run.state.C = run.state.C[idx]
    run.state.covariances = run.state.covariances[idx]
    run.state.P = run.state.P[np.ix_(idx, idx)]
    run.state.rho = run.state.rho[idx]
    run.smoothed = run.smoothed[:, idx]
    run.filtered = run.filtered[:, idx]
    run.predicted = run.predicted[:, idx]
    run.logf = run.logf[:, idx]


def _se_layout(spec: ModelSpec, design: _Design) -> list[tuple[str, int | None, int]]:
    """Flat layout of free mean coefficients: (group, regime or None, column)."""
    layout: list[tuple[str, int | None, int]] = []
    K = spec.n_regimes
    for name, sl, switching in design.groups:
        cols = range(sl.start, sl.stop)
        if switching:
            for k in range(K):
                for c in cols:
                    layout.append((name, k, c))
        else:
            for c in cols:
                layout.append((name, None, c))
    return layout


def _standard_errors(
    spec: ModelSpec, design: _Design, state: _EmState
) -> dict[str, np.ndarray]:
    """OPG standard errors for the mean coefficients.

    Per-period scores come from central differences of the per-period
    log-likelihood; the covariance/transition blocks are held at the optimum,
    so the result is approximate by construction.
    """
    K, n, q = state.C.shape
    layout = _se_layout(spec, design)
    n_rows = design.n_vars
    entries: list[tuple[str, int | None, int, int]] = []  # + row index
    for name, k, c in layout:
        for r in range(n_rows):
            entries.append((name, k, c, r))
    T = design.n_obs
    scores = np.empty((T, len(entries)))

    def per_period(Cmod: np.ndarray) -> np.ndarray:
        work = _EmState(C=Cmod, covariances=state.covariances, P=state.P, rho=state.rho)
        logf = _state_logliks(work, design)
        _, _, per = filter_arrays(logf, state.P, state.rho)
        return per

    for j, (name, k, c, r) in enumerate(entries):
        theta = float(state.C[k if k is not None else 0, r, c])
        h = SE_STEP_SCALE * max(abs(theta), 1.0)
        C_plus = state.C.copy()
        C_minus = state.C.copy()
        if k is None:
            C_plus[:, r, c] = theta + h
            C_minus[:, r, c] = theta - h
        else:
            C_plus[k, r, c] = theta + h
            C_minus[k, r, c] = theta - h
        scores[:, j] = (per_period(C_plus) - per_period(C_minus)) / (2.0 * h)

    opg = scores.T @ scores
    cov = np.linalg.pinv(opg)
    se_flat = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    p, m = spec.lag_order, spec.n_exog
    out = {
        "intercept": np.full((K, n), np.nan),
        "lag_matrices": np.full((K, p, n, n), np.nan),
        "exog_coeffs": np.full((K, n, m), np.nan),
    }
    group_start = {name: sl.start for name, sl, _ in design.groups}
    for j, (name, k, c, r) in enumerate(entries):
        targets = range(K) if k is None else (k,)
        rel = c - group_start[name]
        for kk in targets:
            if name == "intercept":
                out["intercept"][kk, r] = se_flat[j]
            elif name == "lag_matrices":
                lag, col = divmod(rel, n)
                out["lag_matrices"][kk, lag, r, col] = se_flat[j]
            else:
                out["exog_coeffs"][kk, r, rel] = se_flat[j]
    return out


def _result_from_run(
    spec: ModelSpec,
    design: _Design,
    run: _EmRun,
    restarts_used: int,
    compute_se: bool,
) -> EstimatedMsVar:
    perm = _chronological_permutation(run.smoothed, run.state.covariances)
    if perm != list(range(spec.n_regimes)):
        _apply_permutation(run, perm)
    blocks = _coefficients_to_blocks(spec, design, run.state.C)
    regimes = tuple(
        RegimeParameterSet(
            intercept=blocks[k]["intercept"],
            lag_matrices=blocks[k]["lag_matrices"],
            exog_coeffs=blocks[k]["exog_coeffs"],
            covariance=run.state.covariances[k],
        )
        for k in range(spec.n_regimes)
    )
    se = _standard_errors(spec, design, run.state) if compute_se else None
    return EstimatedMsVar(
        spec=spec,
        regimes=regimes,
        transition=TransitionMatrix(run.state.P.copy()),
        initial_distribution=run.state.rho.copy(),
        smoothed_probs=run.smoothed,
        filtered_probs=run.filtered,
        log_likelihood=run.trace[-1],
        em_trace=tuple(run.trace),
        converged=run.converged,
        restarts_used=restarts_used,
        standard_errors=se,
    )


def em_fit(
    spec: ModelSpec,
    dataset: ModelDataset,
    init_strategy: str = "auto",
    n_restarts: int = 10,
    max_iter: int = 500,
    tol: float = 1e-6,
    seed: int = 0,
    compute_se: bool = True,
) -> EstimatedMsVar:
    """Fit the switching VAR by EM with multiple restarts.

    The best restart by final log-likelihood wins; regimes are relabeled so
    that the regime achieving modal probability earliest is regime 0.
    """
    if tuple(spec.endogenous) != tuple(dataset.variable_names):
        raise ConfigError(
            f"spec endogenous {spec.endogenous} do not match dataset variables "
            f"{dataset.variable_names}"
        )
    if n_restarts < 1:
        raise ConfigError(f"n_restarts must be >= 1, got {n_restarts}")
    design = _build_design(spec, dataset)
    _check_sample_size(spec, design)
    if spec.n_regimes == 1:
        n_restarts = 1
    states = _initial_states(spec, design, n_restarts, seed, init_strategy)
    best: _EmRun | None = None
    failure: EstimationError | None = None
    for state in states:
        try:
            run = _run_em(state, design, spec, max_iter, tol)
        except EstimationError as exc:
            failure = exc
            continue
        if best is None or run.trace[-1] > best.trace[-1]:
            best = run
    if best is None:
        raise failure if failure is not None else EstimationError("every EM restart failed")
    return _result_from_run(spec, design, best, restarts_used=len(states), compute_se=compute_se)


def loglikelihood(params: MsVarParameters, dataset: ModelDataset) -> float:
    """Model log-likelihood at the supplied parameters (thin filter wrapper)."""
    design = _build_design(params.spec, dataset)
    state = _params_to_state(params, design)
    logf = _state_logliks(state, design)
    _, _, per = filter_arrays(logf, state.P, state.rho)
    return float(per.sum())


def _params_to_state(params: MsVarParameters, design: _Design) -> _EmState:
    spec = params.spec
    K, n, q = spec.n_regimes, design.n_vars, design.U.shape[1]
    C = np.zeros((K, n, q))
    for k, reg in enumerate(params.regimes):
        for name, sl, _ in design.groups:
            if name == "intercept":
                C[k][:, sl] = reg.intercept[:, None]
            elif name == "lag_matrices":
                C[k][:, sl] = reg.lag_matrices.swapaxes(0, 1).reshape(n, -1)
            else:
                C[k][:, sl] = reg.exog_coeffs
    covs = np.stack([reg.covariance for reg in params.regimes])
    return _EmState(C=C, covariances=covs.copy(), P=params.transition.matrix.copy(),
                    rho=params.initial_law().copy())


def ols_var_fit(spec: ModelSpec, dataset: ModelDataset) -> EstimatedMsVar:
    """Single-regime VAR by equation-by-equation least squares (oracle baseline)."""
    if spec.n_regimes != 1:
        raise ConfigError("ols_var_fit requires a spec with n_regimes == 1")
    if tuple(spec.endogenous) != tuple(dataset.variable_names):
        raise ConfigError("spec endogenous names do not match dataset variables")
    design = _build_design(spec, dataset)
    _check_sample_size(spec, design)
    C, sigma = _pooled_ols(design)
    state = _EmState(C=C[None, :, :], covariances=sigma[None, :, :], P=np.ones((1, 1)),
                     rho=np.ones(1))
    logf = _state_logliks(state, design)
    _, _, per = filter_arrays(logf, state.P, state.rho)
    ll = float(per.sum())
    T = design.n_obs
    blocks = _coefficients_to_blocks(spec, design, state.C)
    regime = RegimeParameterSet(
        intercept=blocks[0]["intercept"],
        lag_matrices=blocks[0]["lag_matrices"],
        exog_coeffs=blocks[0]["exog_coeffs"],
        covariance=sigma,
    )
    se = _standard_errors(spec, design, state)
    ones = np.ones((T, 1))
    return EstimatedMsVar(
        spec=spec,
        regimes=(regime,),
        transition=TransitionMatrix(np.ones((1, 1))),
        initial_distribution=np.ones(1),
        smoothed_probs=ones,
        filtered_probs=ones,
        log_likelihood=ll,
        em_trace=(ll,),
        converged=True,
        restarts_used=1,
        standard_errors=se,
    )
