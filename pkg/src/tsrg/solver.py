"""Target sample re-generator: model, IALM solver and application.

The re-generator is a kernel map G(x) = P^T k(anchors, x) trained so that
source samples reproduce themselves while the regenerated target mean is
pulled onto the regenerated source mean.  P is learned by an inexact
augmented Lagrange multiplier loop with an auxiliary variable Q tied to P,
alternating a ridge-type linear solve for Q, elementwise soft-thresholding
for P and a running multiplier update.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import DimensionError, NonFiniteError, NumericalError
from .kernels import AugmentedKernels, FeatureMatrix, KernelSpec, build_augmented, gram_matrix


@dataclass(frozen=True)
class SolverConfig:
    lam: float = 1.0          # MMD trade-off
    mu: float = 1e-3          # L1 sparsity trade-off
    kappa0: float = 0.1       # initial penalty
    rho: float = 1.1          # penalty growth factor
    kappa_max: float = 1e7
    epsilon: float = 1e-7     # stop when max|P - Q| drops below this
    max_iters: int = 500

    def __post_init__(self):
        if self.lam < 0 or self.mu < 0:
            raise ValueError("lam and mu must be nonnegative")
        if self.kappa0 <= 0 or self.kappa_max <= 0 or self.kappa0 > self.kappa_max:
            raise ValueError("need 0 < kappa0 <= kappa_max")
        if self.rho <= 1:
            raise ValueError("rho must be > 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SolverState:
    p: np.ndarray
    q: np.ndarray
    t: np.ndarray
    kappa: float
    iter: int = 0


@dataclass
class IterationRecord:
    objective: float
    reconstruction: float
    mean_gap: float     # lambda-free value of the regenerated mean-difference term
    l1: float
    feasibility: float  # max|P - Q|
    kappa: float


@dataclass
class SolverTrace:
    records: list[IterationRecord] = field(default_factory=list)
    converged: bool = False
    iters_run: int = 0


@dataclass(frozen=True)
class TsrgModel:
    """Everything needed to apply the learned re-generator."""

    p: np.ndarray
    anchors: FeatureMatrix
    kernel: KernelSpec
    n_s: int
    n_t: int
    config: SolverConfig

    def __post_init__(self):
        if self.p.shape[0] != self.anchors.n:
            raise DimensionError(
                f"P has {self.p.shape[0]} rows but there are {self.anchors.n} anchors"
            )


def objective(p: np.ndarray, x_s: FeatureMatrix, ak: AugmentedKernels,
              lam: float, mu: float) -> float:
    """Full training objective at P: reconstruction + lam*mean-gap + mu*|P|_1."""
    recon, gap, l1 = objective_terms(p, x_s, ak)
    return recon + lam * gap + mu * l1


def objective_terms(p: np.ndarray, x_s: FeatureMatrix,
                    ak: AugmentedKernels) -> tuple[float, float, float]:
    if p.shape != (ak.n_s + ak.n_t, x_s.d):
        raise DimensionError(
            f"P must be {(ak.n_s + ak.n_t, x_s.d)}, got {p.shape}"
        )
    if x_s.n != ak.n_s:
        raise DimensionError("augmented kernels inconsistent with source matrix")
    resid = x_s.data - p.T @ ak.k_s
    recon = float(np.sum(resid * resid))
    g = p.T @ ak.delta_k
    gap = float(np.dot(g, g))
    l1 = float(np.abs(p).sum())
    return recon, gap, l1


def _solve_spd(m: np.ndarray, kappa: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (m + kappa/2 I) x = rhs by Cholesky, with jitter escalation."""
    n = m.shape[0]
    shifted = m + (kappa / 2.0) * np.eye(n)
    jitter = 1e-10 * np.trace(m) / n if n else 0.0
    last_err = None
    for attempt in range(4):
        try:
            c, low = scipy.linalg.cho_factor(shifted, check_finite=False)
            return scipy.linalg.cho_solve((c, low), rhs, check_finite=False)
        except scipy.linalg.LinAlgError as err:
            last_err = err
            shifted = shifted + jitter * np.eye(n)
            jitter *= 10.0
    raise NumericalError(f"SPD factorization failed after jitter escalation: {last_err}")


def update_q(state: SolverState, x_s: FeatureMatrix, ak: AugmentedKernels,
             lam: float) -> np.ndarray:
    """Closed-form ridge solve for Q with P, T, kappa held fixed.

    Minimizes |X_s - Q^T K_s|_F^2 + lam |Q^T dk|^2 + tr[T^T(P-Q)]
    + kappa/2 |P-Q|_F^2, i.e.
    Q = (K_s K_s^T + lam dk dk^T + kappa/2 I)^-1 (K_s X_s^T + (kappa P + T)/2).
    """
    if state.kappa <= 0:
        raise ValueError("kappa must be > 0")
    m = ak.k_s @ ak.k_s.T + lam * np.outer(ak.delta_k, ak.delta_k)
    rhs = ak.k_s @ x_s.data.T + (state.kappa * state.p + state.t) / 2.0
    return _solve_spd(m, state.kappa, rhs)


def shrink(v: np.ndarray, tau: float) -> np.ndarray:
    """Soft-threshold: sign(v) * max(|v| - tau, 0)."""
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def update_p(q: np.ndarray, t: np.ndarray, kappa: float, mu: float) -> np.ndarray:
    """Proximal L1 step: soft-threshold Q - T/kappa at level mu/kappa."""
    if kappa <= 0:
        raise ValueError("kappa must be > 0")
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if q.shape != t.shape:
        raise DimensionError(f"Q and T shapes differ: {q.shape} vs {t.shape}")
    return shrink(q - t / kappa, mu / kappa)


def update_multiplier(state: SolverState, rho: float, kappa_max: float) -> tuple[np.ndarray, float]:
    """Multiplier and penalty step: T += kappa (P - Q), kappa = min(rho kappa, kappa_max)."""
    if rho <= 1:
        raise ValueError("rho must be > 1")
    t_new = state.t + state.kappa * (state.p - state.q)
    kappa_new = min(rho * state.kappa, kappa_max)
    return t_new, kappa_new


def fit(x_s: FeatureMatrix, x_t: FeatureMatrix, spec: KernelSpec,
        config: SolverConfig) -> tuple[TsrgModel, SolverTrace]:
    """Learn the re-generator coefficients by the IALM loop from P=Q=T=0."""
    spec = spec.resolved(x_s, x_t)
    ak = build_augmented(x_s, x_t, spec)
    n = ak.n_s + ak.n_t
    d = x_s.d

    # system matrix without the kappa shift; re-used across iterations
    m = ak.k_s @ ak.k_s.T + config.lam * np.outer(ak.delta_k, ak.delta_k)
    rhs_base = ak.k_s @ x_s.data.T

    state = SolverState(
        p=np.zeros((n, d)), q=np.zeros((n, d)), t=np.zeros((n, d)),
        kappa=config.kappa0,
    )
    trace = SolverTrace()
    for it in range(config.max_iters):
        state.q = _solve_spd(m, state.kappa, rhs_base + (state.kappa * state.p + state.t) / 2.0)
        state.p = update_p(state.q, state.t, state.kappa, config.mu)
        if not (np.all(np.isfinite(state.p)) and np.all(np.isfinite(state.q))):
            raise NonFiniteError(f"solver iterate became non-finite at iteration {it}")
        feas = float(np.max(np.abs(state.p - state.q))) if n * d else 0.0
        state.t, state.kappa = update_multiplier(state, config.rho, config.kappa_max)
        state.iter = it + 1

        recon, gap, l1 = objective_terms(state.p, x_s, ak)
        trace.records.append(IterationRecord(
            objective=recon + config.lam * gap + config.mu * l1,
            reconstruction=recon, mean_gap=gap, l1=l1,
            feasibility=feas, kappa=state.kappa,
        ))
        trace.iters_run = it + 1
        if feas < config.epsilon:
            trace.converged = True
            break

    anchors = FeatureMatrix(np.concatenate([x_s.data, x_t.data], axis=1))
    model = TsrgModel(p=state.p, anchors=anchors, kernel=spec,
                      n_s=ak.n_s, n_t=ak.n_t, config=config)
    return model, trace


def regenerate(model: TsrgModel, x: FeatureMatrix) -> FeatureMatrix:
    """Apply the learned map: columns P^T k(anchors, x_j)."""
    if x.d != model.anchors.d:
        raise DimensionError(f"input dimension {x.d} != anchor dimension {model.anchors.d}")
    k = gram_matrix(model.anchors, x, model.kernel)
    return FeatureMatrix(model.p.T @ k)


def fg_residual(model: TsrgModel, ak: AugmentedKernels) -> float:
    """Squared distance between the regenerated source and target means."""
    if model.p.shape[0] != ak.n_s + ak.n_t:
        raise DimensionError("model and augmented kernels disagree on anchor count")
    g = model.p.T @ ak.delta_k
    return float(np.dot(g, g))


MODEL_FORMAT_VERSION = 1


def save_model(model: TsrgModel, path: str | Path) -> None:
    """Serialize a model to an .npz archive; P round-trips bit-exactly."""
    cfg = json.dumps(asdict(model.config), sort_keys=True)
    np.savez(
        path,
        version=np.int64(MODEL_FORMAT_VERSION),
        p=model.p.astype(np.float64, copy=False),
        anchors=model.anchors.data,
        kernel_kind=np.str_(model.kernel.kind),
        kernel_bandwidth=np.float64(model.kernel.bandwidth if model.kernel.bandwidth is not None else np.nan),
        n_s=np.int64(model.n_s),
        n_t=np.int64(model.n_t),
        config_json=np.str_(cfg),
    )


def load_model(path: str | Path) -> TsrgModel:
    with np.load(path, allow_pickle=False) as z:
        version = int(z["version"])
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version}")
        bw = float(z["kernel_bandwidth"])
        spec = KernelSpec(str(z["kernel_kind"]), None if np.isnan(bw) else bw)
        cfg = SolverConfig(**json.loads(str(z["config_json"])))
        return TsrgModel(
            p=z["p"], anchors=FeatureMatrix(z["anchors"]), kernel=spec,
            n_s=int(z["n_s"]), n_t=int(z["n_t"]), config=cfg,
        )
