"""Assembling fidelity records into the linear constraint system and fitting
rate vectors by nonnegative least squares; accuracy metrics against the
generating model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .experiment import FidelityRecord
from .spl import GeneratorSet, SplModel


class RankDeficientError(ValueError):
    def __init__(self, message, null_directions=None):
        super().__init__(message)
        self.null_directions = null_directions or []


@dataclass
class ConstraintSystem:
    """Rows of the rate <-> log-fidelity map: matrix @ lambda = rhs with
    rhs = -log(estimate)/2, weighted per record."""

    matrix: np.ndarray
    rhs: np.ndarray
    weights: np.ndarray
    layer_slices: dict[str, slice]
    records: list[FidelityRecord] = field(default_factory=list)

    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.matrix))

    def check_full_rank(self, generators_by_layer: dict[str, GeneratorSet]) -> None:
        ncols = self.matrix.shape[1]
        rank = self.rank()
        if rank < ncols:
            # Identify the unconstrained directions for the error message.
            _, s, vt = np.linalg.svd(self.matrix)
            null = vt[rank:]
            dirs = []
            for vec in null[: ncols - rank]:
                idx = np.argsort(-np.abs(vec))[:4]
                parts = []
                for i in idx:
                    if abs(vec[i]) < 1e-9:
                        continue
                    lab, gi = self._locate(i)
                    parts.append(f"{lab}:{generators_by_layer[lab].strings[gi].label()}")
                dirs.append(" / ".join(parts))
            raise RankDeficientError(
                f"constraint system rank {rank} < {ncols}; "
                f"unconstrained directions include: {dirs}",
                null_directions=dirs,
            )

    def _locate(self, col: int) -> tuple[str, int]:
        for lab, sl in self.layer_slices.items():
            if sl.start <= col < sl.stop:
                return lab, col - sl.start
        raise IndexError(col)


def assemble(
    records: list[FidelityRecord],
    generators_by_layer: dict[str, GeneratorSet],
    layer_order: tuple[str, ...],
) -> ConstraintSystem:
    """Build the weighted system from records over the concatenated rate
    space of the given layers."""
    offsets = {}
    total = 0
    for lab in layer_order:
        offsets[lab] = total
        total += len(generators_by_layer[lab])
    rows = np.zeros((len(records), total))
    rhs = np.empty(len(records))
    weights = np.empty(len(records))
    for j, rec in enumerate(records):
        if rec.estimate <= 0:
            raise ValueError(f"record {rec.provenance!r} has non-positive estimate")
        for lab, p in rec.targets:
            gens = generators_by_layer[lab]
            rows[j, offsets[lab] : offsets[lab] + len(gens)] += gens.overlaps(p)
        rhs[j] = -0.5 * np.log(rec.estimate)
        weights[j] = 1.0 / max(rec.sigma, 1e-15) ** 2
    slices = {
        lab: slice(offsets[lab], offsets[lab] + len(generators_by_layer[lab]))
        for lab in layer_order
    }
    return ConstraintSystem(rows, rhs, weights, slices, list(records))


@dataclass
class FitResult:
    lambdas: np.ndarray
    residual_norm: float
    kkt_residual: float
    iterations: int
    method: str = "layerwise_constrained"

    def split(self, slices: dict[str, slice]) -> dict[str, np.ndarray]:
        return {lab: self.lambdas[sl] for lab, sl in slices.items()}


def nnls(
    A: np.ndarray,
    b: np.ndarray,
    weights: np.ndarray | None = None,
    tol: float = 1e-12,
    max_iter: int | None = None,
    gram: bool = False,
) -> FitResult:
    """argmin_{x >= 0} || sqrt(W) (A x - b) ||_2 by an active-set method.

    Lawson-Hanson structure with a warm start: the passive set is seeded
    from the sign pattern of the unconstrained solution, then the standard
    inner feasibility restoration / outer optimality loop runs to exact KKT
    conditions.  If the warm start stalls, restart cold (provably
    convergent).

    With gram=True the passive-set solves use precomputed normal equations
    (much faster for tall systems, at the cost of squared conditioning);
    the default path solves least squares on the passive columns directly.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        sw = np.sqrt(w / w.max())  # normalization leaves the argmin unchanged
        A = A * sw[:, None]
        b = b * sw
    m, n = A.shape
    if max_iter is None:
        max_iter = 10 * n + 100
    scale = max(1.0, float(np.abs(A.T @ b).max())) if m else 1.0
    gtol = tol * scale
    ata = atb = None
    if gram:
        ata = A.T @ A
        atb = A.T @ b

    def solve_passive(passive):
        x = np.zeros(n)
        if passive.any():
            if gram:
                sub = ata[np.ix_(passive, passive)]
                try:
                    sol = np.linalg.solve(sub, atb[passive])
                except np.linalg.LinAlgError:
                    sol, *_ = np.linalg.lstsq(sub, atb[passive], rcond=None)
            else:
                sol, *_ = np.linalg.lstsq(A[:, passive], b, rcond=None)
            x[passive] = sol
        return x

    def run(passive_init):
        passive = passive_init.copy()
        iters = 0
        # Warm-start restoration: shrink the proposed passive set until its
        # least-squares solution is strictly positive (drops at least one
        # coordinate per pass, so it terminates).
        z = solve_passive(passive)
        while np.any(z[passive] <= 0):
            iters += 1
            if iters > max_iter:
                return None
            passive &= ~(passive & (z <= 0))
            z = solve_passive(passive)
        x = z
        while True:
            iters += 1
            if iters > max_iter:
                return None
            grad = A.T @ (b - A @ x)
            candidates = ~passive
            if not candidates.any() or np.max(grad[candidates]) <= gtol:
                return x, iters
            passive[int(np.argmax(np.where(candidates, grad, -np.inf)))] = True
            z = solve_passive(passive)
            # Inner loop: move from feasible x toward z, dropping whichever
            # passive coordinates hit zero first.
            while np.any(z[passive] <= 0):
                iters += 1
                if iters > max_iter:
                    return None
                mask = passive & (z <= 0)
                denom = x[mask] - z[mask]
                ratios = np.where(denom > 0, x[mask] / np.maximum(denom, 1e-300), 0.0)
                alpha = float(ratios.min())
                x = x + alpha * (z - x)
                floor = 1e-12 * max(1.0, float(np.abs(x).max()))
                hit = mask & (x <= floor)
                if not hit.any():
                    hit = mask
                passive &= ~hit
                x[~passive] = 0.0
                z = solve_passive(passive)
            x = z

    x0 = solve_passive(np.ones(n, dtype=bool))
    warm = x0 > 0
    result = run(warm)
    if result is None:
        result = run(np.zeros(n, dtype=bool))
        if result is None:
            raise RuntimeError("nonnegative least squares failed to converge")
    x, iters = result
    resid = b - A @ x
    grad = A.T @ resid
    kkt = max(
        float(np.max(grad[x <= 0], initial=0.0)),
        float(np.max(np.abs(grad[x > 0]), initial=0.0)),
    )
    return FitResult(
        lambdas=x,
        residual_norm=float(np.linalg.norm(resid)),
        kkt_residual=kkt / scale,
        iterations=iters,
        method="nnls",
    )


def fit_system(system: ConstraintSystem) -> FitResult:
    return nnls(system.matrix, system.rhs, system.weights)


def refine_unlearnable(estimates: list[float], ratios: list[float]) -> list[float]:
    """Impose measured consecutive ratios on low-accuracy fidelity estimates.

    With ratios mu_j = f_j / f_{j+1}, every fidelity in the cluster is u
    times a known factor; the single free parameter u minimizes the sum of
    squared residues against the low-accuracy estimates (closed form).
    """
    if len(ratios) != len(estimates) - 1:
        raise ValueError("need one ratio fewer than estimates")
    nu = [1.0]
    for mu in ratios:
        if mu <= 0:
            raise ValueError("ratios must be positive")
        nu.append(nu[-1] / mu)
    nu_arr = np.array(nu)
    est = np.array(estimates, dtype=float)
    u = float((nu_arr * est).sum() / (nu_arr**2).sum())
    return [float(u * v) for v in nu_arr]


@dataclass(frozen=True)
class MuRecord:
    """A measured ratio of two unlearnable single fidelities at one qubit."""

    qubit: int
    pair: tuple[str, str]
    value: float
    sigma: float = 0.0


def _by_layer(records: list[FidelityRecord]) -> dict[str, list[FidelityRecord]]:
    out: dict[str, list[FidelityRecord]] = {}
    for rec in records:
        labels = {lab for lab, _ in rec.targets}
        if len(labels) != 1:
            raise ValueError("layerwise fitting needs single-layer records")
        out.setdefault(labels.pop(), []).append(rec)
    return out


def fit_conventional(
    records_high: list[FidelityRecord],
    records_low: list[FidelityRecord],
    generators_by_layer: dict[str, GeneratorSet],
    weighted: bool = False,
) -> dict[str, FitResult]:
    """Per-layer nonnegative least squares over high-accuracy products plus
    the low-accuracy unlearnable singles."""
    high = _by_layer(records_high)
    low = _by_layer(records_low)
    out = {}
    for lab in sorted(set(high) | set(low)):
        records = high.get(lab, []) + low.get(lab, [])
        system = assemble(records, {lab: generators_by_layer[lab]}, (lab,))
        system.check_full_rank({lab: generators_by_layer[lab]})
        out[lab] = nnls(
            system.matrix, system.rhs, system.weights if weighted else None
        )
    return out


def fit_mlcb(
    records_high: list[FidelityRecord],
    records_low: list[FidelityRecord],
    mu_records: list[MuRecord],
    generators_by_layer: dict[str, GeneratorSet],
    layers,
    weighted: bool = False,
) -> dict[str, FitResult]:
    """Refine the unlearnable singles with the measured ratios (per bulk
    qubit, consecutive covering layers), then fit each layer.

    A qubit whose ratios are missing falls back to the conventional
    estimates for the uncovered part of its cluster.
    """
    by_label = {layer.label: layer for layer in layers}
    labels = [layer.label for layer in layers]
    low_map = {}
    for rec in records_low:
        (lab, alpha), = rec.targets
        (qubit,) = alpha.support()
        low_map[(lab, qubit)] = rec
    mu_map = {(m.qubit, m.pair): m.value for m in mu_records}
    refined: dict[tuple[str, int], float] = {}
    n = layers[0].n
    for q in range(n):
        covering = [lab for lab in labels if by_label[lab].gate_of(q) is not None]
        run: list[str] = []
        prev = None
        runs = []
        for lab in covering:
            if run and (q, (prev, lab)) not in mu_map:
                runs.append(run)
                run = []
            run.append(lab)
            prev = lab
        if run:
            runs.append(run)
        for run in runs:
            keys = [(lab, by_label[lab].partner(q)) for lab in run]
            if len(run) < 2 or any(k not in low_map for k in keys):
                continue
            estimates = [low_map[k].estimate for k in keys]
            ratios = [mu_map[(q, (run[j], run[j + 1]))] for j in range(len(run) - 1)]
            for k, v in zip(keys, refine_unlearnable(estimates, ratios)):
                refined[k] = min(max(v, 1e-12), 1.0)
    new_low = []
    for rec in records_low:
        (lab, alpha), = rec.targets
        (qubit,) = alpha.support()
        value = refined.get((lab, qubit), rec.estimate)
        new_low.append(
            FidelityRecord(rec.targets, value, rec.sigma, "low", rec.provenance + "+mlcb")
        )
    return fit_conventional(records_high, new_low, generators_by_layer, weighted)


def fit_joint(
    records: list[FidelityRecord],
    generators_by_layer: dict[str, GeneratorSet],
    layer_order: tuple[str, ...],
    weighted: bool = False,
) -> FitResult:
    """One nonnegative least squares over the concatenated rate space;
    records may span layers (multi-layer products enter as single rows)."""
    system = assemble(records, generators_by_layer, layer_order)
    fit = nnls(system.matrix, system.rhs, system.weights if weighted else None)
    fit.method = "joint"
    return fit


def distance_metrics(
    true_models: dict[str, SplModel], fitted: dict[str, np.ndarray]
) -> float:
    """L1 distance between true and fitted rate vectors, summed over layers."""
    total = 0.0
    for lab, model in true_models.items():
        lam_fit = np.asarray(fitted[lab], dtype=float)
        if lam_fit.shape != model.lambdas.shape:
            raise ValueError(f"rate vector shape mismatch for layer {lab}")
        total += float(np.abs(model.lambdas - lam_fit).sum())
    return total
