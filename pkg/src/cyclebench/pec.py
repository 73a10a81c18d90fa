"""Probabilistic-error-cancellation bias on random Clifford circuits:
propagate a Pauli observable through composite layers and accumulate the
ratio of exact to reconstructed fidelities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layers import CliffordLayer, all_single_qubit_cliffords, conjugate, conjugate_inverse
from .pauli import PauliString
from .pipeline import CharacterizationPlan, characterize_and_fit, generate_models, model_rng
from .spl import GeneratorSet, SplModel


@dataclass(frozen=True)
class CliffordCircuit:
    """J composite layers: a characterized base layer followed by a random
    single-qubit Clifford layer."""

    layers: tuple[CliffordLayer, ...]
    base_labels: tuple[str, ...]
    seed: int = 0

    def __post_init__(self):
        if len(self.layers) != len(self.base_labels):
            raise ValueError("one base label per composite layer")
        if not self.layers:
            raise ValueError("circuit needs at least one layer")


@dataclass(frozen=True)
class PecRun:
    beta0: PauliString
    final_weight: int
    o_c: float
    o_m: float


def pec_observable(
    true_models: dict[str, SplModel],
    fitted: dict[str, np.ndarray],
    circuit: CliffordCircuit,
    beta0: PauliString,
    generators: GeneratorSet,
) -> float:
    """Product over the circuit of f_exact / f_fitted at the propagated
    Pauli string (noise acts before each layer, so step i uses the string
    entering it).  SPAM plays no role."""
    log_o = 0.0
    p = beta0
    for layer, lab in zip(circuit.layers, circuit.base_labels):
        overlaps = generators.overlaps(p).astype(float)
        log_true = -2.0 * float(overlaps @ true_models[lab].lambdas)
        log_fit = -2.0 * float(overlaps @ fitted[lab])
        if not np.isfinite(log_fit):
            raise ZeroDivisionError(f"fitted fidelity vanished on layer {lab}")
        log_o += log_true - log_fit
        p = conjugate(layer, p)
    return float(np.exp(log_o))


def sample_circuit(
    base_layers: dict[str, CliffordLayer],
    j_layers: int,
    target_weight: int,
    seed: int,
    rng: np.random.Generator | None = None,
) -> tuple[CliffordCircuit, PauliString, PauliString]:
    """Random circuit plus an initial Pauli whose final conjugation has the
    requested weight.

    The final string is drawn uniformly over weight-W Paulis and pulled back
    through the circuit; conjugation is a bijection, so this matches
    rejection sampling on the initial string exactly and never rejects.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    labels = sorted(base_layers)
    n = base_layers[labels[0]].n
    if not 0 <= target_weight <= n:
        raise ValueError("target weight out of range")
    group = all_single_qubit_cliffords()
    layers = []
    base_seq = []
    for _ in range(j_layers):
        lab = labels[rng.integers(len(labels))]
        base = base_layers[lab]
        sq = tuple(
            (q, group[rng.integers(len(group))]) for q in range(n)
        )
        layers.append(CliffordLayer(n, base.cz_pairs, sq, lab))
        base_seq.append(lab)
    # Uniform weight-W final string.
    qubits = rng.permutation(n)[:target_weight]
    x = z = 0
    for q in qubits:
        letter = rng.integers(3)
        if letter != 2:
            x |= 1 << int(q)
        if letter != 0:
            z |= 1 << int(q)
    beta_final = PauliString(n, x, z)
    p = beta_final
    for layer in reversed(layers):
        p = conjugate_inverse(layer, p)
    circuit = CliffordCircuit(tuple(layers), tuple(base_seq), seed)
    return circuit, p.unsigned(), beta_final


def pec_sweep(
    plan: CharacterizationPlan,
    n_models: int,
    n_circuits: int,
    j_layers: int,
    weights: tuple[int, ...],
    sigma: float,
    sigma_prime: float,
    baseline: str,
    master_seed: int,
) -> list[dict]:
    """Rows of (model seed, circuit seed, W, O_c, O_m) for the full sweep."""
    base_layers = {layer.label: layer for layer in plan.layers}
    rows = []
    for mi in range(n_models):
        rng = model_rng(master_seed, mi)
        models = generate_models(plan, rng)
        result = characterize_and_fit(
            plan, models, sigma, sigma_prime, baseline, rng
        )
        for w in weights:
            for ci in range(n_circuits):
                crng = model_rng(master_seed + 7919, mi * 100000 + ci * 100 + w)
                circuit, beta0, _ = sample_circuit(
                    base_layers, j_layers, w, seed=ci, rng=crng
                )
                run = PecRun(
                    beta0=beta0,
                    final_weight=w,
                    o_c=pec_observable(
                        models, result.fitted["conventional"], circuit, beta0, plan.generators
                    ),
                    o_m=pec_observable(
                        models, result.fitted["mlcb"], circuit, beta0, plan.generators
                    ),
                )
                rows.append(
                    {
                        "model_seed": mi,
                        "circuit_seed": ci,
                        "W": run.final_weight,
                        "O_c": run.o_c,
                        "O_m": run.o_m,
                    }
                )
    return rows


def summarize_pec(rows: list[dict]) -> dict:
    out: dict = {"by_weight": {}}
    weights = sorted({r["W"] for r in rows})
    for w in weights:
        oc = np.array([r["O_c"] for r in rows if r["W"] == w])
        om = np.array([r["O_m"] for r in rows if r["W"] == w])
        out["by_weight"][w] = {
            "mean_O_c": float(oc.mean()),
            "mean_O_m": float(om.mean()),
            "std_O_c": float(oc.std()),
            "std_O_m": float(om.std()),
            "count": int(len(oc)),
        }
    return out
