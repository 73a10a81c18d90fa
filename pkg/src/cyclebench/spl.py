"""Sparse Pauli-Lindblad noise models: local low-weight generator sets on a
topology, rate vectors, the rate <-> fidelity map, realistic random model
generation and quasiprobability weights for noise scaling."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .layers import CliffordLayer
from .pauli import PauliString, symplectic_inner
from .topology import Topology

_LETTERS = ("X", "Y", "Z")


@dataclass(frozen=True)
class GeneratorSet:
    """The ordered generator set K of weight <= w_max local Pauli strings.

    Ordering is fixed so rate vectors are portable: first the single-qubit
    strings (qubit ascending, letter in X, Y, Z order), then for every
    topology edge (ascending) the nine two-qubit strings in (X, Y, Z) x
    (X, Y, Z) order, the first letter on the lower qubit.
    """

    topology: Topology
    w_max: int = 2
    strings: tuple[PauliString, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.w_max != 2:
            raise NotImplementedError("only weight-2 generator sets are supported")
        if self.strings is None:
            object.__setattr__(self, "strings", self._build())
        object.__setattr__(
            self, "_index", {p.key(): i for i, p in enumerate(self.strings)}
        )
        # Bit masks as arrays for vectorized symplectic products (n <= 63).
        if self.topology.n <= 63:
            xs = np.array([p.x_bits for p in self.strings], dtype=np.int64)
            zs = np.array([p.z_bits for p in self.strings], dtype=np.int64)
        else:
            xs = zs = None
        object.__setattr__(self, "_xs", xs)
        object.__setattr__(self, "_zs", zs)

    def _build(self) -> tuple[PauliString, ...]:
        n = self.topology.n
        out = []
        for q in range(n):
            for letter in _LETTERS:
                out.append(PauliString.single(n, q, letter))
        for a, b in self.topology.edges:
            for la in _LETTERS:
                for lb in _LETTERS:
                    pa = PauliString.single(n, a, la)
                    pb = PauliString.single(n, b, lb)
                    out.append((pa * pb).unsigned())
        return tuple(out)

    def __len__(self) -> int:
        return len(self.strings)

    def index(self, p: PauliString) -> int:
        return self._index[p.key()]

    def overlaps(self, alpha: PauliString) -> np.ndarray:
        """Vector of symplectic products <alpha, kappa> over the whole set."""
        if self._xs is not None:
            acomm = (
                np.bitwise_count(self._xs & alpha.z_bits)
                + np.bitwise_count(self._zs & alpha.x_bits)
            ) & 1
            return acomm.astype(np.int8)
        return np.array(
            [symplectic_inner(alpha, k) for k in self.strings], dtype=np.int8
        )


@dataclass(frozen=True)
class SplModel:
    """Generator rates for one layer; fidelities via f = exp(-2 M lambda)."""

    layer_label: str
    generators: GeneratorSet
    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float).copy()
        if lam.shape != (len(self.generators),):
            raise ValueError(
                f"rate vector length {lam.shape} does not match generator count "
                f"{len(self.generators)}"
            )
        if np.any(lam < 0):
            raise ValueError("rates must be nonnegative")
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    def log_fidelity(self, alpha: PauliString) -> float:
        return -2.0 * float(self.generators.overlaps(alpha) @ self.lambdas)

    def fidelity(self, alpha: PauliString) -> float:
        return float(np.exp(self.log_fidelity(alpha)))

    def to_dict(self) -> dict:
        return {
            "schema": "spl-model/1",
            "label": self.layer_label,
            "topology": self.generators.topology.to_dict(),
            "w_max": self.generators.w_max,
            "lambdas": [float(v) for v in self.lambdas],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SplModel":
        gens = GeneratorSet(Topology.from_dict(d["topology"]), d.get("w_max", 2))
        return cls(d["label"], gens, np.array(d["lambdas"], dtype=float))

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "SplModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def fidelity(model: SplModel, alpha: PauliString) -> float:
    return model.fidelity(alpha)


def fidelity_product(models, targets) -> float:
    """Product of fidelities over (layer label, Pauli string) targets."""
    total = 0.0
    for label, alpha in targets:
        try:
            model = models[label]
        except KeyError:
            raise KeyError(f"unknown layer label {label!r}") from None
        total += model.log_fidelity(alpha)
    return float(np.exp(total))


@dataclass(frozen=True)
class RandomModelParams:
    """Gaussian hyperparameters for realistic random rate vectors.

    Inactive generators (support not fully inside the layer's gate support)
    draw from N(mean_inactive, std_inactive); active generators draw from
    N(m_gate, std_active) where each gate's m_gate is itself drawn once from
    N(mean_active, spread_active).  Negative draws are clamped to zero.
    """

    mean_inactive: tuple[float, float] = (2e-4, 1.5e-4)  # weight 1, weight 2
    std_inactive: tuple[float, float] = (8e-4, 1e-3)
    mean_active: tuple[float, float] = (1e-3, 2e-3)
    spread_active: tuple[float, float] = (7.5e-4, 1.5e-3)
    std_active: tuple[float, float] = (1e-3, 2e-3)
    seed: int | None = None


def random_model(
    topology: Topology,
    layer: CliffordLayer,
    params: RandomModelParams = RandomModelParams(),
    rng: np.random.Generator | None = None,
) -> SplModel:
    """Draw a realistic rate vector for one layer.

    A generator is active when its whole support lies inside a single gate
    of the layer (that gate's per-gate mean then applies); generators
    straddling two gates, or touching idling qubits, are inactive.
    """
    if rng is None:
        rng = np.random.default_rng(params.seed)
    gens = GeneratorSet(topology)
    gate_means: dict[tuple[int, int], tuple[float, float]] = {}
    for pair in layer.cz_pairs:
        gate_means[pair] = tuple(
            rng.normal(params.mean_active[w], params.spread_active[w])
            for w in (0, 1)
        )
    gate_of = {}
    for pair in layer.cz_pairs:
        gate_of[pair[0]] = pair
        gate_of[pair[1]] = pair
    lam = np.empty(len(gens))
    for i, p in enumerate(gens.strings):
        sup = p.support()
        w = len(sup) - 1  # 0 -> weight 1, 1 -> weight 2
        gate = gate_of.get(sup[0])
        if gate is not None and all(q in gate for q in sup):
            lam[i] = rng.normal(gate_means[gate][w], params.std_active[w])
        else:
            lam[i] = rng.normal(params.mean_inactive[w], params.std_inactive[w])
    np.clip(lam, 0.0, None, out=lam)
    return SplModel(layer.label, gens, lam)


def pec_weights(model: SplModel, beta: float) -> np.ndarray:
    """Per-generator mixing weights that scale the layer noise to e^{beta L}.

    For beta < 1 the weights turn negative (quasiprobabilities), which is
    what noise inversion requires.
    """
    return (1.0 - np.exp(-2.0 * (beta - 1.0) * model.lambdas)) / 2.0
