"""Command-line interface tying the characterization pipeline together.

Commands: generate-model, learnability, characterize, fit, pec, repro.
Configs are JSON; outputs are JSON (structures) and CSV (sweeps), each
embedding a digest of the resolved configuration for provenance.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import multiprocessing
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .fitting import RankDeficientError
from .layers import CATALOG, CliffordLayer
from .learnability import analyze_layer, mlcb_recovery
from .pec import pec_sweep, summarize_pec
from .pipeline import (
    CharacterizationPlan,
    cached_plan,
    generate_models,
    model_rng,
    sweep_item,
)
from .spl import GeneratorSet, RandomModelParams
from .topology import LAYER_SCHEMES, Topology, four_layer_config, preset

EXIT_CONFIG = 2
EXIT_RANK = 3
EXIT_NUMERIC = 4


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    topology: Topology
    layers: list[CliffordLayer]
    scheme: str = ""
    sigma: float = 1e-4
    sigma_prime: float = 1e-3
    baseline: str = "symmetry"  # symmetry | unit_depth
    pipelines: tuple[str, ...] = ("conventional", "mlcb")
    seed: int = 0
    models: int = 1
    circuits: int = 10
    j_layers: int = 40
    weights: tuple[int, ...] = (2, 20)
    out: str = "out"
    parallel: int = 1
    raw: dict = field(default_factory=dict)

    def digest(self) -> str:
        # Runtime knobs do not change what is computed.
        content = {k: v for k, v in self.raw.items() if k not in ("out", "parallel")}
        blob = json.dumps(content, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_config(path: str, overrides: dict | None = None) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    return parse_config(raw)


def parse_config(raw: dict) -> RunConfig:
    try:
        topo_spec = raw["topology"]
        topo = (
            preset(topo_spec) if isinstance(topo_spec, str) else Topology.from_dict(topo_spec)
        )
        layers_spec = raw.get("layers", "closed_squares")
        scheme = ""
        if isinstance(layers_spec, str):
            if layers_spec not in LAYER_SCHEMES:
                raise ConfigError(f"unknown layer scheme {layers_spec!r}")
            scheme = layers_spec
            layers = four_layer_config(topo, layers_spec)
        else:
            layers = [_parse_layer(spec, topo.n) for spec in layers_spec]
        baseline = raw.get("baseline", "symmetry")
        if baseline not in ("symmetry", "unit_depth"):
            raise ConfigError(f"unknown baseline {baseline!r}")
        return RunConfig(
            topology=topo,
            layers=layers,
            scheme=scheme,
            sigma=float(raw.get("sigma", 1e-4)),
            sigma_prime=float(raw.get("sigma_prime", 1e-3)),
            baseline=baseline,
            pipelines=tuple(raw.get("pipelines", ("conventional", "mlcb"))),
            seed=int(raw.get("seed", 0)),
            models=int(raw.get("models", 1)),
            circuits=int(raw.get("circuits", 10)),
            j_layers=int(raw.get("j_layers", 40)),
            weights=tuple(raw.get("weights", (2, 20))),
            out=raw.get("out", "out"),
            parallel=int(raw.get("parallel", 1)),
            raw=raw,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config: {exc}") from exc


def _parse_layer(spec: dict, n: int) -> CliffordLayer:
    sq = tuple(
        (int(q), CATALOG[name]) for q, name in spec.get("sq", {}).items()
    )
    return CliffordLayer(
        int(spec.get("n", n)),
        tuple(tuple(p) for p in spec.get("cz", ())),
        sq,
        spec.get("label", ""),
    )


def _write_json(path, payload) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def _plan(cfg: RunConfig) -> CharacterizationPlan:
    return cached_plan(cfg.topology, cfg.layers, seed=cfg.seed, retries=8)


def cmd_generate_model(cfg: RunConfig) -> int:
    rng = model_rng(cfg.seed, 0)
    os.makedirs(cfg.out, exist_ok=True)
    for layer in cfg.layers:
        model = _random_model(cfg, layer, rng)
        payload = model.to_dict()
        payload["config_digest"] = cfg.digest()
        _write_json(os.path.join(cfg.out, f"model_{layer.label}.json"), payload)
        print(f"wrote model_{layer.label}.json  |K| = {len(model.generators)}")
    return 0


def _random_model(cfg: RunConfig, layer, rng):
    from .spl import random_model

    return random_model(cfg.topology, layer, RandomModelParams(), rng)


def cmd_learnability(cfg: RunConfig) -> int:
    gens = GeneratorSet(cfg.topology)
    report = {
        "schema": "learnability-report/1",
        "config_digest": cfg.digest(),
        "layers": {},
    }
    for layer in cfg.layers:
        la = analyze_layer(layer, gens)
        report["layers"][layer.label] = {
            "generators": la.num_generators,
            "learnable_rank": la.rank,
            "unlearnable_dof": la.unlearnable_dof,
            "unlearnable_basis": [p.label() for p in la.unlearnable_basis],
            "standard_singletons": len(la.standard_singletons),
            "dressed_singletons": len(la.dressed_singletons),
            "independent_pair_constraints": la.independent_pair_constraints,
        }
    recovery = mlcb_recovery(cfg.topology, cfg.layers)
    total_unlearnable = sum(
        report["layers"][l.label]["unlearnable_dof"] for l in cfg.layers
    )
    recovered = sum(r for _, r in recovery.values())
    report["mlcb"] = {
        "per_qubit": {str(q): {"layers": l, "recovered": r} for q, (l, r) in recovery.items()},
        "unlearnable_without_mlcb": total_unlearnable,
        "recovered_dof": recovered,
        "reduction_fraction": recovered / total_unlearnable if total_unlearnable else 0.0,
    }
    if any(layer.cz_pairs for layer in cfg.layers) and len(cfg.layers) > 1:
        plan = _plan(cfg)
        report["mlcb"]["ratio_certificates"] = [
            {
                "qubit": e.qubit,
                "pair": list(e.pair),
                "epsilon": str(e.expression.epsilon),
                "measured_product": [
                    [lab, p.label()] for lab, p in e.product_terms
                ],
                "learnable_terms": [
                    {
                        "coefficient": str(coeff),
                        "product": [[prod.label, s.label()] for s in prod.strings],
                    }
                    for prod, coeff in e.expression.learnable_terms
                ],
            }
            for e in plan.mu_entries
        ]
    path = os.path.join(cfg.out, "learnability.json")
    _write_json(path, report)
    print(
        f"unlearnable DOF without multi-layer data: {total_unlearnable}; "
        f"recovered: {recovered} "
        f"({100.0 * report['mlcb']['reduction_fraction']:.1f}%) -> {path}"
    )
    return 0


def cmd_characterize(cfg: RunConfig) -> int:
    plan = _plan(cfg)
    rng = model_rng(cfg.seed, 0)
    models = generate_models(plan, rng)
    records = []
    lam = {lab: models[lab].lambdas for lab in plan.labels}
    for lab in plan.labels:
        exact = np.exp(-2.0 * (plan.s_high[lab].astype(float) @ lam[lab]))
        noisy = exact + (rng.normal(0, cfg.sigma, exact.shape) if cfg.sigma > 0 else 0.0)
        for prod, value in zip(plan.products[lab], noisy):
            records.append(
                {
                    "kind": "product",
                    "targets": [[lab, p.label()] for p in prod.strings],
                    "estimate": float(value),
                    "sigma": cfg.sigma,
                    "accuracy": "high",
                    "provenance": f"orbit:{prod.source}",
                }
            )
    for entry in plan.mu_entries:
        log_o = sum(models[l].log_fidelity(p) for l, p in entry.product_terms)
        noisy = float(np.exp(log_o)) + (
            float(rng.normal(0, cfg.sigma)) if cfg.sigma > 0 else 0.0
        )
        records.append(
            {
                "kind": "product",
                "targets": [[l, p.label()] for l, p in entry.product_terms],
                "estimate": noisy,
                "sigma": cfg.sigma,
                "accuracy": "high",
                "provenance": f"mlcb:q{entry.qubit}:{entry.pair[0]}{entry.pair[1]}",
            }
        )
    payload = {
        "schema": "fidelity-records/1",
        "config_digest": cfg.digest(),
        "records": records,
    }
    path = os.path.join(cfg.out, "records.json")
    _write_json(path, payload)
    for layer in cfg.layers:
        payload = models[layer.label].to_dict()
        payload["config_digest"] = cfg.digest()
        _write_json(os.path.join(cfg.out, f"model_{layer.label}.json"), payload)
    print(f"wrote {len(records)} records -> {path}")
    return 0


def _run_item(args):
    cfg_raw, index = args
    cfg = parse_config(cfg_raw)
    plan = _plan(cfg)
    models, result = sweep_item(
        plan, cfg.seed, index, cfg.sigma, cfg.sigma_prime, cfg.baseline,
        pipelines=cfg.pipelines,
    )
    return index, result.delta_c, result.delta_m, result.ratio


def cmd_fit(cfg: RunConfig) -> int:
    plan = _plan(cfg)
    rows = []
    indices = list(range(cfg.models))
    if cfg.parallel > 1:
        with multiprocessing.Pool(cfg.parallel) as pool:
            results = pool.map(_run_item, [(cfg.raw, i) for i in indices])
        results.sort()
    else:
        results = [_run_item((cfg.raw, i)) for i in indices]
    os.makedirs(cfg.out, exist_ok=True)
    csv_path = os.path.join(cfg.out, "metrics.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "config", "delta_c", "delta_m", "r"])
        for index, dc, dm, r in results:
            writer.writerow([index, cfg.digest(), dc, dm, "" if r is None else r])
            rows.append(r)
    # Fit the first model's rate vectors to files as well.
    models, result = sweep_item(
        plan, cfg.seed, 0, cfg.sigma, cfg.sigma_prime, cfg.baseline,
        pipelines=cfg.pipelines,
    )
    for pipeline, fitted in result.fitted.items():
        for lab, lam in fitted.items():
            payload = {
                "schema": "spl-model/1",
                "label": lab,
                "topology": cfg.topology.to_dict(),
                "w_max": 2,
                "lambdas": [float(v) for v in lam],
                "fitted_by": pipeline,
                "fit": result.fit_meta.get(pipeline, {}).get(lab, {}),
                "config_digest": cfg.digest(),
            }
            _write_json(os.path.join(cfg.out, f"fitted_{pipeline}_{lab}.json"), payload)
    valid = [r for r in rows if r is not None]
    if valid:
        print(
            f"{len(valid)} models: median r = {float(np.median(valid)):.3f} -> {csv_path}"
        )
    else:
        print(f"wrote {csv_path}")
    return 0


def cmd_pec(cfg: RunConfig) -> int:
    plan = _plan(cfg)
    rows = pec_sweep(
        plan,
        n_models=cfg.models,
        n_circuits=cfg.circuits,
        j_layers=cfg.j_layers,
        weights=cfg.weights,
        sigma=cfg.sigma,
        sigma_prime=cfg.sigma_prime,
        baseline=cfg.baseline,
        master_seed=cfg.seed,
    )
    os.makedirs(cfg.out, exist_ok=True)
    csv_path = os.path.join(cfg.out, "pec.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model_seed", "circuit_seed", "W", "O_c", "O_m"])
        for row in rows:
            writer.writerow([row["model_seed"], row["circuit_seed"], row["W"], row["O_c"], row["O_m"]])
    summary = summarize_pec(rows)
    summary["schema"] = "pec-summary/1"
    summary["config_digest"] = cfg.digest()
    _write_json(os.path.join(cfg.out, "pec_summary.json"), summary)
    for w, st in summary["by_weight"].items():
        print(
            f"W={w}: std(O_c)={st['std_O_c']:.4f} std(O_m)={st['std_O_m']:.4f} "
            f"ratio={st['std_O_m'] / st['std_O_c']:.3f}"
        )
    print(f"-> {csv_path}")
    return 0


REPRO_CONFIGS = {
    "fig5a": {
        "topology": "garnet20",
        "sigma": 1e-4,
        "baseline": "symmetry",
        "models": 200,
        "seed": 20240501,
        "schemes": ("open_chains", "closed_squares"),
    },
    "fig5b": {
        "topology": "garnet20",
        "layers": "open_chains",
        "sigma": 1e-4,
        "baseline": "unit_depth",
        "models": 100,
        "seed": 20240502,
        "sigma_prime_multipliers": (1, 3, 10, 30, 100),
    },
    "fig6": {
        "topology": "garnet20",
        "layers": "closed_squares",
        "sigma": 1e-4,
        "sigma_prime": 1e-2,
        "baseline": "unit_depth",
        "models": 200,
        "circuits": 10,
        "j_layers": 40,
        "weights": (2, 20),
        "seed": 20240503,
    },
}


def cmd_repro(figure: str, out: str, parallel: int, models: int | None = None) -> int:
    spec = REPRO_CONFIGS.get(figure)
    if spec is None:
        raise ConfigError(f"unknown figure {figure!r}; choose from {sorted(REPRO_CONFIGS)}")
    if models is not None:
        spec = dict(spec, models=models)
    os.makedirs(out, exist_ok=True)
    if figure == "fig5a":
        path = os.path.join(out, "fig5a.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["scheme", "seed", "delta_c", "delta_m", "r"])
            for scheme in spec["schemes"]:
                raw = {k: v for k, v in spec.items() if k != "schemes"}
                raw["layers"] = scheme
                raw["parallel"] = parallel
                cfg = parse_config(raw)
                plan = _plan(cfg)
                for i in range(cfg.models):
                    _, res = sweep_item(
                        plan, cfg.seed, i, cfg.sigma, 0.0, "symmetry"
                    )
                    writer.writerow([scheme, i, res.delta_c, res.delta_m, res.ratio])
        print(f"-> {path}")
        return 0
    if figure == "fig5b":
        path = os.path.join(out, "fig5b.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sigma_prime_over_sigma", "seed", "delta_c", "delta_m", "r"])
            raw = {k: v for k, v in spec.items() if k != "sigma_prime_multipliers"}
            cfg = parse_config(raw)
            plan = _plan(cfg)
            for mult in spec["sigma_prime_multipliers"]:
                for i in range(cfg.models):
                    _, res = sweep_item(
                        plan, cfg.seed + mult, i, cfg.sigma, mult * cfg.sigma, "unit_depth"
                    )
                    writer.writerow([mult, i, res.delta_c, res.delta_m, res.ratio])
        print(f"-> {path}")
        return 0
    cfg = parse_config(dict(spec, out=out, parallel=parallel))
    return cmd_pec(cfg)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cyclebench",
        description="Pauli noise characterization of Clifford gate layers",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("generate-model", "learnability", "characterize", "fit", "pec"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--parallel", type=int, default=None)
    p = sub.add_parser("repro")
    p.add_argument("figure", choices=sorted(REPRO_CONFIGS))
    p.add_argument("--out", default="out")
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--models", type=int, default=None, help="override sweep size")
    args = parser.parse_args(argv)
    try:
        if args.command == "repro":
            return cmd_repro(args.figure, args.out, args.parallel, args.models)
        overrides = {"seed": args.seed, "out": args.out, "parallel": args.parallel}
        cfg = load_config(args.config, overrides)
        handler = {
            "generate-model": cmd_generate_model,
            "learnability": cmd_learnability,
            "characterize": cmd_characterize,
            "fit": cmd_fit,
            "pec": cmd_pec,
        }[args.command]
        return handler(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RankDeficientError as exc:
        print(f"rank deficiency: {exc}", file=sys.stderr)
        return EXIT_RANK
    except (np.linalg.LinAlgError, RuntimeError, ZeroDivisionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
