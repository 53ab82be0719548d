"""Command-line entry point wiring all modules together.

Every run is deterministic given (argv, config, seed); the resolved
configuration, including defaulted unit energies, is embedded in each
output artifact.  Structured reports are JSON, tabular data is CSV, and
histograms can optionally be rendered to SVG.

Exit codes: 0 ok, 2 usage, 3 config, 4 verification failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .attention import attention_pipeline, attention_reference
from .conversion import derive_snn_config, verify_equivalence, zero_centered_i_max
from .crossbar import MsuConfig, reference_readout, tiled_vmm
from .energy import (
    MODES,
    EnergyParams,
    TransformerBlockShape,
    area_estimate,
    block_energy,
    scenario_compare,
)
from .qnn import QnnLayer, QuantParams
from .spike import SYMMETRIC, ASYMMETRIC, SnnLayerConfig, decode_spike, encode_integer
from .stats import (
    ActivationSampler,
    REFERENCE_SILENCE_PCT,
    calibrate_gaussian_sigma,
    encode_samples,
    histogram_svg,
    sparsity_sweep,
    spike_time_histogram,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_VERIFY_FAILED = 4


class ConfigError(Exception):
    """Malformed or inconsistent run configuration."""


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_doc(invocation: dict, result) -> str:
    return json.dumps({"invocation": invocation, "result": result}, indent=2, sort_keys=True) + "\n"


def _csv_text(header_lines: list[str], columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def _load_json_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


def _spike_config(args) -> SnnLayerConfig:
    if getattr(args, "baseline", False):
        # unmasked reference encoding; the floor-code spike maps to silence
        return SnnLayerConfig(
            n=args.bits, alpha=args.alpha, mode=args.mode, baseline_silent_min=True
        )
    p = QuantParams(n=args.bits, alpha=args.alpha, mode=args.mode)
    i_max = args.imax if args.imax is not None else zero_centered_i_max(p)
    return SnnLayerConfig(n=args.bits, alpha=args.alpha, mode=args.mode, i_max=i_max, k=args.k)


def _silence_convention(cfg: SnnLayerConfig) -> str:
    return f"mu={cfg.mu}" if cfg.masked else "minimum code"


def _add_quant_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--bits", type=int, default=4, help="code bit width n (window T = 2^n)")
    sub.add_argument("--alpha", type=float, default=1.0, help="quantization scale")
    sub.add_argument(
        "--mode", choices=[SYMMETRIC, ASYMMETRIC], default=SYMMETRIC, help="quantization mode"
    )
    sub.add_argument("--imax", type=int, default=None, help="masked firing time (default: mu=0)")
    sub.add_argument("--k", type=int, default=0, help="dead-zone radius")


def _cmd_verify(args) -> int:
    if args.weights.startswith("random:"):
        p = QuantParams(n=args.bits, alpha=args.alpha, mode=args.mode)
        i_max = args.imax if args.imax is not None else zero_centered_i_max(p)
        cfg = derive_snn_config(p, i_max, args.k)
        seed = int(args.weights.split(":", 1)[1])
        rng = np.random.default_rng(seed)
        layer = QnnLayer(
            weights=rng.choice([-1.0, 1.0], size=(args.fan_in, args.fan_out)),
            bias=np.zeros(args.fan_out),
            in_params=p,
            out_params=p,
            mu=cfg.mu,
            k=args.k,
        )
    else:
        doc = _load_json_file(args.weights)
        try:
            layer = QnnLayer.from_json(json.dumps(doc))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad layer descriptor {args.weights}: {exc}") from exc
        p = layer.out_params
        i_max = p.code_max - layer.mu
        cfg = derive_snn_config(p, i_max, layer.k)

    if args.exhaustive:
        report = verify_equivalence(layer, cfg, domain="exhaustive")
        domain = "exhaustive"
    else:
        report = verify_equivalence(layer, cfg, domain="sampled", samples=args.samples, seed=args.seed)
        domain = f"sampled:{args.samples}"

    invocation = {
        "subcommand": "verify",
        "bits": layer.out_params.n,
        "alpha": layer.out_params.alpha,
        "mode": layer.out_params.mode,
        "i_max": i_max,
        "k": layer.k,
        "weights": args.weights,
        "domain": domain,
        "seed": args.seed,
    }
    doc = report.to_dict()
    doc["mismatches"] = doc["mismatches"][:50]  # keep artifacts bounded
    _emit(_json_doc(invocation, doc), args.out)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def _cmd_encode(args) -> int:
    cfg = _spike_config(args)
    codes = [int(tok) for tok in args.codes.split(",") if tok.strip()]
    trains = [encode_integer(q, cfg) for q in codes]
    result = [
        {
            "code": q,
            "spike_time": tr.time,
            "bits": tr.to_list(),
            "decoded": decode_spike(tr, cfg),
        }
        for q, tr in zip(codes, trains)
    ]
    invocation = {
        "subcommand": "encode",
        "bits": args.bits,
        "alpha": args.alpha,
        "mode": args.mode,
        "i_max": cfg.i_max,
        "k": args.k,
    }
    _emit(_json_doc(invocation, result), args.out)
    return EXIT_OK


def _cmd_xbar(args) -> int:
    invocation = {"subcommand": "xbar", "seed": args.seed}
    if args.replay:
        invocation["replay"] = args.replay
        _emit(_json_doc(invocation, reference_readout()), args.out)
        return EXIT_OK
    rng = np.random.default_rng(args.seed)
    cfg = MsuConfig(input_bits=args.bits)
    failures = 0
    max_dim = 0
    for _ in range(args.fuzz):
        c_i = int(rng.integers(1, 40))
        c_o = int(rng.integers(1, 40))
        w = rng.choice([-1.0, 1.0], size=(c_i, c_o))
        x = rng.integers(0, 2**args.bits, size=c_i)
        got = tiled_vmm(x, w, cfg)
        want = x @ w.astype(np.int64)
        if not np.array_equal(got, want):
            failures += 1
        max_dim = max(max_dim, c_i, c_o)
    invocation.update({"fuzz": args.fuzz, "bits": args.bits})
    result = {"cases": args.fuzz, "failures": failures, "max_dim": max_dim}
    _emit(_json_doc(invocation, result), args.out)
    return EXIT_OK if failures == 0 else EXIT_VERIFY_FAILED


def _cmd_attn(args) -> int:
    cfg = _spike_config(args)
    rng = np.random.default_rng(args.seed)
    mismatches = 0
    for _ in range(args.samples):
        q = rng.integers(cfg.code_min, cfg.code_max + 1, size=(args.tokens, args.dk))
        k = rng.integers(cfg.code_min, cfg.code_max + 1, size=(args.tokens, args.dk))
        v = rng.integers(cfg.code_min, cfg.code_max + 1, size=(args.tokens, args.dk))
        q_trains = [[encode_integer(int(c), cfg) for c in row] for row in q]
        got = attention_pipeline(q_trains, k, v, cfg)
        want = attention_reference(q, k, v, cfg)
        if not np.array_equal(got, want):
            mismatches += 1
    invocation = {
        "subcommand": "attn",
        "tokens": args.tokens,
        "dk": args.dk,
        "bits": args.bits,
        "mode": args.mode,
        "i_max": cfg.i_max,
        "k": args.k,
        "samples": args.samples,
        "seed": args.seed,
    }
    result = {"cases": args.samples, "mismatches": mismatches}
    _emit(_json_doc(invocation, result), args.out)
    return EXIT_OK if mismatches == 0 else EXIT_VERIFY_FAILED


def _energy_params(args) -> EnergyParams:
    if not args.params:
        return EnergyParams()
    try:
        return EnergyParams(**_load_json_file(args.params))
    except TypeError as exc:
        raise ConfigError(f"bad unit-energy override in {args.params}: {exc}") from exc


def _cmd_energy(args) -> int:
    params = _energy_params(args)
    if args.shape:
        try:
            block = TransformerBlockShape(**_load_json_file(args.shape))
        except TypeError as exc:
            raise ConfigError(f"bad block shape in {args.shape}: {exc}") from exc
    else:
        block = TransformerBlockShape()
    rates = _load_json_file(args.rates) if args.rates else None
    try:
        report = block_energy(block, args.mode, rates=rates, params=params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    invocation = {"subcommand": "energy", "mode": args.mode}
    if args.format == "json":
        _emit(_json_doc(invocation, report.to_dict()), args.out)
    else:
        rows = [[name, f"{val:.6e}"] for name, val in report.categories.items()]
        rows.append(["total", f"{report.total_j:.6e}"])
        header = [
            f"block_energy mode={args.mode} total_mj={report.total_mj:.3f}",
            f"rates={json.dumps(report.assumptions['rates'], sort_keys=True)}",
            f"unit_energies_pj={json.dumps(report.assumptions['unit_energies_pj'], sort_keys=True)}",
        ]
        _emit(_csv_text(header, ["category", "joules"], rows), args.out)
    return EXIT_OK


def _cmd_scenario(args) -> int:
    params = _energy_params(args)
    rows = scenario_compare(params=params)
    if args.format == "json":
        _emit(_json_doc({"subcommand": "scenario"}, [r.to_dict() for r in rows]), args.out)
    else:
        table = [
            [
                r.name,
                r.time_steps,
                f"{r.s_r:.4f}",
                f"{r.total_mj:.3f}",
                f"{r.shares['compute']:.2f}",
                f"{r.shares['spike_movement']:.2f}",
                f"{r.shares['weight_access']:.2f}",
                f"{r.shares['other']:.2f}",
            ]
            for r in rows
        ]
        header = ["scenario comparison at block scale; shares in percent"]
        columns = ["name", "T", "s_r", "total_mJ", "compute", "spike_movement", "weight_access", "other"]
        _emit(_csv_text(header, columns, table), args.out)
    return EXIT_OK


def _cmd_area(args) -> int:
    est = area_estimate()
    _emit(_json_doc({"subcommand": "area"}, est.to_dict()), args.out)
    return EXIT_OK


def _sampler_from_args(args) -> ActivationSampler:
    return ActivationSampler(kind=args.dist, loc=args.loc, scale=args.scale, seed=args.seed)


def _cmd_stats(args) -> int:
    cfg = _spike_config(args)
    if args.calibrate is not None:
        sigma = calibrate_gaussian_sigma(args.calibrate, cfg, loc=args.loc)
        sampler = ActivationSampler(kind="gaussian", loc=args.loc, scale=sigma, seed=args.seed)
    else:
        sampler = _sampler_from_args(args)
    trains = encode_samples(sampler.sample(args.count), cfg)
    hist = spike_time_histogram(trains)
    header = [
        f"spike-time histogram over {args.count} samples",
        f"sampler={sampler.kind} loc={sampler.loc} scale={sampler.scale} seed={sampler.seed}",
        f"bits={args.bits} alpha={args.alpha} mode={args.mode} i_max={cfg.i_max} k={cfg.k}",
        f"silent decodes to {_silence_convention(cfg)}",
        f"silence_fraction={hist.silence_fraction:.6f}",
    ]
    rows = [[label, count] for label, count in hist.to_rows()]
    _emit(_csv_text(header, ["t", "count"], rows), args.out)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(histogram_svg(hist))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _spike_config(args)
    if args.calibrate is not None:
        sigma = calibrate_gaussian_sigma(args.calibrate, replace(cfg, k=0), loc=args.loc)
        sampler = ActivationSampler(kind="gaussian", loc=args.loc, scale=sigma, seed=args.seed)
    else:
        sampler = _sampler_from_args(args)
    ks = list(range(0, args.kmax + 1))
    rows = sparsity_sweep(sampler, cfg, ks, count=args.count)
    header = [
        f"dead-zone sparsity sweep over {args.count} samples",
        f"sampler={sampler.kind} loc={sampler.loc} scale={sampler.scale} seed={sampler.seed}",
        f"bits={args.bits} alpha={args.alpha} mode={args.mode} i_max={cfg.i_max}",
        f"silent decodes to {_silence_convention(cfg)}",
        f"reference_silence_pct={json.dumps(REFERENCE_SILENCE_PCT, sort_keys=True)}",
    ]
    table = [
        [
            r.k,
            f"{r.silence:.6f}",
            f"{r.mean_spike_rate:.6f}",
            f"{REFERENCE_SILENCE_PCT.get(r.k, '')}",
        ]
        for r in rows
    ]
    _emit(_csv_text(header, ["k", "silence", "mean_spike_rate", "reference_silence_pct"], table), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matterhorn",
        description="Spiking-transformer encoding, crossbar and energy toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_verify = sub.add_parser("verify", help="check quantized/spiking layer equivalence")
    _add_quant_flags(p_verify)
    p_verify.add_argument("--weights", default="random:0", help="layer JSON file or random:SEED")
    p_verify.add_argument("--fan-in", type=int, default=4)
    p_verify.add_argument("--fan-out", type=int, default=4)
    group = p_verify.add_mutually_exclusive_group()
    group.add_argument("--exhaustive", action="store_true", help="all input code vectors")
    group.add_argument("--samples", type=int, default=100_000, help="sampled pre-activations")
    p_verify.set_defaults(func=_cmd_verify)

    p_encode = sub.add_parser("encode", help="encode integer codes as spike trains")
    _add_quant_flags(p_encode)
    p_encode.add_argument("--codes", required=True, help="comma-separated integer codes")
    p_encode.set_defaults(func=_cmd_encode)

    p_xbar = sub.add_parser("xbar", help="crossbar read-out replay and VMM fuzzing")
    p_xbar.add_argument("--replay", choices=["reference"], help="replay the documented read-out")
    p_xbar.add_argument("--fuzz", type=int, default=100, help="random VMM instances")
    p_xbar.add_argument("--bits", type=int, default=4, help="input bit budget")
    p_xbar.set_defaults(func=_cmd_xbar)

    p_attn = sub.add_parser("attn", help="time-based attention vs integer reference")
    _add_quant_flags(p_attn)
    p_attn.add_argument("--tokens", type=int, default=4)
    p_attn.add_argument("--dk", type=int, default=4)
    p_attn.add_argument("--samples", type=int, default=20)
    p_attn.set_defaults(func=_cmd_attn)

    p_energy = sub.add_parser("energy", help="block energy for one operating mode")
    p_energy.add_argument("--mode", choices=list(MODES), default="baseline")
    p_energy.add_argument("--shape", help="JSON file overriding the block shape")
    p_energy.add_argument("--params", help="JSON file overriding unit energies")
    p_energy.add_argument("--rates", help="JSON file of per-component spike rates")
    p_energy.add_argument("--format", choices=["json", "csv"], default="json")
    p_energy.set_defaults(func=_cmd_energy)

    p_scen = sub.add_parser("scenario", help="published spiking-transformer comparison points")
    p_scen.add_argument("--params", help="JSON file overriding unit energies")
    p_scen.add_argument("--format", choices=["json", "csv"], default="csv")
    p_scen.set_defaults(func=_cmd_scenario)

    p_area = sub.add_parser("area", help="macro count and silicon area per block/model")
    p_area.set_defaults(func=_cmd_area)

    p_stats = sub.add_parser("stats", help="spike-time histogram of synthetic activations")
    _add_quant_flags(p_stats)
    p_stats.add_argument("--dist", choices=["gaussian", "laplace"], default="gaussian")
    p_stats.add_argument("--loc", type=float, default=0.0)
    p_stats.add_argument("--scale", type=float, default=1.0)
    p_stats.add_argument("--count", type=int, default=20_000)
    p_stats.add_argument("--calibrate", type=float, default=None, help="target silence at this k")
    p_stats.add_argument(
        "--baseline",
        action="store_true",
        help="unmasked reference encoding (floor-code spike counts as silence)",
    )
    p_stats.add_argument("--svg", help="also render an SVG bar chart to this path")
    p_stats.set_defaults(func=_cmd_stats)

    p_sweep = sub.add_parser("sweep", help="silence vs dead-zone radius table")
    _add_quant_flags(p_sweep)
    p_sweep.add_argument("--dist", choices=["gaussian", "laplace"], default="gaussian")
    p_sweep.add_argument("--loc", type=float, default=0.0)
    p_sweep.add_argument("--scale", type=float, default=1.0)
    p_sweep.add_argument("--count", type=int, default=20_000)
    p_sweep.add_argument("--calibrate", type=float, default=None, help="target silence at k=0")
    p_sweep.add_argument("--kmax", type=int, default=3)
    p_sweep.set_defaults(func=_cmd_sweep)

    for p in (p_verify, p_encode, p_xbar, p_attn, p_energy, p_scen, p_area, p_stats, p_sweep):
        p.add_argument("--seed", type=int, default=0, help="RNG seed (MATTERHORN_SEED overrides)")
        p.add_argument("--out", help="write the artifact to this path instead of stdout")

    return parser


def dispatch(argv: list[str] | None = None) -> int:
    """Parse argv and run the chosen subcommand; returns the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        env_seed = os.environ.get("MATTERHORN_SEED")
        if env_seed is not None and hasattr(args, "seed"):
            try:
                args.seed = int(env_seed)
            except ValueError as exc:
                raise ConfigError(
                    f"MATTERHORN_SEED must be an integer, got {env_seed!r}"
                ) from exc
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(json.dumps({"error": "config", "detail": str(exc)}) + "\n")
        return EXIT_CONFIG
    except ValueError as exc:
        sys.stderr.write(json.dumps({"error": "config", "detail": str(exc)}) + "\n")
        return EXIT_CONFIG


def main(argv: list[str] | None = None) -> int:
    return dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
