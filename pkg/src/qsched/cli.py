"""Command-line experiment runner.

Every command is deterministic given its arguments and ``--seed``. Output
files carry one timestamp line (dropped with ``--no-timestamp``) so reruns
can be compared byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .dnl import DnlConfig, FilterError, VariantSet, aggregate, generate_variants, plain_mean
from .ising import IsingHamiltonian, diagonal_energies, qubo_to_ising
from .jssp import (
    SYNTHETIC_PRESETS,
    InstanceError,
    JsspInstance,
    ScheduleAssignment,
    SubInstance,
    build_full_instance,
    build_qubo,
    decode_bitstring,
    derive_sub_instance,
    edd_base,
    gantt,
    load_json,
    sub_instance_from_dict,
    synthetic_base,
    synthetic_master,
    synthetic_sub_instance,
)
from .oracle import BRUTE_FORCE_CAP, OracleResult, brute_force, simulated_annealing
from .qaoa import InitAngles, IterativeConfig, iterative_qaoa, linear_ramp, qaoa_state, run_qaoa
from .simulator import NoiseModel
from .varqite import DEFAULT_DAMPINGS, build_ansatz, run_varqite

TIMESTAMP_KEY = "generated_at"


class CliError(Exception):
    """A user-facing failure; the message names the violated precondition."""


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

class Output:
    def __init__(self, args):
        self.stamp = not args.no_timestamp
        self.out = Path(args.out) if args.out else None

    def _now(self) -> str:
        return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")

    def json_text(self, data: dict) -> str:
        if self.stamp:
            data = {TIMESTAMP_KEY: self._now(), **data}
        return json.dumps(data, indent=2) + "\n"

    def jsonl_text(self, records: list[dict]) -> str:
        lines = [json.dumps({TIMESTAMP_KEY: self._now()})] if self.stamp else []
        lines += [json.dumps(r) for r in records]
        return "\n".join(lines) + "\n"

    def csv_text(self, header: list[str], rows: list[list]) -> str:
        buf = io.StringIO()
        if self.stamp:
            buf.write(f"# {TIMESTAMP_KEY} {self._now()}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()

    def emit(self, text: str, path: Path | None = None) -> None:
        path = path or self.out
        if path is None:
            sys.stdout.write(text)
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)

    def report(self, text: str) -> None:
        """Human-readable summary: stdout when results go to a file, stderr otherwise."""
        print(text, file=sys.stdout if self.out else sys.stderr)


def read_jsonl(path: Path) -> list[dict]:
    out = []
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        if set(rec) != {TIMESTAMP_KEY}:
            out.append(rec)
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# Shared argument handling
# ---------------------------------------------------------------------------

def _parse_spec(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise CliError(f"free spec must be comma-separated integers, got {text!r}") from None


def _parse_var(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise CliError(f"variable must be m,j,t, got {text!r}")
    return tuple(int(p) for p in parts)


def _parse_grid(text: str, cast=float) -> list:
    """``a,b,c`` or ``start:stop:step`` (stop inclusive)."""
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise CliError("grid step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [round(start + k * step, 10) for k in range(n)]
    else:
        values = [float(v) for v in text.split(",") if v]
    if not values:
        raise CliError("grids must be nonempty")
    return [cast(v) for v in values]


def _load_base(path: str, instance: JsspInstance) -> ScheduleAssignment:
    data = load_json(path)
    if isinstance(data, dict) and "sequences" in data:
        return ScheduleAssignment.from_sequences(instance, data["sequences"])
    ones = data.get("base_assignment", data.get("ones")) if isinstance(data, dict) else data
    if ones is None:
        raise CliError(f"{path}: base file needs 'sequences', 'ones' or 'base_assignment'")
    return ScheduleAssignment.from_ones(instance, ones)


def _load_sub(args) -> SubInstance:
    if getattr(args, "synthetic", None) is not None:
        return synthetic_sub_instance(args.synthetic)
    if getattr(args, "sub", None):
        return sub_instance_from_dict(load_json(args.sub))
    raise CliError("pass a sub-instance with --sub FILE or --synthetic N")


def _load_oracle(args, h: IsingHamiltonian) -> OracleResult | None:
    if not getattr(args, "oracle", None):
        return None
    if args.oracle == "brute":
        return brute_force(h)
    return OracleResult.from_dict(load_json(args.oracle))


def _summary(sub: SubInstance, bits: str, energy: float, oracle: OracleResult | None, gs: float | None) -> str:
    assignment, feasible, cost = decode_bitstring(sub, bits)
    lines = [
        f"best bitstring {bits}  energy {energy:g}  schedule cost {cost}  feasible {feasible}",
        gantt(sub.base, assignment, sub.free_vars),
    ]
    if oracle is not None:
        lines.append(f"oracle ground energy {oracle.ground_energy:g}  ground-state probability {gs:.4f}")
    return "\n".join(lines)


def _noise(eps: float, n: int, seed: int) -> NoiseModel | None:
    if eps <= 0:
        return None
    # drawn from its own stream so the device does not depend on sampling order
    return NoiseModel.asymmetric(n, eps, np.random.default_rng([seed, 0x6E6F]))


def _problem(sub: SubInstance):
    h = qubo_to_ising(build_qubo(sub))
    return h, diagonal_energies(h)


# ---------------------------------------------------------------------------
# instance
# ---------------------------------------------------------------------------

def cmd_instance_build(args, out: Output) -> int:
    if args.synthetic:
        inst, base = synthetic_master(), synthetic_base()
    else:
        inst, base = build_full_instance(), None
    data = inst.to_dict()
    if base is not None:
        data["base_assignment"] = [list(v) for v in base.ones()]
    out.emit(out.json_text(data))
    out.report(f"instance: {inst.num_machines} machines, {inst.num_jobs} jobs, {inst.num_variables} variables")
    return 0


def cmd_instance_freeze(args, out: Output) -> int:
    spec = _parse_spec(args.spec)
    if any(a < b for a, b in zip(spec, spec[1:])):
        rule = " >= ".join(f"n{i + 1}" for i in range(len(spec)))
        raise CliError(f"ordering rule {rule} violated by free spec {args.spec}")
    if args.instance:
        data = load_json(args.instance)
        inst = JsspInstance.from_dict(data)
    elif args.synthetic:
        data, inst = {}, synthetic_master()
    else:
        data, inst = {}, build_full_instance()
    if args.base:
        base = _load_base(args.base, inst)
    elif "base_assignment" in data:
        base = ScheduleAssignment.from_ones(inst, data["base_assignment"])
    elif args.synthetic:
        base = synthetic_base()
    else:
        base = edd_base(inst)
        print("note: no --base given, using the earliest-due-date schedule as base", file=sys.stderr)
    sub = derive_sub_instance(inst, base, spec, [_parse_var(v) for v in args.refreeze])
    data = sub.to_dict()
    data["n_var"] = sub.n_var
    data["free_vars"] = [list(v) for v in sub.free_vars]
    out.emit(out.json_text(data))
    out.report(f"sub-instance with {sub.n_var} free variables")
    return 0


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def cmd_run_lr(args, out: Output) -> int:
    sub = _load_sub(args)
    h, energies = _problem(sub)
    oracle = _load_oracle(args, h)
    sched = linear_ramp(args.p, args.delta, args.delta_gamma)
    noise = _noise(args.noise_eps, h.num_qubits, args.seed)
    samples = run_qaoa(h, sched, None, "standard", args.shots, args.seed, noise, energies)
    bits, e = samples.best()
    gs = samples.probability_of_energy(oracle.ground_energy) if oracle else None
    record = {
        "algorithm": "lr-qaoa",
        "p": args.p,
        "delta_beta": args.delta,
        "delta_gamma": args.delta if args.delta_gamma is None else args.delta_gamma,
        "shots": args.shots,
        "seed": args.seed,
        "noise_eps": args.noise_eps,
        "best_bitstring": bits,
        "best_energy": e,
        "mean_energy": samples.mean_energy(),
        "ground_state_probability": gs,
        "samples": samples.to_dict(),
    }
    out.emit(out.jsonl_text([record]))
    out.report(_summary(sub, bits, e, oracle, gs))
    return 0


def _write_variants(path: Path, vs: VariantSet, out: Output) -> None:
    path.mkdir(parents=True, exist_ok=True)
    for k, d in enumerate(vs.to_dicts()):
        out.emit(out.json_text(d), path / f"variant_{k:03d}.json")


def cmd_run_iter(args, out: Output) -> int:
    sub = _load_sub(args)
    h, energies = _problem(sub)
    oracle = _load_oracle(args, h)
    cfg = IterativeConfig(
        p=args.p,
        delta=args.delta,
        n_iter=args.iters,
        beta_T_kind=args.beta_t,
        beta_T_min=args.beta_t_min,
        beta_T_max=args.beta_t_max,
        eta=args.eta,
        shots=args.shots,
        seed=args.seed,
        shot_weighted=args.shot_weighted,
        cumulative=args.cumulative,
    )
    noise = _noise(args.noise_eps, h.num_qubits, args.seed)
    records = iterative_qaoa(h, cfg, noise, oracle.ground_energy if oracle else None, energies)
    out.emit(out.jsonl_text([{"config": cfg.to_dict(), "noise_eps": args.noise_eps}]
                            + [r.to_dict(with_samples=not args.no_samples) for r in records]))
    last = records[-1]
    gs = last.ground_state_probability
    out.report(_summary(sub, last.best_bitstring, last.best_energy, oracle, gs))

    if args.variants_out:
        sched = linear_ramp(cfg.p, cfg.delta)
        init = InitAngles(last.init_angles) if last.init_angles is not None else None
        sv = qaoa_state(h, sched, init, "warm_start" if init else "standard", energies)
        per_variant = args.variant_shots or max(1, args.shots // args.v_max)
        vs = generate_variants(sv, args.v_max, per_variant, np.random.default_rng([args.seed, 0x646E]), noise, h)
        _write_variants(Path(args.variants_out), vs, out)
        out.report(f"wrote {args.v_max} variants of the final circuit ({per_variant} shots each)")
    return 0


def cmd_run_varqite(args, out: Output) -> int:
    sub = _load_sub(args)
    h, _ = _problem(sub)
    oracle = _load_oracle(args, h)
    ansatz = build_ansatz(h.num_qubits, args.layers)
    res = run_varqite(
        h,
        ansatz,
        n_steps=args.steps,
        d0=args.d0,
        r=args.r,
        reg=args.reg,
        shots_final=args.shots,
        seed=args.seed,
        dampings=tuple(args.dampings),
        safeguard=not args.no_safeguard,
        shots_per_eval=args.shots_per_eval,
    )
    records = [s.to_dict() for s in res.trajectory]
    final = {
        "final_energy": res.final_energy,
        "num_params": ansatz.num_params,
        "evaluations": res.evaluations,
        "evaluations_per_step": 2 * ansatz.num_params + 1,
        "trial_evaluations": res.trial_evaluations,
        "halvings": res.halvings,
        "theta": res.theta.tolist(),
    }
    gs = None
    if res.samples is not None:
        bits, e = res.samples.best()
        gs = res.samples.probability_of_energy(oracle.ground_energy) if oracle else None
        final.update(best_bitstring=bits, best_energy=e, ground_state_probability=gs, samples=res.samples.to_dict())
    out.emit(out.jsonl_text(records + [final]))
    msg = f"final <H> {res.final_energy:.6g} after {args.steps} steps, {res.evaluations} circuit evaluations"
    if res.samples is not None:
        msg += "\n" + _summary(sub, bits, e, oracle, gs)
    out.report(msg)
    return 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _sweep_point(task):
    h, energies, delta, p, shots, seed, ground = task
    samples = run_qaoa(h, linear_ramp(p, delta), None, "standard", shots, seed, None, energies)
    gs = samples.probability_of_energy(ground) if ground is not None else None
    return samples.mean_energy(), gs


def cmd_sweep(args, out: Output) -> int:
    sub = _load_sub(args)
    h, energies = _problem(sub)
    oracle = _load_oracle(args, h)
    ground = oracle.ground_energy if oracle else None
    deltas = _parse_grid(args.deltas)
    ps = _parse_grid(args.ps, int)
    grid = [(d, p) for d in deltas for p in ps]
    tasks = [(h, energies, d, p, args.shots, [args.seed, k], ground) for k, (d, p) in enumerate(grid)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_point, tasks, chunksize=8))
    else:
        results = [_sweep_point(t) for t in tasks]
    top = max(m for m, _ in results)
    if top <= 0:
        raise CliError("normalisation needs a positive maximum mean energy")
    rows = [
        [_fmt(d), p, _fmt(m), _fmt(m / top), "" if g is None else _fmt(g)]
        for (d, p), (m, g) in zip(grid, results)
    ]
    out.emit(out.csv_text(["delta", "p", "mean_energy", "normalized_energy", "gs_prob"], rows))
    out.report(f"swept {len(grid)} grid points")
    return 0


# ---------------------------------------------------------------------------
# mitigate
# ---------------------------------------------------------------------------

def load_variants(path: Path) -> VariantSet:
    if not path.exists():
        raise CliError(f"variant path {path} does not exist")
    if path.is_dir():
        files = sorted(path.glob("*.json"))
        if not files:
            raise CliError(f"no variant files (*.json) in {path}")
        items = [load_json(f) for f in files]
    else:
        items = read_jsonl(path)
    return VariantSet.from_dicts(items)


def cmd_mitigate(args, out: Output) -> int:
    vs = load_variants(Path(args.variants))
    cfg = DnlConfig(alpha=args.alpha, v_th=args.v_th, v_max=vs.v_max)
    try:
        mitigated = aggregate(vs, cfg)
    except FilterError as exc:
        raise CliError(str(exc)) from None
    total = sum(v.samples.total_shots for v in vs.variants)
    keys = sorted(mitigated)
    data = {
        "alpha": cfg.alpha,
        "v_th": cfg.v_th,
        "v_max": cfg.v_max,
        "counts_equivalent": {b: mitigated[b] * total for b in keys},
        "probabilities": {b: mitigated[b] for b in keys},
    }
    if args.oracle:
        oracle = OracleResult.from_dict(load_json(args.oracle))
        raw = plain_mean(vs)
        data["raw_ground_state_probability"] = sum(raw.get(b, 0.0) for b in oracle.ground_states)
        data["mitigated_ground_state_probability"] = sum(mitigated.get(b, 0.0) for b in oracle.ground_states)
        out.report(
            f"ground-state probability raw {data['raw_ground_state_probability']:.4f}"
            f" -> mitigated {data['mitigated_ground_state_probability']:.4f}"
        )
    out.emit(out.json_text(data))
    return 0


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------

def cmd_oracle_brute(args, out: Output) -> int:
    sub = _load_sub(args)
    h = qubo_to_ising(build_qubo(sub))
    if h.num_qubits > BRUTE_FORCE_CAP:
        raise CliError(f"{h.num_qubits} variables exceeds the brute-force cap of {BRUTE_FORCE_CAP}; use 'oracle sa'")
    res = brute_force(h, k=args.levels)
    out.emit(out.json_text(res.to_dict()))
    out.report(f"ground energy {res.ground_energy:g} with degeneracy {len(res.ground_states)}")
    return 0


def cmd_oracle_sa(args, out: Output) -> int:
    sub = _load_sub(args)
    q = build_qubo(sub)
    bits, e = simulated_annealing(q, sweeps=args.sweeps, restarts=args.restarts, seed=args.seed)
    _, feasible, cost = decode_bitstring(sub, bits)
    out.emit(out.json_text({"best_bitstring": bits, "best_energy": e, "feasible": feasible, "schedule_cost": cost}))
    out.report(f"simulated annealing best energy {e:g} (feasible {feasible})")
    return 0


# ---------------------------------------------------------------------------
# repro
# ---------------------------------------------------------------------------

def cmd_repro(args, out: Output) -> int:
    """Chain the experiments into one output directory."""
    if out.out is None:
        raise CliError("repro needs --out DIR")
    root = out.out
    root.mkdir(parents=True, exist_ok=True)
    quick = args.quick
    seed = args.seed
    flags = ["--seed", str(seed)] + (["--no-timestamp"] if not out.stamp else [])

    def step(name: str, argv: list[str]) -> None:
        rc = main(flags + ["--out", str(root / name)] + argv, quiet=True)
        if rc != 0:
            raise CliError(f"repro step {name} failed with exit code {rc}")

    big, small = ("16", "12") if not quick else ("9", "6")
    step("master.json", ["instance", "build", "--synthetic"])
    preset = synthetic_sub_instance(int(big))
    refreeze = [a for v in preset.refrozen for a in ("--refreeze", ",".join(map(str, v)))]
    step(f"sub_{big}.json", ["instance", "freeze", "--synthetic", "--spec", ",".join(map(str, preset.free_spec))] + refreeze)
    step(f"oracle_{big}.json", ["oracle", "brute", "--synthetic", big])
    step(f"oracle_{small}.json", ["oracle", "brute", "--synthetic", small])
    step(f"sa_{big}.json", ["oracle", "sa", "--synthetic", big])
    shots = "4000" if not quick else "500"
    step(f"lr_qaoa_{big}.jsonl", ["run", "lr-qaoa", "--synthetic", big, "--p", "4", "--delta", "0.17",
                                 "--shots", shots, "--oracle", str(root / f"oracle_{big}.json")])
    step(f"iter_qaoa_{big}.jsonl", ["run", "iter-qaoa", "--synthetic", big, "--p", "4", "--delta", "0.17",
                                   "--iters", "10" if not quick else "3", "--shots", shots,
                                   "--oracle", str(root / f"oracle_{big}.json"),
                                   "--noise-eps", "0.02", "--variants-out", str(root / "variants")])
    step("mitigated.json", ["mitigate", "--variants", str(root / "variants"),
                            "--oracle", str(root / f"oracle_{big}.json")])
    step(f"varqite_{small}.jsonl", ["run", "varqite", "--synthetic", small,
                                    "--steps", "65" if not quick else "10", "--shots", shots])
    grid = ["--deltas", "0.05:1.5:0.05", "--ps", "2:30:1"] if not quick else ["--deltas", "0.1,0.2,0.4", "--ps", "2,4"]
    step(f"sweep_{small}.csv", ["sweep", "--synthetic", small, "--shots", shots,
                                "--oracle", str(root / f"oracle_{small}.json")] + grid)
    out.report(f"repro outputs written to {root}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_sub_source(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--sub", help="sub-instance JSON written by 'instance freeze'")
    g.add_argument("--synthetic", type=int, choices=sorted(SYNTHETIC_PRESETS),
                   help="built-in synthetic sub-instance with this many variables")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsched", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=0, help="master random seed (default 0)")
    parser.add_argument("--out", help="output file (directory for repro); stdout when omitted")
    parser.add_argument("--qubit-cap", type=int, help="statevector qubit cap (overrides QSCHED_QUBIT_CAP)")
    parser.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header line")
    sub = parser.add_subparsers(dest="command", required=True)

    inst = sub.add_parser("instance", help="build or freeze instances").add_subparsers(dest="action", required=True)
    b = inst.add_parser("build", help="write a master instance")
    g = b.add_mutually_exclusive_group()
    g.add_argument("--paper-full", action="store_true", help="20-job, 3-machine instance (default)")
    g.add_argument("--synthetic", action="store_true", help="5-job synthetic master with its certified optimum")
    b.set_defaults(func=cmd_instance_build)
    f = inst.add_parser("freeze", help="derive a sub-instance by freeing trailing slots")
    f.add_argument("--spec", required=True, help="free slots per machine, e.g. 4,2,2")
    f.add_argument("--instance", help="master instance JSON (default: the 20-job instance)")
    f.add_argument("--synthetic", action="store_true", help="use the synthetic master and its optimum as base")
    f.add_argument("--base", help="base schedule JSON: {'sequences': ...}, {'ones': ...} or a list of [m,j,t]")
    f.add_argument("--refreeze", action="append", default=[], metavar="M,J,T",
                   help="freeze this zero-valued free variable (repeatable)")
    f.set_defaults(func=cmd_instance_freeze)

    run = sub.add_parser("run", help="run an algorithm").add_subparsers(dest="algorithm", required=True)
    lr = run.add_parser("lr-qaoa", help="single linear-ramp QAOA circuit")
    _add_sub_source(lr)
    lr.add_argument("--p", type=int, default=4)
    lr.add_argument("--delta", type=float, default=0.17, help="ramp slope for beta (and gamma)")
    lr.add_argument("--delta-gamma", type=float, help="separate ramp slope for gamma")
    lr.add_argument("--shots", type=int, default=4000)
    lr.add_argument("--noise-eps", type=float, default=0.0, help="asymmetric readout flip rate")
    lr.add_argument("--oracle", help="oracle JSON, or 'brute' to enumerate")
    lr.set_defaults(func=cmd_run_lr)

    it = run.add_parser("iter-qaoa", help="iterative warm-start QAOA")
    _add_sub_source(it)
    it.add_argument("--p", type=int, default=4)
    it.add_argument("--delta", type=float, default=0.17)
    it.add_argument("--iters", type=int, default=10)
    it.add_argument("--beta-t", choices=["quadratic", "constant"], default="quadratic")
    it.add_argument("--beta-t-min", type=float, default=0.1)
    it.add_argument("--beta-t-max", type=float, default=1.0)
    it.add_argument("--eta", type=int, choices=[1, -1], default=1)
    it.add_argument("--shots", type=int, default=4000)
    it.add_argument("--shot-weighted", action="store_true", help="weight bitstrings by shot count in the bias")
    it.add_argument("--cumulative", action="store_true", help="feed back all samples so far, not just the last")
    it.add_argument("--noise-eps", type=float, default=0.0)
    it.add_argument("--oracle", help="oracle JSON, or 'brute' to enumerate")
    it.add_argument("--no-samples", action="store_true", help="omit per-iteration sample sets")
    it.add_argument("--variants-out", help="directory for DNL variants of the final circuit")
    it.add_argument("--v-max", type=int, default=25)
    it.add_argument("--variant-shots", type=int, help="shots per variant (default: shots / v_max)")
    it.set_defaults(func=cmd_run_iter)

    vq = run.add_parser("varqite", help="variational imaginary-time evolution")
    _add_sub_source(vq)
    vq.add_argument("--steps", type=int, default=65)
    vq.add_argument("--d0", type=float, default=0.1)
    vq.add_argument("--r", type=float, default=0.06)
    vq.add_argument("--layers", type=int, default=2)
    vq.add_argument("--reg", type=float, default=1e-8, help="relative singular-value cutoff")
    vq.add_argument("--dampings", type=float, nargs="+", default=list(DEFAULT_DAMPINGS),
                    help="relative Tikhonov damping values tried per step (first one only with --no-safeguard)")
    vq.add_argument("--no-safeguard", action="store_true", help="plain Euler steps, no descent check")
    vq.add_argument("--shots-per-eval", type=int, default=0, help="estimate expectations from samples")
    vq.add_argument("--shots", type=int, default=4000, help="final-state samples")
    vq.add_argument("--oracle", help="oracle JSON, or 'brute' to enumerate")
    vq.set_defaults(func=cmd_run_varqite)

    sw = sub.add_parser("sweep", help="linear-ramp landscape over (delta, p)")
    _add_sub_source(sw)
    sw.add_argument("--deltas", default="0.05:1.5:0.05", help="list a,b,c or range start:stop:step")
    sw.add_argument("--ps", default="2:30:1")
    sw.add_argument("--shots", type=int, default=4000)
    sw.add_argument("--oracle", help="oracle JSON, or 'brute' to enumerate")
    sw.add_argument("--workers", type=int, default=1, help="worker processes")
    sw.set_defaults(func=cmd_sweep)

    mi = sub.add_parser("mitigate", help="aggregate DNL variants")
    mi.add_argument("--variants", required=True, help="directory of variant JSON files or a JSONL file")
    mi.add_argument("--alpha", type=float, default=4.0)
    mi.add_argument("--v-th", type=int, default=2)
    mi.add_argument("--oracle", help="oracle JSON for ground-state bookkeeping")
    mi.set_defaults(func=cmd_mitigate)

    orc = sub.add_parser("oracle", help="classical reference solvers").add_subparsers(dest="solver", required=True)
    bf = orc.add_parser("brute", help="exhaustive ground state and low spectrum")
    _add_sub_source(bf)
    bf.add_argument("--levels", type=int, default=10)
    bf.set_defaults(func=cmd_oracle_brute)
    sa = orc.add_parser("sa", help="simulated annealing")
    _add_sub_source(sa)
    sa.add_argument("--sweeps", type=int, default=100)
    sa.add_argument("--restarts", type=int, default=32)
    sa.set_defaults(func=cmd_oracle_sa)

    rp = sub.add_parser("repro", help="run the experiment chain into --out DIR")
    rp.add_argument("--quick", action="store_true", help="small instances and grids")
    rp.set_defaults(func=cmd_repro)
    return parser


def main(argv: list[str] | None = None, quiet: bool = False) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    saved_cap = os.environ.get("QSCHED_QUBIT_CAP")
    if args.qubit_cap is not None:
        os.environ["QSCHED_QUBIT_CAP"] = str(args.qubit_cap)
    out = Output(args)
    saved_stdout = sys.stdout
    try:
        if quiet and out.out:
            sys.stdout = open(os.devnull, "w")
        return args.func(args, out)
    except (CliError, InstanceError, FilterError, ValueError, OSError) as exc:
        print(f"qsched: error: {exc}", file=sys.stderr)
        return 2
    finally:
        if sys.stdout is not saved_stdout:
            sys.stdout.close()
            sys.stdout = saved_stdout
        # the cap flag applies to this invocation only
        if saved_cap is None:
            os.environ.pop("QSCHED_QUBIT_CAP", None)
        else:
            os.environ["QSCHED_QUBIT_CAP"] = saved_cap

if __name__ == "__main__":
    sys.exit(main())
