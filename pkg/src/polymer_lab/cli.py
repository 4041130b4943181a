"""Command-line entry point: ``polymer-lab <command> [--config FILE] [flags]``.

Every report embeds the fully resolved run config, so feeding a report
back through ``--config`` repeats the run exactly. Wall-clock metadata goes
to a sidecar ``<out>.meta.json`` and never into the report itself.

Exit codes: 0 ok, 2 bad config or input, 3 invalid model, 4 budget
exceeded (partial report written), 5 operation not applicable to the input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone

from . import __version__
from .decompose import (crossing_profile, diamond_times, hw_decompose, irreducible_pieces, is_bridge,
                        is_irreducible, renewal_sandwich, renewal_times, width, zigzags)
from .enumeration import DEFAULT_BUDGET, default_threads, run_plan, shard_enumeration
from .errors import BudgetExceeded, ModelError, PolymerLabError
from .montecarlo import (RNG_ALGORITHM, IbProcessConfig, SamplerConfig, ballistic_scan,
                         diamond_density_estimate, exact_sample_codes, mcmc_sample, piece_law,
                         simulate_ib_process, verify_conditional_identity)
from .serialize import (ENUM_COLUMNS, ConfigError, dumps, enumeration_result, enumeration_rows,
                        model_from_dict, parse_walk, table_csv)
from .transform import surgery

EXIT_CONFIG, EXIT_MODEL, EXIT_BUDGET, EXIT_OPERATION = 2, 3, 4, 5

COMMANDS = ("enumerate", "decompose", "transform", "sample", "ballistic", "ibprocess", "verify")

# command -> {param: default}; flags with the same name (dashes for underscores) override
DEFAULTS = {
    "enumerate": {"N": 8, "prefix_depth": None},
    "decompose": {"walk": None},
    "transform": {"walk": None, "op": "unfold", "sites": None, "check": True},
    "sample": {"mode": "exact", "n": 4, "count": 1000, "chains": 4, "sweeps": 10000, "burn_in": 1000,
               "p_pivot": 0.5},
    "ballistic": {"schedule": [4, 5, 6, 7, 8], "v_grid": [0.25, 0.5, 0.75, 1.0], "mode": "auto",
                  "chains": 4, "sweeps": 10000, "burn_in": 1000, "p_pivot": 0.5},
    "ibprocess": {"L": 8, "lam": None, "pieces": 1000, "window": 50, "include_walk": False},
    "verify": {"n": [1, 2, 3, 4]},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def _int_list(s: str) -> list[int]:
    return [int(v) for v in s.replace(",", " ").split()]


def _float_list(s: str) -> list[float]:
    return [float(v) for v in s.replace(",", " ").split()]


def _json_arg(s: str):
    try:
        return json.loads(s)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"not valid JSON: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polymer-lab", description="Self-repelling polymer enumeration and sampling.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    g = common.add_argument_group("run")
    g.add_argument("--config", help="JSON config file, or a previous report (its embedded config is used)")
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--format", choices=("json", "csv"))
    g.add_argument("--threads", type=int, help="worker threads (default: $POLYMER_LAB_THREADS or all cores)")
    g.add_argument("--seed", type=int)
    g.add_argument("--budget", type=int, help="enumeration node budget")
    m = common.add_argument_group("model")
    m.add_argument("--phi", choices=("free", "saw", "weak", "table"))
    m.add_argument("--k", type=float, help="strength of the weak potential")
    m.add_argument("--cap", type=int)
    m.add_argument("--phi-values", type=_json_arg, help="JSON list for a table potential (null = infinity)")
    m.add_argument("--dimension", type=int)
    m.add_argument("--steps", type=_json_arg, help='JSON list of steps, e.g. "[[1,0],[-1,0],[0,1],[0,-1]]"')
    m.add_argument("--rho", type=_json_arg, help='JSON list of step probabilities; strings like "1/4" stay exact')

    c = sub.add_parser("enumerate", parents=[common], help="exact weighted sums per length")
    c.add_argument("--N", type=int)
    c.add_argument("--prefix-depth", type=int)

    c = sub.add_parser("decompose", parents=[common], help="renewals, zigzags, crossings, bridge decomposition")
    c.add_argument("--walk", help="JSON point list or compass string (E/W/N/S)")

    c = sub.add_parser("transform", parents=[common], help="unfold a zigzag or stickbreak between diamonds")
    c.add_argument("--walk")
    c.add_argument("--op", choices=("unfold", "stickbreak"))
    c.add_argument("--sites", type=_int_list, help="two indices, e.g. 3,5")
    c.add_argument("--no-check", dest="check", action="store_false", default=None)

    for name, hlp in (("sample", "draw walks exactly or run the Metropolis chain"),
                      ("ballistic", "mean displacement and ballistic tails along a schedule")):
        c = sub.add_parser(name, parents=[common], help=hlp)
        c.add_argument("--mode", choices=("exact", "mcmc", "auto") if name == "ballistic" else ("exact", "mcmc"))
        c.add_argument("--chains", type=int)
        c.add_argument("--sweeps", type=int)
        c.add_argument("--burn-in", type=int)
        c.add_argument("--p-pivot", type=float)
        if name == "sample":
            c.add_argument("--n", type=int)
            c.add_argument("--count", type=int)
        else:
            c.add_argument("--schedule", type=_int_list)
            c.add_argument("--v-grid", type=_float_list)

    c = sub.add_parser("ibprocess", parents=[common], help="i.i.d. irreducible-bridge concatenation")
    c.add_argument("--L", type=int)
    c.add_argument("--lam", type=float)
    c.add_argument("--pieces", type=int)
    c.add_argument("--window", type=int)
    c.add_argument("--include-walk", action="store_true", default=None)

    c = sub.add_parser("verify", parents=[common], help="bridge law versus irreducible concatenations")
    c.add_argument("--n", type=_int_list)
    return p


# -- config resolution -----------------------------------------------------------------

def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if text.startswith("# config: "):
        text = text.splitlines()[0][len("# config: "):]
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg.get("config", cfg) if isinstance(cfg.get("config"), dict) else cfg


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then flags."""
    base = _load_config(args.config) if args.config else {}
    if base.get("command", args.command) != args.command:
        raise ConfigError(f"config is for {base['command']!r}, not {args.command!r}")
    params = dict(DEFAULTS[args.command])
    params.update(base.get("params", {}))
    for key in DEFAULTS[args.command]:
        v = getattr(args, key, None)
        if v is not None:
            params[key] = v
    model = dict(base.get("model", {}))
    phi = dict(model.get("phi", {"mode": "free"}))
    if args.phi is not None and args.phi != phi.get("mode"):
        phi = {"mode": args.phi, **({"cap": phi["cap"]} if "cap" in phi else {})}
    for flag, key in (("k", "k"), ("cap", "cap"), ("phi_values", "values")):
        if getattr(args, flag) is not None:
            phi[key] = getattr(args, flag)
    model["phi"] = phi
    if args.dimension is not None:
        model["dimension"] = args.dimension
    if args.steps is not None:
        model["steps"] = args.steps
    if args.rho is not None:
        model["rho"] = {"mode": "explicit", "values": args.rho}
    cfg = {
        "command": args.command,
        "model": model,
        "params": params,
        "seed": args.seed if args.seed is not None else int(base.get("seed", 0)),
        "budget": args.budget if args.budget is not None else int(base.get("budget", DEFAULT_BUDGET)),
        "format": args.format or base.get("format", "json"),
    }
    return cfg


# -- commands --------------------------------------------------------------------------
# each returns (result dict, csv columns, csv rows)

def _kv_rows(result: dict) -> tuple[list[str], list[list]]:
    return ["key", "value"], [[k, json.dumps(v) if isinstance(v, (dict, list)) else v]
                              for k, v in sorted(result.items())]


def cmd_enumerate(cfg: dict, model, threads: int):
    N = int(cfg["params"]["N"])
    depth = cfg["params"]["prefix_depth"]
    if depth is None:
        depth = 0
        if threads > 1:
            depth = 1
            while depth < N - 1 and len(model.step_set) ** depth < 4 * threads:
                depth += 1
        cfg["params"]["prefix_depth"] = depth
    plan = shard_enumeration(model, N, int(depth))
    rep = run_plan(model, plan, threads=threads, budget=cfg["budget"])
    return enumeration_result(rep), ENUM_COLUMNS, enumeration_rows(rep)


def _walk_param(cfg, model):
    w = cfg["params"].get("walk")
    if w is None:
        raise ConfigError("a walk is required (--walk)")
    return parse_walk(w, model.step_set)


def cmd_decompose(cfg: dict, model, threads: int):
    w = _walk_param(cfg, model)
    prof = crossing_profile(w)
    dec = hw_decompose(w, model.step_set)
    res = {
        "walk": w.to_list(),
        "length": w.length,
        "is_bridge": is_bridge(w),
        "renewal_times": list(renewal_times(w)),
        "crossings": {"offset": prof.offset, "counts": prof.counts.tolist()},
        "Rl1": sorted(prof.rl(1)),
        "bridge_decomposition": {
            "split_index": dec.split_index,
            "prepended_step": dec.prepended_step,
            "negative_widths": dec.negative_widths,
            "positive_widths": dec.positive_widths,
            "negative_part": [b.to_list() for b in dec.negative_part],
            "positive_part": [b.to_list() for b in dec.positive_part],
        },
    }
    if w.dimension >= 2:
        res["width"] = width(w)
    if res["is_bridge"] and w.length >= 1:
        res["is_irreducible"] = is_irreducible(w)
        res["irreducible_pieces"] = [p.to_list() for p in irreducible_pieces(w)]
        res["zigzags"] = [list(z) for z in zigzags(w)]
        r, rl, bound = renewal_sandwich(w, model.D)
        res["renewal_sandwich"] = {"renewals_with_start": r, "Rl1": rl, "D_times_renewals": bound}
        if w.dimension >= 2:
            res["diamond_times"] = diamond_times(w)
    return (res, *_kv_rows(res))


def cmd_transform(cfg: dict, model, threads: int):
    w = _walk_param(cfg, model)
    p = cfg["params"]
    sites = p.get("sites")
    if not sites or len(sites) != 2:
        raise ConfigError("--sites needs exactly two indices")
    rec = surgery(w, p["op"], (int(sites[0]), int(sites[1])), model=model, check=bool(p["check"]))
    res = {"input": rec.input.to_list(), "output": rec.output.to_list(), "kind": rec.kind,
           "sites": list(rec.sites), "checks": rec.checks, "info": rec.info, "ok": rec.ok}
    if w.dimension == 2:
        try:
            res["output_compass"] = rec.output.to_compass()
        except (KeyError, ValueError):
            pass
    return (res, *_kv_rows(res))


def _sampler(cfg: dict, mode: str, n: int) -> SamplerConfig:
    p = cfg["params"]
    return SamplerConfig(mode=mode, n=n, chains=int(p["chains"]), sweeps=int(p["sweeps"]),
                         burn_in=int(p["burn_in"]), seed=int(cfg["seed"]), p_pivot=float(p["p_pivot"]),
                         budget=int(cfg["budget"]))


def cmd_sample(cfg: dict, model, threads: int):
    p = cfg["params"]
    n = int(p["n"])
    if p["mode"] == "exact":
        codes = exact_sample_codes(model, n, int(p["count"]), int(cfg["seed"]), budget=int(cfg["budget"]))
        steps = model.step_set.array
        ends = steps[codes].sum(axis=1)
        res = {"mode": "exact", "n": n, "rng": RNG_ALGORITHM, "steps": [list(s) for s in model.step_set.steps],
               "samples": codes.tolist(), "endpoints": ends.tolist()}
        cols = ["sample", *[f"step{t}" for t in range(n)], *[f"end{k}" for k in range(model.dimension)]]
        rows = [[i, *c, *e] for i, (c, e) in enumerate(zip(codes.tolist(), ends.tolist()))]
        return res, cols, rows
    r = mcmc_sample(model, _sampler(cfg, "mcmc", n))
    est = {name: r.estimate(f) for name, f in (("x", lambda x, y, q: x), ("y", lambda x, y, q: y),
                                               ("x2", lambda x, y, q: x * x), ("norm", lambda x, y, q: q))}
    res = {"mode": "mcmc", "n": n, "rng": RNG_ALGORITHM, "samples_per_chain": [len(c.x) for c in r.chains],
           "estimates": {k: {"mean": m, "se": s} for k, (m, s) in est.items()},
           "acceptance": [{m: c.acceptance(m) for m in ("pivot", "window")} for c in r.chains]}
    rows = [[k, m, s] for k, (m, s) in est.items()]
    return res, ["observable", "mean", "se"], rows


def cmd_ballistic(cfg: dict, model, threads: int):
    p = cfg["params"]
    sc = _sampler(cfg, p["mode"], max(1, min(p["schedule"])))
    rep = ballistic_scan(model, p["schedule"], p["v_grid"], sc, threads=threads)
    pts = [{"n": q.n, "mode": q.mode, "mean_norm": q.mean_norm, "mean_norm_se": q.mean_norm_se, "a_n": q.a_n,
            "tails": [{"v": v, "p": q.tails[v], "se": q.tail_se[v]} for v in rep.v_grid]} for q in rep.points]
    res = {"points": pts, "slopes_negative": rep.slopes_negative,
           "slopes_nonincreasing": rep.slopes_nonincreasing, "rng": RNG_ALGORITHM}
    cols = ["n", "mode", "mean_norm", "mean_norm_se", "a_n"]
    for v in rep.v_grid:
        cols += [f"tail_v{v:g}", f"tail_se_v{v:g}"]
    rows = []
    for q in rep.points:
        row = [q.n, q.mode, q.mean_norm, q.mean_norm_se, q.a_n]
        for v in rep.v_grid:
            row += [q.tails[v], q.tail_se[v]]
        rows.append(row)
    return res, cols, rows


def cmd_ibprocess(cfg: dict, model, threads: int):
    p = cfg["params"]
    ic = IbProcessConfig(L=int(p["L"]), lam=p["lam"], pieces=int(p["pieces"]), seed=int(cfg["seed"]),
                         budget=int(cfg["budget"]))
    law = piece_law(model, ic.L, ic.lam, budget=ic.budget)
    sim = simulate_ib_process(model, ic, law)
    mx, sx, my, sy = sim.drift()
    res = {"lam": sim.lam, "mass_gap": sim.mass_gap, "pieces": ic.pieces, "rng": RNG_ALGORITHM,
           "renewal_times": sim.renewals.tolist(), "piece_lengths": sim.piece_lengths.tolist(),
           "drift": {"x": mx, "x_se": sx, "y": my, "y_se": sy}}
    if model.dimension >= 2:
        dd = diamond_density_estimate(model, ic, int(p["window"]), result=sim)
        res["diamond_density"] = {"estimate": dd.density, "se": dd.se, "window": dd.window,
                                  "renewals": dd.renewals, "lower95": dd.lower95, "positive": dd.positive,
                                  "note": f"upper-bound estimate at window {dd.window}"}
    if p.get("include_walk"):
        res["walk"] = sim.walk.to_list()
    rows = [[k, r, l] for k, (r, l) in enumerate(zip(sim.renewals[1:].tolist(), sim.piece_lengths.tolist()), 1)]
    return res, ["k", "renewal_time", "piece_length"], rows


def cmd_verify(cfg: dict, model, threads: int):
    ns = cfg["params"]["n"]
    ns = [ns] if isinstance(ns, int) else list(ns)
    out = [{"n": int(n), "tv_distance": verify_conditional_identity(model, int(n), budget=int(cfg["budget"]))}
           for n in ns]
    for r in out:
        print(f"n={r['n']} TV distance {r['tv_distance']:.1e}", file=sys.stderr)
    return {"results": out}, ["n", "tv_distance"], [[r["n"], r["tv_distance"]] for r in out]


HANDLERS = {"enumerate": cmd_enumerate, "decompose": cmd_decompose, "transform": cmd_transform,
            "sample": cmd_sample, "ballistic": cmd_ballistic, "ibprocess": cmd_ibprocess, "verify": cmd_verify}


# -- emission ---------------------------------------------------------------------------

def render(cfg: dict, result: dict, columns, rows) -> str:
    if cfg["format"] == "csv":
        text = table_csv(columns, rows, json.dumps(cfg, sort_keys=True))
        if result.get("partial"):
            head, rest = text.split("\n", 1)
            text = f"{head}\n# partial: true\n{rest}"
        return text
    return dumps({"config": cfg, "result": result})


def _emit(cfg: dict, text: str, out: str | None, started: float) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w") as fh:
        fh.write(text)
    meta = {"created": datetime.now(timezone.utc).isoformat(), "elapsed_seconds": time.time() - started,
            "version": __version__, "command": cfg["command"]}
    with open(out + ".meta.json", "w") as fh:
        fh.write(dumps(meta))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.time()
    threads = args.threads or default_threads()
    try:
        cfg = resolve_config(args)
        model = model_from_dict(cfg["model"])
        result, cols, rows = HANDLERS[args.command](cfg, model, threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        print(f"invalid model: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        if exc.partial is not None and args.command == "enumerate":
            res = enumeration_result(exc.partial)
            _emit(cfg, render(cfg, res, ENUM_COLUMNS, enumeration_rows(exc.partial)), args.out, started)
        elif args.out:
            _emit(cfg, dumps({"config": cfg, "result": {"partial": True}}), args.out, started)
        return EXIT_BUDGET
    except PolymerLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OPERATION
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(cfg, render(cfg, result, cols, rows), args.out, started)
    return 0


if __name__ == "__main__":
    sys.exit(main())
