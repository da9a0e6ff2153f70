"""Command-line entry point (``treepursuit``).

Data goes to ``--out`` or standard output; logs go to standard error.  On
failure a single JSON line ``{"error": <code>, "message": <text>}`` is
written to standard error and the exit status is nonzero.
"""

import argparse
import json
import logging
import sys

from . import analysis, bench
from .exceptions import ConfigError, TreePursuitError
from .signals import dump_instance_csv, load_instance_csv, make_instance

logger = logging.getLogger("treepursuit")

# flag -> config key; flags left at None do not override the config file
_FLAGS = {
    "m": "m", "n": "n", "k": "k", "snr": "snr", "trials": "trials", "seed": "seed",
    "algorithms": "algorithms", "l": "l", "nmax": "nmax",
    "preselection_size": "preselection_size", "preselection": "preselection",
    "coef": "coef", "matrix": "matrix", "perturbation": "perturbation", "jobs": "jobs",
    "out": "out",
}


def _common(p):
    g = p.add_argument_group("experiment")
    g.add_argument("--config", help="key = value config file ([tmp] section allowed)")
    g.add_argument("--m", help="rows of the sensing matrix")
    g.add_argument("--n", help="columns of the sensing matrix")
    g.add_argument("--k", help="sparsity; comma list or start:stop:step")
    g.add_argument("--snr", help="SNR in dB; comma list, 'none' for noiseless")
    g.add_argument("--trials", help="trials per sweep point")
    g.add_argument("--seed", help="base seed; trial t uses seed + t")
    g.add_argument("--algorithms", help="comma list of omp,gomp,cosamp,tmp,tmp_nmaxV,oracle,preselection_only,noop")
    g.add_argument("--l", help="gOMP width L")
    g.add_argument("--nmax", help="per-layer survivor cap for 'tmp' (none = unlimited)")
    g.add_argument("--preselection-size", dest="preselection_size", help="size of the branching set (default 2K)")
    g.add_argument("--preselection", help="pre-selector: gomp, omp or all")
    g.add_argument("--coef", help="nonzero distribution: gaussian or sign")
    g.add_argument("--matrix", help="diagnostics matrix kind")
    g.add_argument("--perturbation", help="near_orthonormal perturbation size")
    g.add_argument("--jobs", help="worker processes for sweeps")
    g.add_argument("--out", help="output path (default: standard output)")
    g.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override any (dotted) config key, e.g. tmp.exact_fit_tol=none")
    g.add_argument("-v", "--verbose", action="store_true", help="debug logging")


def build_parser():
    parser = argparse.ArgumentParser(prog="treepursuit", description="Sparse recovery with tree-pruned matching pursuit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("sweep-err", "noiseless exact recovery ratio against K"),
        ("sweep-mse", "MSE against SNR"),
        ("timing", "mean running time against K"),
        ("diagnose", "brute-force RIC and bound verdicts on tiny instances"),
        ("recover", "recover one instance and print support and estimate"),
        ("ric", "print the restricted isometry constants of one matrix"),
    ]:
        p = sub.add_parser(name, help=text)
        _common(p)
        if name == "recover":
            p.add_argument("--instance", help="load the instance from a CSV dump instead of generating it")
            p.add_argument("--dump", help="write the instance to this CSV path")
        if name == "ric":
            p.add_argument("--kmax", type=int, help="largest order (default: all feasible up to n)")
    return parser


def make_config(args, defaults=None):
    """Merge defaults, the config file, explicit flags and ``--set`` overrides."""
    mapping = dict(defaults or {})
    if args.config:
        mapping.update(bench.read_config_file(args.config))
    for flag, key in _FLAGS.items():
        val = getattr(args, flag, None)
        if val is not None:
            mapping = {k: v for k, v in mapping.items() if bench.ExperimentConfig.canonical_key(k) != key}
            mapping[key] = val
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        mapping[key] = val
    return bench.ExperimentConfig.from_mapping(mapping)


def _emit(writer, rows, out):
    if out:
        writer(rows, out)
    else:
        writer(rows, sys.stdout)


def _cmd_sweep(args, runner):
    cfg = make_config(args)
    records = runner(cfg)
    _emit(bench.write_records, records, cfg.out)


def _cmd_diagnose(args):
    cfg = make_config(args, defaults={"m": "8", "n": "12", "k": "2", "snr": "none", "trials": "50"})
    rows = bench.run_diagnostics(cfg)
    _emit(analysis.write_report, rows, cfg.out)
    bad = sum(r[4] == analysis.VIOLATED for r in rows)
    logger.info("%d report rows, %d violated", len(rows), bad)


def _cmd_recover(args):
    cfg = make_config(args, defaults={"k": "10", "snr": "none", "algorithms": "tmp"})
    if args.instance:
        inst = load_instance_csv(args.instance)
    else:
        inst = make_instance(cfg.m, cfg.n, cfg.k[0], cfg.seed, snr_db=cfg.snr[0], coef=cfg.coef)
    if args.dump:
        dump_instance_csv(inst, args.dump)
    results = []
    for name in cfg.algorithms:
        res = bench.recover(name, inst.phi, inst.y, inst.k, cfg, truth=inst.x.support)
        results.append({
            "algorithm": name,
            "support": list(res.support),
            "x_hat": {str(j): float(f"{res.x_hat[j]:.10g}") for j in res.support},
            "residual_norm": float(f"{res.residual_norm:.10g}"),
            "exact": res.support == inst.x.support,
        })
    text = "\n".join(json.dumps(r) for r in results) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_ric(args):
    cfg = make_config(args, defaults={"m": "8", "n": "12", "k": "1"})
    phi = bench.diagnostic_matrix(cfg.matrix, cfg.m, cfg.n, cfg.seed, cfg.perturbation)
    table = analysis.ric_bruteforce(phi, args.kmax or cfg.n, matrix_id=str(cfg.seed))
    lines = ["k,delta,lambda_min,lambda_max"]
    for k in sorted(table.delta):
        lines.append(f"{k},{table.delta[k]:.10g},{table.lam_min[k]:.10g},{table.lam_max[k]:.10g}")
    text = "\n".join(lines) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {
        "sweep-err": lambda a: _cmd_sweep(a, bench.run_err_sweep),
        "sweep-mse": lambda a: _cmd_sweep(a, bench.run_mse_sweep),
        "timing": lambda a: _cmd_sweep(a, bench.run_timing),
        "diagnose": _cmd_diagnose,
        "recover": _cmd_recover,
        "ric": _cmd_ric,
    }
    try:
        handlers[args.command](args)
    except TreePursuitError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": "io_error", "message": str(exc)}), file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
