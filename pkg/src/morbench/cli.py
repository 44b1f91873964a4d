"""Command-line surface tying the pipeline together.

Commands::

    morbench list [--registry DIR]
    morbench validate <config> [--registry DIR] [--map-impl A=B]...
    morbench run <config> [--registry DIR] [--out DIR] [--jobs N]
                 [--map-impl A=B]...
    morbench report <results.json> [--format md|tex] [--out DIR]

The registry directory defaults to ``$MORBENCH_REGISTRY`` and then to the
bundled registry. ``--map-impl from=to`` (repeatable) reroutes external
package ids in legacy configurations onto the built-in backends, e.g.
``--map-impl mess=sign --map-impl emgr=emp``.

Exit codes: 0 on success (warnings allowed, printed with a ``morbench:
warning:`` prefix), 2 on any hard error (single ``morbench: error:``
line on stderr).
"""

import argparse
import json
import logging
import os
import sys

from . import bundled, driver, explorer, problems
from .exceptions import MorbenchError, SchemaError
from .model import NORM_IDS, parse_problem_id

log = logging.getLogger(__name__)

_TOP_KEYS = ("alg_iso", "meas_opt", "bode_opt", "plot_opt", "report_opt")


def _warn(message):
    print(f"morbench: warning: {message}", file=sys.stderr)


# --- configuration parsing -----------------------------------------------------

def parse_config(path):
    """Parse and validate a benchmark configuration file.

    Returns ``(config, warnings)``. The top level maps benchmark ids to
    blocks with a mandatory ``alg_iso`` and optional option blocks;
    unknown top-level or second-level keys are hard errors, unknown keys
    inside option blocks are warnings (forward compatibility). Numeric
    literals may use scientific notation.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config is not valid JSON: {exc}")
    if not isinstance(raw, dict) or not raw:
        raise SchemaError("config must be a JSON object with one entry per benchmark")
    warnings = []
    stem = os.path.splitext(os.path.basename(path))[0]
    if stem not in raw:
        warnings.append(
            f"config filename {stem!r} matches no benchmark id in the file")
    for bench_id, block in raw.items():
        try:
            parse_problem_id(bench_id)
        except MorbenchError:
            raise SchemaError("top-level key is not a valid benchmark id",
                              path=bench_id)
        if not isinstance(block, dict):
            raise SchemaError("benchmark entry must be an object", path=bench_id)
        for key in block:
            if key not in _TOP_KEYS:
                raise SchemaError(f"unknown key {key!r}", path=f"{bench_id}.{key}")
        if "alg_iso" not in block:
            raise SchemaError("missing mandatory field 'alg_iso'", path=bench_id)
        _check_alg_iso(block["alg_iso"], f"{bench_id}.alg_iso")
        _check_meas_opt(block.get("meas_opt"), f"{bench_id}.meas_opt", warnings)
        _check_plot_grid_block(block.get("bode_opt"), f"{bench_id}.bode_opt", warnings)
        _check_plot_opt(block.get("plot_opt"), f"{bench_id}.plot_opt", warnings)
        _check_report_opt(block.get("report_opt"), f"{bench_id}.report_opt", warnings)
    return raw, warnings


def _check_alg_iso(alg_iso, path):
    if not isinstance(alg_iso, dict):
        raise SchemaError("alg_iso must be an object", path=path)
    for method_id, impls in alg_iso.items():
        mpath = f"{path}.{method_id}"
        if not isinstance(impls, dict):
            raise SchemaError("method entry must map implementations to "
                              "parameter sets", path=mpath)
        for impl_id, value in impls.items():
            ipath = f"{mpath}.{impl_id}"
            if value is None:
                continue
            if isinstance(value, dict):
                _check_params(value, ipath)
            elif isinstance(value, list):
                for k, entry in enumerate(value):
                    if not isinstance(entry, dict):
                        raise SchemaError("array entries must be objects",
                                          path=f"{ipath}[{k}]")
                    _check_params(entry, f"{ipath}[{k}]")
            else:
                raise SchemaError("value must be an object, an array of objects, "
                                  "or null", path=ipath)


def _check_params(params, path):
    for key, value in params.items():
        ppath = f"{path}.{key}"
        if isinstance(value, bool) or not isinstance(value, (int, float, list)):
            raise SchemaError("parameter values must be numbers or arrays of "
                              "numbers", path=ppath)
        if isinstance(value, list) and not all(
                isinstance(v, (int, float)) and not isinstance(v, bool)
                for v in value):
            raise SchemaError("array parameters must contain numbers only",
                              path=ppath)


def _check_grid_keys(block, path, warnings):
    for key, value in block.items():
        kpath = f"{path}.{key}"
        if key == "FreqRange":
            if (not isinstance(value, list) or len(value) != 2
                    or not all(isinstance(v, (int, float))
                               and not isinstance(v, bool) for v in value)):
                raise SchemaError("FreqRange must be [lo, hi]", path=kpath)
            if not value[0] < value[1]:
                raise SchemaError("FreqRange must satisfy lo < hi", path=kpath)
        elif key == "MaxPoints":
            if isinstance(value, bool) or not isinstance(value, int) or value < 2:
                raise SchemaError("MaxPoints must be an integer >= 2", path=kpath)
        elif key == "ShowPlot":
            pass  # meaningless for a non-interactive tool; accepted and ignored
        else:
            warnings.append(f"{kpath}: unknown key ignored")


def _check_plot_grid_block(block, path, warnings):
    if block is None:
        return
    if not isinstance(block, dict):
        raise SchemaError("must be an object", path=path)
    _check_grid_keys(block, path, warnings)


def _check_meas_opt(block, path, warnings):
    if block is None:
        return
    if not isinstance(block, dict):
        raise SchemaError("must be an object", path=path)
    for key, value in block.items():
        kpath = f"{path}.{key}"
        if key == "norm_id":
            if not isinstance(value, list) or not all(
                    isinstance(v, str) for v in value):
                raise SchemaError("norm_id must be an array of strings", path=kpath)
            for v in value:
                if v not in NORM_IDS:
                    raise SchemaError(
                        f"unknown norm id {v!r} (expected one of {list(NORM_IDS)})",
                        path=kpath)
        elif key == "time_points":
            if isinstance(value, bool) or not isinstance(value, int) or value < 2:
                raise SchemaError("time_points must be an integer >= 2", path=kpath)
        elif key == "h2_method":
            if value != "lyap":
                warnings.append(f"{kpath}: only 'lyap' is supported, using it")
        elif key in ("ml_bodemag", "ml_sigmaplot", "ml_frobeniusplot"):
            if not isinstance(value, dict):
                raise SchemaError("must be an object", path=kpath)
            _check_grid_keys(value, kpath, warnings)
        else:
            warnings.append(f"{kpath}: unknown key ignored")


def _check_plot_opt(block, path, warnings):
    if block is None:
        return
    if not isinstance(block, dict):
        raise SchemaError("must be an object", path=path)
    for key, value in block.items():
        kpath = f"{path}.{key}"
        if key in ("save_eps", "save_fig"):
            if not isinstance(value, bool):
                raise SchemaError(f"{key} must be a boolean", path=kpath)
        else:
            warnings.append(f"{kpath}: unknown key ignored")


def _check_report_opt(block, path, warnings):
    if block is None:
        return
    if not isinstance(block, dict):
        raise SchemaError("must be an object", path=path)
    for key, value in block.items():
        kpath = f"{path}.{key}"
        if key == "format":
            if value not in ("md", "tex"):
                raise SchemaError("format must be 'md' or 'tex'", path=kpath)
        else:
            warnings.append(f"{kpath}: unknown key ignored")


# --- commands -------------------------------------------------------------------

def _registry_dir(args):
    if args.registry:
        return args.registry
    env = os.environ.get("MORBENCH_REGISTRY")
    if env:
        return env
    return bundled.default_registry()


def _map_impl(args):
    mapping = {}
    for item in args.map_impl or ():
        if "=" not in item:
            raise SchemaError(f"--map-impl expects FROM=TO, got {item!r}")
        src, dst = item.split("=", 1)
        mapping[src] = dst
    return mapping


def cmd_list(args):
    registry = _registry_dir(args)
    for prob in problems.list_problems(registry):
        n, m, q = prob.declared_dims
        print(f"{prob.id}\tn={n} m={m} q={q}")
    return 0


def cmd_validate(args):
    registry = _registry_dir(args)
    config, warnings = parse_config(args.config)
    mapping = _map_impl(args)
    known = {p.id for p in problems.list_problems(registry)}
    total = 0
    for bench_id, block in config.items():
        plan = driver.expand_config(bench_id, block, mapping)
        if bench_id not in known:
            warnings.append(f"benchmark {bench_id!r} is not in the registry "
                            f"({registry})")
        counts = {}
        print(f"plan {bench_id}: {len(plan.isotopes)} isotope(s)")
        for iso in plan.isotopes:
            counts[iso.method_id] = counts.get(iso.method_id, 0) + 1
            print(f"  {iso.label}\t{iso.method_id}\t{iso.impl_id}\t"
                  f"{json.dumps(iso.params)}")
        for method_id, count in counts.items():
            print(f"  method {method_id}: {count} isotope(s)")
        for notice in plan.notices:
            print(f"  note: {notice}")
        total += len(plan.isotopes)
    print(f"total: {total} isotope(s) across {len(config)} plan(s)")
    for message in warnings:
        _warn(message)
    return 0


def cmd_run(args):
    registry = _registry_dir(args)
    config, warnings = parse_config(args.config)
    mapping = _map_impl(args)
    multi = len(config) > 1
    failures = []
    for bench_id, block in config.items():
        plan = driver.expand_config(bench_id, block, mapping)
        for notice in plan.notices:
            warnings.append(f"{bench_id}: {notice}")
        if not plan.isotopes:
            warnings.append(f"{bench_id}: no runnable isotopes, skipped")
            continue
        manifest_path = problems.find_problem(registry, bench_id)
        _, system = problems.load_problem(manifest_path)
        results = driver.run_plan(plan, system, jobs=args.jobs)
        out_dir = os.path.join(args.out, bench_id) if multi else args.out
        os.makedirs(out_dir, exist_ok=True)
        driver.save_results(results, os.path.join(out_dir, "results.json"))
        plot_refs = explorer.emit_plots(results, plan.plot_options, out_dir)
        report_path = explorer.render_report(results, plan.report_options,
                                             out_dir, plot_refs)
        for record in results.runs:
            if record.status == "failed":
                failures.append(f"{bench_id}/{record.isotope}: {record.message}")
        ok = sum(1 for r in results.runs if r.status == "ok")
        print(f"{bench_id}: {ok}/{len(results.runs)} runs ok, "
              f"report at {report_path}")
    for message in warnings:
        _warn(message)
    for message in failures:
        _warn(f"run failed: {message}")
    return 0


def cmd_report(args):
    results = driver.load_results(args.results)
    out_dir = args.out or os.path.dirname(os.path.abspath(args.results)) or "."
    plot_refs = explorer.emit_plots(results, {}, out_dir)
    report_path = explorer.render_report(results, {"format": args.format},
                                         out_dir, plot_refs)
    print(report_path)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="morbench",
        description="benchmark harness for model order reduction of LTI systems")
    parser.add_argument("--verbose", action="store_true",
                        help="log informational messages")
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="list problems in the registry")
    p_list.add_argument("--registry", help="registry directory")
    p_list.set_defaults(func=cmd_list)

    p_val = sub.add_parser("validate",
                           help="expand a config without executing anything")
    p_val.add_argument("config")
    p_val.add_argument("--registry", help="registry directory")
    p_val.add_argument("--map-impl", action="append", metavar="FROM=TO",
                       help="remap an implementation id (repeatable)")
    p_val.set_defaults(func=cmd_validate)

    p_run = sub.add_parser("run", help="execute a config and write reports")
    p_run.add_argument("config")
    p_run.add_argument("--registry", help="registry directory")
    p_run.add_argument("--out", default="morbench-results",
                       help="output directory (default: morbench-results)")
    p_run.add_argument("--jobs", type=int, default=1,
                       help="parallel isotope executions (default 1; timings "
                            "from parallel runs are flagged as not comparable)")
    p_run.add_argument("--map-impl", action="append", metavar="FROM=TO",
                       help="remap an implementation id (repeatable)")
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("report", help="re-render a report from results.json")
    p_rep.add_argument("results")
    p_rep.add_argument("--format", choices=("md", "tex"), default="md")
    p_rep.add_argument("--out", help="output directory (default: alongside "
                                     "the results file)")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="morbench: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except MorbenchError as exc:
        print(f"morbench: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"morbench: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
