"""Run-plan expansion and execution.

A configuration block for one benchmark expands into an ordered list of
algorithm isotopes. Under ``alg_iso``, each method maps to a map of
implementations whose value is

* an object: one isotope with those parameters ({} means all defaults),
* an array of objects: one isotope per element, labels suffixed -1, -2, ...
* ``null``: the implementation is listed but skipped (a documented
  placeholder that expands to zero isotopes).

Labels are built from the configured method and implementation names
(``bt-mess-1`` style) even when ``map_impl`` reroutes execution to a
built-in backend, so results keep the names the configuration used.

Execution runs every isotope independently: a failing reduction yields a
failed record with the error message and never aborts the other runs.
Wall time covers the reduction call only, on a monotonic clock.
"""

import concurrent.futures
import datetime
import json
import logging
import math
import platform
import socket
import time
from dataclasses import dataclass, field

import numpy as np

from . import analyzer, methods
from .exceptions import MorbenchError, SchemaError
from .model import AlgorithmIsotope, EnvInfo, MeasureSet, RunRecord

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunPlan:
    """Ordered isotopes plus option blocks for one benchmark problem."""

    problem_id: str
    isotopes: tuple
    measure_options: dict = field(default_factory=dict)
    bode_options: dict = field(default_factory=dict)
    plot_options: dict = field(default_factory=dict)
    report_options: dict = field(default_factory=dict)
    notices: tuple = ()

    def __post_init__(self):
        labels = [iso.label for iso in self.isotopes]
        if len(labels) != len(set(labels)):
            raise SchemaError(f"duplicate isotope labels in plan: {labels}")


@dataclass(frozen=True)
class ResultsFile:
    """Everything one executed plan produced; serializes to results.json."""

    env: EnvInfo
    problem_id: str
    runs: tuple
    measures: dict
    jobs: int = 1
    schema_version: int = SCHEMA_VERSION


def expand_config(problem_id, block, map_impl=None):
    """Expand one benchmark's config block into a RunPlan.

    ``map_impl`` remaps implementation ids (e.g. {"mess": "sign"}) so
    configurations written for external packages can execute against the
    built-in registry. Implementations that are unknown after mapping are
    skipped with a notice; ``null`` placeholders are skipped silently with
    a placeholder notice. Parameters of executable isotopes are validated
    against the registry.
    """
    map_impl = map_impl or {}
    alg_iso = block.get("alg_iso")
    if not isinstance(alg_iso, dict):
        raise SchemaError("missing or invalid alg_iso", path=f"{problem_id}.alg_iso")
    isotopes = []
    notices = []
    for method_id, impls in alg_iso.items():
        path = f"{problem_id}.alg_iso.{method_id}"
        if not isinstance(impls, dict):
            raise SchemaError("method value must be an object of implementations",
                              path=path)
        for impl_id, value in impls.items():
            ipath = f"{path}.{impl_id}"
            exec_impl = map_impl.get(impl_id, impl_id)
            if value is None:
                notices.append(f"{method_id}.{impl_id}: null placeholder, skipped")
                continue
            if isinstance(value, dict):
                param_sets = [(value, f"{method_id}-{impl_id}", ipath)]
            elif isinstance(value, list):
                if not all(isinstance(entry, dict) for entry in value):
                    raise SchemaError("array entries must be parameter objects",
                                      path=ipath)
                param_sets = [
                    (entry, f"{method_id}-{impl_id}-{k}", f"{ipath}[{k - 1}]")
                    for k, entry in enumerate(value, start=1)
                ]
            else:
                raise SchemaError(
                    "implementation value must be an object, an array of objects, "
                    "or null", path=ipath)
            if not methods.is_registered(method_id, exec_impl):
                notices.append(
                    f"{method_id}.{impl_id}: no built-in implementation "
                    f"{method_id}-{exec_impl}, skipped (use --map-impl to remap)")
                log.warning("skipping %s-%s: not in the built-in registry",
                            method_id, impl_id)
                continue
            for params, label, ppath in param_sets:
                methods.validate_params(method_id, exec_impl, params, path=ppath)
                isotopes.append(AlgorithmIsotope(
                    method_id=method_id,
                    impl_id=exec_impl,
                    params=dict(params),
                    label=label,
                ))
    for notice in notices:
        log.info("%s: %s", problem_id, notice)
    return RunPlan(
        problem_id=problem_id,
        isotopes=tuple(isotopes),
        measure_options=dict(block.get("meas_opt") or {}),
        bode_options=dict(block.get("bode_opt") or {}),
        plot_options=dict(block.get("plot_opt") or {}),
        report_options=dict(block.get("report_opt") or {}),
        notices=tuple(notices),
    )


def collect_env(tool_version=None):
    """Snapshot of the execution environment for the results header."""
    if tool_version is None:
        from . import __version__
        tool_version = __version__
    return EnvInfo(
        timestamp=datetime.datetime.now(datetime.timezone.utc)
        .isoformat(timespec="seconds"),
        os_name_version=f"{platform.system()} {platform.release()}",
        tool_version=tool_version,
        hostname=platform.node() or socket.gethostname() or "unknown",
    )


def _execute_one(isotope, system, plan, env):
    start = time.perf_counter()
    try:
        rom = methods.reduce(system, isotope)
    except Exception as exc:  # failure isolation: any error becomes a record
        wall = time.perf_counter() - start
        message = f"{type(exc).__name__}: {exc}"
        if not isinstance(exc, MorbenchError):
            log.exception("isotope %s raised unexpectedly", isotope.label)
        return RunRecord(isotope=isotope.label, problem_id=plan.problem_id,
                         status="failed", wall_time_s=wall, message=message,
                         environment=env), None
    wall = time.perf_counter() - start
    try:
        ms = analyzer.measure(system, rom, plan.measure_options, plan.bode_options)
    except Exception as exc:
        log.exception("measuring isotope %s failed", isotope.label)
        return RunRecord(isotope=isotope.label, problem_id=plan.problem_id,
                         status="failed", wall_time_s=wall,
                         message=f"measurement failed: {type(exc).__name__}: {exc}",
                         environment=env), None
    record = RunRecord(isotope=isotope.label, problem_id=plan.problem_id,
                       status="ok", wall_time_s=wall, reduced_order=rom.r,
                       environment=env)
    return record, ms


def run_plan(plan, system, jobs=1, env=None):
    """Execute every isotope of a plan on one system.

    Runs are independent; the system is shared read-only. With jobs > 1
    the isotopes execute in a thread pool (results are identical except
    for the wall times, which the report then flags as not comparable).
    """
    if not plan.isotopes:
        raise SchemaError(f"plan for {plan.problem_id} contains no isotopes")
    if jobs < 1:
        raise SchemaError("jobs must be at least 1")
    env = env or collect_env()
    if jobs == 1:
        outcomes = [_execute_one(iso, system, plan, env) for iso in plan.isotopes]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_execute_one, iso, system, plan, env)
                       for iso in plan.isotopes]
            outcomes = [f.result() for f in futures]
    runs = tuple(record for record, _ in outcomes)
    measures = {record.isotope: ms for record, ms in outcomes if ms is not None}
    return ResultsFile(env=env, problem_id=plan.problem_id, runs=runs,
                       measures=measures, jobs=jobs)


# --- results (de)serialization -------------------------------------------------

def _encode_norm(value):
    if math.isinf(value):
        return "inf"
    return value


def _decode_norm(value):
    if value == "inf":
        return math.inf
    return float(value)


def results_to_dict(results):
    """JSON-ready dict per the results.json schema (infinities as "inf")."""
    runs = []
    for record in results.runs:
        entry = {
            "isotope": record.isotope,
            "status": record.status,
            "wall_time_s": record.wall_time_s,
        }
        if record.message is not None:
            entry["message"] = record.message
        if record.reduced_order is not None:
            entry["reduced_order"] = record.reduced_order
        runs.append(entry)
    measures = {
        label: {
            "norms": {nid: _encode_norm(val) for nid, val in ms.norms.items()},
            "freq_samples": ms.freq_samples,
        }
        for label, ms in results.measures.items()
    }
    return {
        "schema_version": results.schema_version,
        "env": {
            "timestamp": results.env.timestamp,
            "os_name_version": results.env.os_name_version,
            "tool_version": results.env.tool_version,
            "hostname": results.env.hostname,
        },
        "problem_id": results.problem_id,
        "jobs": results.jobs,
        "runs": runs,
        "measures": measures,
    }


def results_from_dict(raw):
    """Inverse of :func:`results_to_dict`."""
    env = EnvInfo(**raw["env"])
    runs = tuple(
        RunRecord(
            isotope=entry["isotope"],
            problem_id=raw["problem_id"],
            status=entry["status"],
            wall_time_s=entry["wall_time_s"],
            reduced_order=entry.get("reduced_order"),
            message=entry.get("message"),
            environment=env,
        )
        for entry in raw["runs"]
    )
    measures = {
        label: MeasureSet(
            norms={nid: _decode_norm(val) for nid, val in block["norms"].items()},
            freq_samples=block.get("freq_samples", {}),
        )
        for label, block in raw.get("measures", {}).items()
    }
    return ResultsFile(
        env=env,
        problem_id=raw["problem_id"],
        runs=runs,
        measures=measures,
        jobs=raw.get("jobs", 1),
        schema_version=raw.get("schema_version", SCHEMA_VERSION),
    )


def save_results(results, path):
    """Write results.json (written once, at the end of a run)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(results_to_dict(results), fh, indent=2, allow_nan=False)
        fh.write("\n")


def load_results(path):
    """Read a results.json produced by :func:`save_results`."""
    with open(path, "r", encoding="utf-8") as fh:
        return results_from_dict(json.load(fh))
