"""Command-line driver: spectra, oracle runs, parameter sweeps, convergence
studies and scheme-comparison tables, all emitted as CSV.

Subcommands: ``minima``, ``spectrum``, ``oracle``, ``sweep``, ``converge``,
``table``.  Energies print with nine significant digits.  Exit status is 0 on
success, 1 on a fatal error and 2 when some sweep points failed but the rest
were written.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import chargebasis
from .chargebasis import ChargeBasisConfig, build_sparse_h, eta_metrics, lowest_eigs
from .circuit import CircuitSpec, load_circuit
from .exceptions import SctbError
from .minima import find_minima
from .modes import normal_modes
from .vtb import Scheme, solve_spectrum

__all__ = ["SweepPlan", "SpectrumReport", "run_sweep", "convergence_report", "table_report", "main"]

_SWEEP_VARIABLES = ("flux_frac", "ng_component", "sigma_max", "n_cut", "epsilon")


def _fmt(value) -> str:
    if isinstance(value, float):
        return "%.9g" % value
    return str(value)


@dataclass
class SpectrumReport:
    """Tabular results; one row per (method, parameter point, level)."""

    columns: tuple
    rows: list = field(default_factory=list)

    def add(self, **kwargs) -> None:
        self.rows.append({c: kwargs.get(c, "") for c in self.columns})

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt(row[c]) for c in self.columns))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "SpectrumReport":
        lines = [ln for ln in text.splitlines() if ln]
        columns = tuple(lines[0].split(","))
        report = cls(columns=columns)
        for ln in lines[1:]:
            report.rows.append(dict(zip(columns, ln.split(","))))
        return report

    def write(self, path) -> None:
        text = self.to_csv()
        if path is None or path == "-":
            sys.stdout.write(text)
        else:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)


@dataclass(frozen=True)
class SweepPlan:
    """One swept variable with methods to run at every value.

    ``methods`` entries are ``("tb", scheme)`` or ``("cb", None)``; ``fixed``
    snapshots every other solver parameter.
    """

    variable: str
    values: tuple
    fixed: dict
    methods: tuple

    def __post_init__(self):
        if self.variable not in _SWEEP_VARIABLES:
            raise ValueError(f"variable must be one of {_SWEEP_VARIABLES}")
        if len(self.values) == 0:
            raise ValueError("sweep needs at least one value")
        if len(self.methods) == 0:
            raise ValueError("sweep needs at least one method")
        vals = np.asarray(self.values, dtype=float)
        if self.variable in ("flux_frac", "ng_component", "epsilon", "sigma_max", "n_cut"):
            if len(vals) > 1 and not (np.all(np.diff(vals) > 0) or np.all(np.diff(vals) < 0)):
                raise ValueError("sweep values must be strictly monotone")


def _apply_point(spec: CircuitSpec, fixed: dict, variable: str, value) -> tuple:
    """Rebuild the spec / solver knobs for one sweep point."""
    knobs = dict(fixed)
    if variable == "flux_frac":
        knobs["flux_frac"] = float(value)
    elif variable == "ng_component":
        ng = np.array(spec.offset_charges, dtype=float)
        ng[int(knobs.get("ng_axis", 0))] = float(value)
        knobs["offset_charges"] = ng
    elif variable == "sigma_max":
        knobs["sigma_max"] = int(value)
    elif variable == "n_cut":
        knobs["n_cut"] = int(value)
    elif variable == "epsilon":
        knobs["epsilon"] = float(value)
    if "flux_frac" in knobs and spec.name in ("flux_qubit", "current_mirror"):
        spec = _respec_flux(spec, knobs["flux_frac"])
    if knobs.get("offset_charges") is not None:
        spec = spec.with_offset_charges(knobs["offset_charges"])
    return spec, knobs


def _respec_flux(spec: CircuitSpec, flux_frac: float) -> CircuitSpec:
    """Rebuild a factory circuit's cosine phases for a new flux fraction."""
    from .circuit import CosineTerm

    if spec.name == "flux_qubit":
        terms = list(spec.cosine_terms)
        last = terms[-1]
        terms[-1] = CosineTerm(last.amplitude, last.weights, 2 * np.pi * flux_frac)
    elif spec.name == "current_mirror":
        n_islands = spec.n_nodes + 1
        phase = -2 * np.pi * flux_frac / n_islands
        terms = [CosineTerm(t.amplitude, t.weights, phase) for t in spec.cosine_terms]
    else:
        raise ValueError("flux sweeps need a factory circuit (flux_qubit/current_mirror)")
    return CircuitSpec(
        spec.n_nodes, spec.ec_matrix, tuple(terms), spec.offset_charges,
        spec.energy_shift, spec.name,
    )


def _solve_point(spec: CircuitSpec, method: tuple, knobs: dict) -> dict:
    kind, scheme = method
    levels = int(knobs.get("levels", 4))
    started = time.perf_counter()
    if kind == "tb":
        res = solve_spectrum(
            spec,
            scheme=scheme,
            sigma_max=int(knobs.get("sigma_max", 5)),
            n_levels=levels,
            epsilon=float(knobs.get("epsilon", 1e-3)),
            delta_min=float(knobs.get("delta_min", 1e-10)),
            adaptive=bool(knobs.get("adaptive", True)),
        )
        return {
            "method": "tb",
            "scheme": scheme.value,
            "cutoff": res.sigma_max,
            "energies": res.energies,
            "n_h": res.n_h,
            "dim": res.retained_dim,
            "wall_s": time.perf_counter() - started,
        }
    config = ChargeBasisConfig(
        n_cut=int(knobs.get("n_cut", 5)),
        k=levels,
        max_dim=int(knobs.get("max_dim", 2_000_000)),
    )
    h = build_sparse_h(spec, config)
    vals = lowest_eigs(h, levels)
    return {
        "method": "cb",
        "scheme": "",
        "cutoff": config.n_cut,
        "energies": vals,
        "n_h": int(h.nnz),
        "dim": h.shape[0],
        "wall_s": time.perf_counter() - started,
    }


_SWEEP_COLUMNS = (
    "method", "scheme", "variable", "value", "cutoff", "level",
    "energy_ghz", "n_h", "dim_retained", "wall_time_s", "error",
)


def run_sweep(spec: CircuitSpec, plan: SweepPlan, threads: int = 1, timing: bool = True):
    """Run every (method, value) point of the plan.

    Returns ``(report, n_failures)``; per-point errors are recorded in the
    report's ``error`` column instead of aborting the sweep.
    """
    report = SpectrumReport(columns=_SWEEP_COLUMNS)
    tasks = []
    for value in plan.values:
        point_spec, knobs = _apply_point(spec, plan.fixed, plan.variable, value)
        for method in plan.methods:
            tasks.append((value, point_spec, method, knobs))

    def run_one(task):
        value, point_spec, method, knobs = task
        try:
            return value, method, _solve_point(point_spec, method, knobs), None
        except (SctbError, ValueError, np.linalg.LinAlgError) as exc:
            return value, method, None, f"{type(exc).__name__}: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run_one, tasks))
    else:
        outcomes = [run_one(t) for t in tasks]

    failures = 0
    for value, method, solved, error in outcomes:
        if solved is None:
            failures += 1
            report.add(
                method=method[0],
                scheme="" if method[1] is None else method[1].value,
                variable=plan.variable,
                value=float(value),
                error=error,
            )
            continue
        for level, energy in enumerate(solved["energies"]):
            report.add(
                method=solved["method"],
                scheme=solved["scheme"],
                variable=plan.variable,
                value=float(value),
                cutoff=solved["cutoff"],
                level=level,
                energy_ghz=float(energy),
                n_h=solved["n_h"],
                dim_retained=solved["dim"],
                wall_time_s=solved["wall_s"] if timing else 0.0,
            )
    return report, failures


_CONV_COLUMNS = (
    "method", "scheme", "cutoff", "n_h", "eta_avg", "eta_min", "eta_max",
    "level", "energy_ghz", "wall_time_s", "error",
)


def convergence_report(
    spec: CircuitSpec,
    tb_cutoffs,
    cb_cutoffs,
    reference,
    scheme: Scheme = Scheme.IP,
    levels: int = 4,
    timing: bool = True,
    knobs: dict | None = None,
):
    """Deviation metrics versus a reference spectrum as cutoffs grow, the
    memory axis being the count of nonzero Hamiltonian entries."""
    reference = np.asarray(reference, dtype=float)
    knobs = dict(knobs or {})
    report = SpectrumReport(columns=_CONV_COLUMNS)
    failures = 0
    points = [(("tb", scheme), {"sigma_max": c}) for c in tb_cutoffs]
    points += [(("cb", None), {"n_cut": c}) for c in cb_cutoffs]
    for method, extra in points:
        local = dict(knobs)
        local.update(extra)
        local["levels"] = levels
        try:
            solved = _solve_point(spec, method, local)
            eta = eta_metrics(solved["energies"], reference[: len(solved["energies"])])
        except (SctbError, ValueError, np.linalg.LinAlgError) as exc:
            failures += 1
            report.add(
                method=method[0],
                scheme="" if method[1] is None else method[1].value,
                cutoff=extra.get("sigma_max", extra.get("n_cut")),
                error=f"{type(exc).__name__}: {exc}",
            )
            continue
        for level, energy in enumerate(solved["energies"]):
            report.add(
                method=solved["method"],
                scheme=solved["scheme"],
                cutoff=solved["cutoff"],
                n_h=solved["n_h"],
                eta_avg=eta.eta_avg,
                eta_min=eta.eta_min,
                eta_max=eta.eta_max,
                level=level,
                energy_ghz=float(energy),
                wall_time_s=solved["wall_s"] if timing else 0.0,
            )
    return report, failures


_TABLE_COLUMNS = (
    "method", "scheme", "cutoff", "e0_ghz", "e1_ghz", "n_h", "dim_retained",
    "wall_time_s", "best_e0", "error",
)


def table_report(
    spec: CircuitSpec,
    schemes,
    sigma_list,
    ncut_list,
    timing: bool = True,
    knobs: dict | None = None,
):
    """Ground and first-excited energies per scheme and cutoff; the lowest
    (variationally best) ground energy is flagged.  Oversized charge-basis
    rows are recorded as skipped rather than fatal."""
    knobs = dict(knobs or {})
    knobs["levels"] = 2
    rows = []
    failures = 0
    for scheme in schemes:
        for sigma in sigma_list:
            local = dict(knobs, sigma_max=sigma)
            try:
                solved = _solve_point(spec, ("tb", scheme), local)
                rows.append(solved)
            except (SctbError, ValueError, np.linalg.LinAlgError) as exc:
                failures += 1
                rows.append({"method": "tb", "scheme": scheme.value, "cutoff": sigma,
                             "error": f"{type(exc).__name__}: {exc}"})
    for n_cut in ncut_list:
        local = dict(knobs, n_cut=n_cut)
        try:
            rows.append(_solve_point(spec, ("cb", None), local))
        except (SctbError, ValueError, np.linalg.LinAlgError) as exc:
            failures += 1
            rows.append({"method": "cb", "scheme": "", "cutoff": n_cut,
                         "error": f"{type(exc).__name__}: {exc}"})
    best = None
    for row in rows:
        if "energies" in row:
            e0 = float(row["energies"][0])
            best = e0 if best is None else min(best, e0)
    report = SpectrumReport(columns=_TABLE_COLUMNS)
    for row in rows:
        if "energies" not in row:
            report.add(method=row["method"], scheme=row["scheme"],
                       cutoff=row["cutoff"], error=row["error"])
            continue
        e0 = float(row["energies"][0])
        e1 = float(row["energies"][1]) if len(row["energies"]) > 1 else ""
        report.add(
            method=row["method"],
            scheme=row["scheme"],
            cutoff=row["cutoff"],
            e0_ghz=e0,
            e1_ghz=e1,
            n_h=row["n_h"],
            dim_retained=row["dim"],
            wall_time_s=row["wall_s"] if timing else 0.0,
            best_e0=int(best is not None and abs(e0 - best) < 1e-12),
        )
    return report, failures


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="circuit description file (JSON)")
    parser.add_argument("--out", default=None, help="output CSV path (default stdout)")
    parser.add_argument("--scheme", default="ip", help="tight-binding scheme: ip|p|ipac|pac")
    parser.add_argument("--sigma-max", type=int, default=5)
    parser.add_argument("--ncut", type=int, default=5)
    parser.add_argument("--levels", type=int, default=4)
    parser.add_argument("--epsilon", type=float, default=1e-3)
    parser.add_argument("--delta-min", type=float, default=1e-10)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--mem-cap-gb", type=float, default=4.0)
    parser.add_argument("--flux-frac", type=float, default=None, help="override external flux")
    parser.add_argument("--ng", default=None, help="override offset charges, comma separated")
    parser.add_argument(
        "--no-timing", action="store_true",
        help="zero the wall-time column for byte-reproducible output",
    )


def _load_spec(args) -> CircuitSpec:
    spec = load_circuit(args.config)
    if args.flux_frac is not None:
        spec = _respec_flux(spec, args.flux_frac)
    if args.ng is not None:
        spec = spec.with_offset_charges([float(x) for x in args.ng.split(",")])
    return spec


def _knobs(args) -> dict:
    # 16 bytes per stored complex entry is the dominant memory term.
    max_dim = int(args.mem_cap_gb * 1e9 / (16 * 24))
    return {
        "sigma_max": args.sigma_max,
        "n_cut": args.ncut,
        "levels": args.levels,
        "epsilon": args.epsilon,
        "delta_min": args.delta_min,
        "max_dim": max_dim,
    }


def _parse_values(text: str):
    """Comma list (1,2,3) or start:stop:count range."""
    if ":" in text:
        start, stop, count = text.split(":")
        return tuple(np.linspace(float(start), float(stop), int(count)))
    return tuple(float(x) for x in text.split(","))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sctb",
        description="Tight-binding and charge-basis spectra of periodic superconducting circuits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_min = sub.add_parser("minima", help="list potential minima and mode frequencies")
    _add_common(p_min)

    p_spec = sub.add_parser("spectrum", help="tight-binding eigenvalues")
    _add_common(p_spec)

    p_orc = sub.add_parser("oracle", help="charge-basis eigenvalues")
    _add_common(p_orc)

    p_sweep = sub.add_parser("sweep", help="sweep one variable")
    _add_common(p_sweep)
    p_sweep.add_argument("--variable", required=True, choices=_SWEEP_VARIABLES)
    p_sweep.add_argument("--values", required=True, help="comma list or start:stop:count")
    p_sweep.add_argument("--ng-axis", type=int, default=0, help="offset-charge axis for ng sweeps")
    p_sweep.add_argument(
        "--methods", default="tb", help="comma list from tb (uses --scheme) and cb"
    )

    p_conv = sub.add_parser("converge", help="deviation vs reference as cutoffs grow")
    _add_common(p_conv)
    p_conv.add_argument("--tb-sigmas", default="1,2,3,4,5")
    p_conv.add_argument("--cb-ncuts", default="1,2,3,4,5")
    p_conv.add_argument(
        "--reference", default="auto",
        help="'auto' for a converged charge-basis run, or a CSV path from a previous run",
    )

    p_tab = sub.add_parser("table", help="scheme comparison table of E0, E1")
    _add_common(p_tab)
    p_tab.add_argument("--schemes", default="ip,p,ipac,pac")
    p_tab.add_argument("--sigmas", default="1,2")
    p_tab.add_argument("--ncuts", default="1")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except SctbError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    spec = _load_spec(args)
    knobs = _knobs(args)
    timing = not args.no_timing

    if args.command == "minima":
        mins = find_minima(spec)
        cols = (
            ["m"]
            + [f"theta_{i}" for i in range(spec.n_nodes)]
            + ["value_ghz"]
            + [f"omega_{i}" for i in range(spec.n_nodes)]
        )
        report = SpectrumReport(columns=tuple(cols))
        for m in mins:
            modes = normal_modes(spec.ec_matrix, m.hessian)
            row = {"m": m.index, "value_ghz": m.value}
            row.update({f"theta_{i}": float(t) for i, t in enumerate(m.theta)})
            row.update({f"omega_{i}": float(w) for i, w in enumerate(modes.omega)})
            report.add(**row)
        report.write(args.out)
        return 0

    if args.command == "spectrum":
        scheme = Scheme.parse(args.scheme)
        solved = _solve_point(spec, ("tb", scheme), knobs)
        report = SpectrumReport(
            columns=("level", "energy_ghz", "dim_retained", "n_h", "wall_time_s")
        )
        for level, energy in enumerate(solved["energies"]):
            report.add(
                level=level,
                energy_ghz=float(energy),
                dim_retained=solved["dim"],
                n_h=solved["n_h"],
                wall_time_s=solved["wall_s"] if timing else 0.0,
            )
        report.write(args.out)
        return 0

    if args.command == "oracle":
        solved = _solve_point(spec, ("cb", None), knobs)
        report = SpectrumReport(
            columns=("level", "energy_ghz", "dim_retained", "n_h", "wall_time_s", "n_cut")
        )
        for level, energy in enumerate(solved["energies"]):
            report.add(
                level=level,
                energy_ghz=float(energy),
                dim_retained=solved["dim"],
                n_h=solved["n_h"],
                wall_time_s=solved["wall_s"] if timing else 0.0,
                n_cut=solved["cutoff"],
            )
        report.write(args.out)
        return 0

    if args.command == "sweep":
        methods = []
        for name in args.methods.split(","):
            name = name.strip()
            if name == "tb":
                methods.append(("tb", Scheme.parse(args.scheme)))
            elif name == "cb":
                methods.append(("cb", None))
            else:
                raise ValueError(f"unknown method {name!r}")
        fixed = dict(knobs, ng_axis=args.ng_axis)
        values = _parse_values(args.values)
        if args.variable in ("sigma_max", "n_cut"):
            values = tuple(int(v) for v in values)
        plan = SweepPlan(
            variable=args.variable, values=values, fixed=fixed, methods=tuple(methods)
        )
        report, failures = run_sweep(spec, plan, threads=args.threads, timing=timing)
        report.write(args.out)
        return 2 if failures else 0

    if args.command == "converge":
        if args.reference == "auto":
            reference, _ = chargebasis.converged_reference(
                spec, k=args.levels, max_dim=knobs["max_dim"]
            )
        else:
            ref_report = SpectrumReport.from_csv(open(args.reference, encoding="utf-8").read())
            reference = np.array(
                [float(r["energy_ghz"]) for r in ref_report.rows[: args.levels]]
            )
        report, failures = convergence_report(
            spec,
            tb_cutoffs=[int(x) for x in args.tb_sigmas.split(",")],
            cb_cutoffs=[int(x) for x in args.cb_ncuts.split(",")],
            reference=reference,
            scheme=Scheme.parse(args.scheme),
            levels=args.levels,
            timing=timing,
            knobs=knobs,
        )
        report.write(args.out)
        return 2 if failures else 0

    if args.command == "table":
        report, failures = table_report(
            spec,
            schemes=[Scheme.parse(s) for s in args.schemes.split(",")],
            sigma_list=[int(x) for x in args.sigmas.split(",")],
            ncut_list=[int(x) for x in args.ncuts.split(",")],
            timing=timing,
            knobs=knobs,
        )
        report.write(args.out)
        return 2 if failures else 0

    raise ValueError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
