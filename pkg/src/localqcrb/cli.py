"""Command-line front end: ``localqcrb analyze|sweep|catalog|verify|lmcc``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .catalog import CATALOG, build_catalog_model, catalog_reference_measurement, ghz_state, w_state
from .hoc import (
    FEASIBLE_TOL,
    hoc_residual,
    hoc_solve_numeric,
    planar_certificate,
    planar_three_qubit_from_m,
)
from .imp import classify_m, lmcc_build, structure_measurement
from .linalg import pauli_string_op
from .model import Model, check_m_matrix, evolve_state, hamiltonian_model, m_matrix, qfi
from .povm import LocalMeasurement, cfi, saturation_check

EXIT_OK, EXIT_PARSE, EXIT_INVARIANT, EXIT_INFEASIBLE = 0, 2, 3, 4


class SpecError(ValueError):
    """Malformed or inconsistent model specification."""


# ---------------------------------------------------------------- model specs

_NAMED_STATES = {
    "ghz": ghz_state,
    "w": w_state,
    "zero": lambda n: np.eye(2**n, 1, dtype=complex).reshape(-1),
}


def parse_model_spec(text: str) -> Model:
    """Build a model from JSON text.

    Either ``{"catalog": name, "n": N}`` or ``{"nqubits", "probe", "hamiltonian", "time"}``
    where ``probe`` is a list of ``[re, im]`` pairs or one of ``ghz``, ``w``,
    ``zero`` and ``hamiltonian`` is a list of ``{"coefficient", "pauli"}``.
    """
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise SpecError("model spec must be a JSON object")
    if "catalog" in spec:
        try:
            return build_catalog_model(spec["catalog"], spec.get("n"), spec.get("params"))
        except ValueError as exc:
            raise SpecError(str(exc)) from None
    try:
        n = int(spec["nqubits"])
        probe_spec = spec["probe"]
        terms = spec["hamiltonian"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"missing or invalid field: {exc}") from None
    if n < 1:
        raise SpecError("nqubits must be positive")
    d = 2**n
    if isinstance(probe_spec, str):
        if probe_spec not in _NAMED_STATES:
            raise SpecError(f"unknown named probe {probe_spec!r}")
        psi = _NAMED_STATES[probe_spec](n)
    else:
        try:
            psi = np.array([complex(float(re), float(im)) for re, im in probe_spec])
        except (TypeError, ValueError):
            raise SpecError("probe must be a list of [re, im] pairs") from None
        if psi.shape[0] != d:
            raise SpecError(f"probe has {psi.shape[0]} amplitudes, expected {d} for {n} qubits")
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) >= 1e-6:
            raise SpecError(f"probe norm {norm!r} is too far from 1 to renormalize")
        if norm != 1.0:
            warnings.warn(f"renormalizing probe (norm {norm!r})", stacklevel=2)
            psi = psi / norm
    h = np.zeros((d, d), dtype=complex)
    for term in terms:
        try:
            coeff, label = float(term["coefficient"]), str(term["pauli"])
        except (KeyError, TypeError, ValueError):
            raise SpecError("hamiltonian terms need a real 'coefficient' and a 'pauli' string") from None
        if len(label) != n:
            raise SpecError(f"Pauli string {label!r} does not have length {n}")
        try:
            h += coeff * pauli_string_op(label)
        except ValueError as exc:
            raise SpecError(str(exc)) from None
    try:
        return hamiltonian_model(psi, h, float(spec.get("time", 1.0)), name=spec.get("name", ""))
    except ValueError as exc:
        raise SpecError(str(exc)) from None


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive linspace)."""
    try:
        start, stop, count = text.split(":")
        return np.linspace(float(start), float(stop), int(count))
    except ValueError:
        raise SpecError(f"lambda grid must look like start:stop:count, got {text!r}") from None


# ---------------------------------------------------------------- pipeline


@dataclass
class PipelineOptions:
    seed: int = 0
    restarts: int = 20
    tolerance: float = FEASIBLE_TOL
    workers: int = 1


def _lm_search(m: np.ndarray, n: int, opts: PipelineOptions) -> dict:
    kind = classify_m(m)
    axes = structure_measurement(kind, n)
    if axes is not None and hoc_residual(m, axes) < opts.tolerance:
        return {"feasible": True, "status": "feasible", "method": f"structure:{kind.kind}",
                "axes": axes, "residual": hoc_residual(m, axes), "restarts_used": 0, "notes": []}
    numeric = dict(restarts=opts.restarts, seed=opts.seed, tol=opts.tolerance)
    if n == 3:
        rep = planar_three_qubit_from_m(m, **numeric)
    else:
        rep = hoc_solve_numeric(m, **numeric)
    out = {"feasible": rep.feasible, "status": rep.status, "method": rep.method, "axes": rep.axes,
           "residual": rep.residual, "restarts_used": rep.restarts_used, "notes": list(rep.notes)}
    if not rep.feasible:
        cert = rep.certificate
        if cert is None:
            c = planar_certificate(m)
            cert = c.note if c is not None else None
        if cert is not None:
            out["status"] = "infeasible"
            out["certificate"] = cert
        if rep.axes is None:
            # analytic verdict only: still report the best numeric attempt
            num = hoc_solve_numeric(m, **numeric)
            out.update(axes=num.axes, residual=num.residual, restarts_used=num.restarts_used)
    return out


def analyze_point(model: Model, lam: float, opts: PipelineOptions) -> dict:
    q = qfi(model, lam)
    m = m_matrix(model, lam)
    check_m_matrix(m, q)
    n = model.nqubits
    structure = classify_m(m, evolve_state(model, lam))
    lm = _lm_search(m, n, opts)
    if lm["feasible"]:
        meas = LocalMeasurement(lm["axes"])
        lm["cfi"] = cfi(model, meas, lam)
        lm["cfi_over_qfi"] = lm["cfi"] / q if q > 0 else 1.0
        lm["saturation_residual"] = saturation_check(m, meas)[1]
    tree = lmcc_build(m)
    lmcc_cfi = cfi(model, tree, lam)
    if abs(lmcc_cfi - q) > 1e-8 * max(1.0, q):
        raise ArithmeticError(f"LMCC CFI {lmcc_cfi!r} differs from QFI {q!r}")
    report = {
        "lambda": lam,
        "qfi": q,
        "structure": structure.kind,
        "lm": lm,
        "lmcc": {"tree": tree.to_dict(), "cfi": lmcc_cfi},
    }
    if structure.ghz is not None:
        g = structure.ghz
        report["ghz"] = {"indices": list(g.indices), "weight": g.weight, "consistent": g.consistent, "note": g.note}
    return report


def run_pipeline(model: Model, grid, opts: PipelineOptions | None = None) -> list[dict]:
    """One report per grid point; failures are reported in place under ``error``."""
    opts = opts or PipelineOptions()

    def one(lam):
        lam = float(lam)
        try:
            return analyze_point(model, lam, opts)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            return {"lambda": lam, "error": f"{type(exc).__name__}: {exc}"}

    grid = list(grid)
    if opts.workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(opts.workers) as pool:
            return list(pool.map(one, grid))
    return [one(x) for x in grid]


# ---------------------------------------------------------------- output


def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj) -> str:
    """Deterministic JSON with every float written to 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return json.dumps(str(obj))


_CSV_FIELDS = ["lambda", "qfi", "structure", "lm_feasible", "lm_status", "lm_residual",
               "lm_cfi", "lm_cfi_over_qfi", "lmcc_cfi", "error"]


def to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_CSV_FIELDS)
    for r in reports:
        lm = r.get("lm", {})
        row = [r["lambda"], r.get("qfi"), r.get("structure"), lm.get("feasible"), lm.get("status"),
               lm.get("residual"), lm.get("cfi"), lm.get("cfi_over_qfi"),
               r.get("lmcc", {}).get("cfi"), r.get("error", "")]
        w.writerow(["" if v is None else _num(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- commands


def _load_model(args) -> Model:
    if args.catalog:
        try:
            return build_catalog_model(args.catalog, args.n)
        except ValueError as exc:
            raise SpecError(str(exc)) from None
    if not args.model:
        raise SpecError("give --model FILE or --catalog NAME")
    if args.model == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(args.model, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise SpecError(f"cannot read {args.model}: {exc}") from None
    return parse_model_spec(text)


def _opts(args) -> PipelineOptions:
    return PipelineOptions(seed=args.seed, restarts=args.restarts,
                           tolerance=args.tolerance, workers=args.workers)


def _status(reports, require_lm: bool) -> int:
    if any("error" in r for r in reports):
        return EXIT_INVARIANT
    if require_lm and not all(r["lm"]["feasible"] for r in reports):
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_analyze(args, out) -> int:
    model = _load_model(args)
    reports = run_pipeline(model, [args.lam], _opts(args))
    out.write(dumps(reports[0]) + "\n")
    return _status(reports, args.require_lm)


def cmd_sweep(args, out) -> int:
    model = _load_model(args)
    grid = parse_grid(args.lambda_grid) if args.lambda_grid else [args.lam]
    reports = run_pipeline(model, grid, _opts(args))
    if args.format == "csv":
        out.write(to_csv(reports))
    else:
        for r in reports:
            out.write(dumps(r) + "\n")
    return _status(reports, args.require_lm)


def cmd_catalog(args, out) -> int:
    if not args.catalog:
        for e in CATALOG.values():
            out.write(dumps({"name": e.name, "default_n": e.default_n,
                             "expected_feasible": e.expected_feasible, "description": e.description}) + "\n")
        return EXIT_OK
    model = _load_model(args)
    meas, expected = catalog_reference_measurement(args.catalog, model.nqubits, args.lam)
    report = {"name": args.catalog, "n": model.nqubits, "lambda": args.lam, "expected_feasible": expected}
    if meas is not None:
        m = m_matrix(model, args.lam)
        ok, res = saturation_check(m, meas)
        q = qfi(model, args.lam)
        report.update(axes=meas.axes, saturates=ok, saturation_residual=res,
                      hoc_residual=hoc_residual(m, meas.axes), qfi=q, cfi=cfi(model, meas, args.lam))
    else:
        report["pipeline"] = run_pipeline(model, [args.lam], _opts(args))[0]
    out.write(dumps(report) + "\n")
    if meas is not None and not report["saturates"]:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_verify(args, out) -> int:
    model = _load_model(args)
    try:
        axes = np.asarray(json.loads(args.axes), dtype=float)
        axes = axes / np.linalg.norm(axes, axis=1, keepdims=True)
        meas = LocalMeasurement(axes)
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        raise SpecError(f"invalid --axes: {exc}") from None
    if meas.nqubits != model.nqubits:
        raise SpecError(f"need {model.nqubits} axes, got {meas.nqubits}")
    m = m_matrix(model, args.lam)
    ok, res = saturation_check(m, meas)
    q = qfi(model, args.lam)
    c = cfi(model, meas, args.lam)
    out.write(dumps({"lambda": args.lam, "axes": axes, "saturates": ok, "saturation_residual": res,
                     "hoc_residual": hoc_residual(m, axes), "qfi": q, "cfi": c}) + "\n")
    return EXIT_OK if ok else EXIT_INFEASIBLE


def cmd_lmcc(args, out) -> int:
    model = _load_model(args)
    m = m_matrix(model, args.lam)
    order = [int(q) for q in args.order.split(",")] if args.order else None
    tree = lmcc_build(m, order)
    report = {"lambda": args.lam, "qfi": qfi(model, args.lam), "cfi": cfi(model, tree, args.lam),
              "tree": tree.to_dict()}
    out.write(dumps(report) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="JSON model spec file, '-' for stdin")
    common.add_argument("--catalog", help=f"built-in model: {', '.join(CATALOG)}")
    common.add_argument("--n", type=int, help="qubit count for catalog models")
    common.add_argument("--lambda", dest="lam", type=float, default=0.0)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--restarts", type=int, default=20)
    common.add_argument("--tolerance", type=float, default=FEASIBLE_TOL,
                        help="feasibility threshold on the HOC residual")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--require-lm", action="store_true",
                        help="exit 4 unless every point admits a saturating local measurement")

    p = argparse.ArgumentParser(prog="localqcrb", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="full report at one lambda").set_defaults(func=cmd_analyze)
    sw = sub.add_parser("sweep", parents=[common], help="reports over a lambda grid")
    sw.add_argument("--lambda-grid", help="start:stop:count")
    sw.add_argument("--format", choices=["json", "csv"], default="json")
    sw.set_defaults(func=cmd_sweep)
    sub.add_parser("catalog", parents=[common], help="list or check built-in models").set_defaults(func=cmd_catalog)
    v = sub.add_parser("verify", parents=[common], help="check user-supplied axes")
    v.add_argument("--axes", required=True, help="JSON list of Bloch vectors, one per qubit")
    v.set_defaults(func=cmd_verify)
    lm = sub.add_parser("lmcc", parents=[common], help="emit the adaptive measurement tree")
    lm.add_argument("--order", help="comma-separated qubit order, e.g. 2,1,3")
    lm.set_defaults(func=cmd_lmcc)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
