"""Command-line front end: build a case, run checks, emit JSON certificates.

Exit codes: 0 all checks pass, 1 a check failed, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

COMMANDS = ("verify", "index", "kronecker", "brailov", "rais", "stabilizer",
            "torsion", "integrate", "involution", "pencil-ranks", "all")

DEFAULTS = {"seed": 42, "step": 1e-3, "duration": 10.0, "samples": 5}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    family: str
    n: int
    lambda1: Fraction
    lambda2: Fraction
    command: str
    seed: int = 42
    step: float = 1e-3
    duration: float = 10.0
    samples: int = 5
    lambda_grid: list[float] | None = None
    out: str | None = None
    csv: str | None = None

    def validate(self) -> None:
        if self.family not in ("a", "b"):
            raise ConfigError(f"family must be 'a' or 'b', got {self.family!r}")
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if self.step <= 0:
            raise ConfigError("step must be positive")
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if self.lambda1 == self.lambda2:
            raise ConfigError("lambda1 and lambda2 must be distinct")
        if self.lambda1 == 0 or self.lambda2 == 0:
            raise ConfigError("eigenvalues must be nonzero")
        if self.samples < 3:
            raise ConfigError("samples must be >= 3")
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")


def _parse_fraction(text: str, key: str) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"malformed number for {key!r}: {text!r}") from exc


def _parse_config_file(path: str) -> dict:
    """Flat key=value lines or a JSON object; errors carry line numbers."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top-level JSON value must be an object")
        return data
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def load_config(argv: list[str]) -> RunConfig:
    """Flags override config-file values; defaults fill the rest."""
    parser = argparse.ArgumentParser(
        prog="nijflow",
        description="integrability certificates for the two homogeneous series")
    parser.add_argument("--family", choices=["a", "b"])
    parser.add_argument("--n", type=int)
    parser.add_argument("--lambda1")
    parser.add_argument("--lambda2")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--step", type=float)
    parser.add_argument("--duration", type=float)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--lambda-grid", dest="lambda_grid",
                        help="comma-separated pencil parameters")
    parser.add_argument("--out", help="write the JSON report here")
    parser.add_argument("--csv", help="write trajectory time series here (integrate/all)")
    parser.add_argument("--config", help="key=value or JSON config file")
    parser.add_argument("command", choices=COMMANDS)
    ns = parser.parse_args(argv)

    raw: dict = {}
    if ns.config:
        if not Path(ns.config).exists():
            raise ConfigError(f"config file not found: {ns.config}")
        raw.update(_parse_config_file(ns.config))
    for key in ("family", "n", "lambda1", "lambda2", "seed", "step", "duration",
                "samples", "lambda_grid", "out", "csv"):
        val = getattr(ns, key)
        if val is not None:
            raw[key] = val
    raw["command"] = ns.command

    for key in ("family", "n", "lambda1", "lambda2"):
        if key not in raw:
            raise ConfigError(f"missing required option {key!r}")
    grid = raw.get("lambda_grid")
    if isinstance(grid, str):
        try:
            grid = [float(x) for x in grid.split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError(f"malformed number for 'lambda_grid': {grid!r}") from exc

    def as_int(key, default=None):
        v = raw.get(key, default)
        try:
            return int(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed number for {key!r}: {v!r}") from exc

    def as_float(key, default=None):
        v = raw.get(key, default)
        try:
            return float(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed number for {key!r}: {v!r}") from exc

    cfg = RunConfig(
        family=str(raw["family"]).lower(),
        n=as_int("n"),
        lambda1=_parse_fraction(raw["lambda1"], "lambda1"),
        lambda2=_parse_fraction(raw["lambda2"], "lambda2"),
        command=raw["command"],
        seed=as_int("seed", DEFAULTS["seed"]),
        step=as_float("step", DEFAULTS["step"]),
        duration=as_float("duration", DEFAULTS["duration"]),
        samples=as_int("samples", DEFAULTS["samples"]),
        lambda_grid=grid,
        out=raw.get("out"),
        csv=raw.get("csv"),
    )
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

def _check(name: str, passed: bool, values: dict, thresholds: dict) -> dict:
    clean = {}
    for k, v in values.items():
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        if isinstance(v, Fraction):
            v = str(v)
        clean[k] = v
    return {"name": name, "pass": bool(passed), "values": clean, "thresholds": thresholds}


def _run_checks(cfg: RunConfig) -> tuple[list[dict], dict]:
    from . import cases, flows, indexes, nijenhuis
    from .liealg import jacobi_residual, matrix_consistency_residual

    case = cases.build_case(cfg.family.upper(), cfg.n, cfg.lambda1, cfg.lambda2)
    checks: list[dict] = []
    counters: dict = {"case_dim": case.g.dim}
    want = cfg.command

    def on(cmd):
        return want in (cmd, "all")

    if on("verify"):
        jr = jacobi_residual(case.g)
        mr = matrix_consistency_residual(case.g)
        checks.append(_check("jacobi_residual", jr == 0, {"residual": float(jr)},
                             {"residual": 0}))
        checks.append(_check("matrix_realization", mr == 0, {"residual": float(mr)},
                             {"residual": 0}))
        rep = nijenhuis.verify_decomposition(case.g, [case.g1, case.g2], case.k)
        checks.append(_check(
            "decomposition", rep.all_pass,
            {"intersections_equal_k": rep.intersections_equal_k,
             "quotient_direct": rep.quotient_direct,
             "pair_sums_subalgebras": rep.pair_sums_subalgebras,
             "part_dims": rep.details["part_dims"]},
            {"all": True}))
        N = nijenhuis.invariant_N_from_case(case)
        adres = nijenhuis.ad_invariance_residual(N, case.k)
        checks.append(_check("operator_ad_invariance", adres == 0,
                             {"residual": float(adres)}, {"residual": 0}))
        sym = nijenhuis.symmetrization_matches_inertia(case)
        checks.append(_check("inertia_symmetrization", sym == 0,
                             {"residual": float(sym)}, {"residual": 0}))
        spec = cases.inertia_spectrum(case)
        lo, hi = cases.positivity_window(float(cfg.lambda1))
        inside = lo < float(cfg.lambda2) < hi
        checks.append(_check(
            "inertia_positivity", (spec.min() > 0) == inside,
            {"min_eigenvalue": float(spec.min()), "window": [lo, hi],
             "lambda2_inside_window": inside},
            {"consistency": "positive iff lambda2 in window"}))

    if on("index"):
        expected = 2 * cfg.n - 1 if cfg.family == "a" else cfg.n + 1
        rep_e = indexes.lie_index(case.g, samples=cfg.samples, seed=cfg.seed)
        rep_f = indexes.lie_index(case.g, samples=cfg.samples,
                                  method="floating_svd", seed=cfg.seed)
        counters["index_samples"] = cfg.samples
        checks.append(_check(
            "lie_index", rep_e.index == expected and rep_f.index == expected,
            {"exact": rep_e.index, "floating": rep_f.index,
             "per_sample_coranks": list(rep_e.per_sample_coranks)},
            {"expected": expected}))

    if on("kronecker"):
        kr = indexes.kronecker_check(case, samples=cfg.samples, seed=cfg.seed)
        checks.append(_check(
            "kronecker", kr.all_pass,
            {"index_g": kr.index_g,
             "contractions": {lbl: ci for lbl, ci, _ in kr.per_part}},
            {"equal": "contraction indices match ind g"}))

    if on("brailov"):
        for label, sub in (("g1", case.g1), ("g2", case.g2)):
            br = indexes.brailov_check(case.g, sub, samples=cfg.samples, seed=cfg.seed)
            checks.append(_check(
                f"brailov_{label}", br["pass"],
                {"index_g": br["index_g"], "contraction_index": br["contraction_index"]},
                {"equal": True}))

    if on("rais"):
        for label, sub in (("gcheck1=g2", case.g2), ("gcheck2=g1", case.g1)):
            rr = indexes.rais_check(case.g, sub, trials=10, seed=cfg.seed,
                                    samples=cfg.samples)
            checks.append(_check(
                f"rais_{label}",
                rr.generic_fraction >= 0.9 and rr.all_generic_agree,
                {"contraction_index": rr.contraction_index,
                 "generic_fraction": rr.generic_fraction,
                 "totals": [s.total for s in rr.samples]},
                {"generic_fraction": 0.9}))

    if on("stabilizer"):
        sdim = indexes.witness_stabilizer_dim(case)
        rand = indexes.random_stabilizer_dims(case, count=10, seed=cfg.seed)
        checks.append(_check(
            "stabilizer_witness", sdim == 0 and all(d == 0 for d in rand),
            {"witness_dim": sdim, "random_dims": rand}, {"dim": 0}))

    if on("torsion"):
        from .rational import fr
        idn = nijenhuis.NijenhuisOperator.from_matrix(
            case.g, [[1 if i == j else 0 for j in range(case.g.dim)]
                     for i in range(case.g.dim)])
        tid = nijenhuis.torsion_residual(idn)
        vals = {"identity": float(tid)}
        ok = tid == 0
        for m in (3, 4):
            A = [[fr(i + 1) if i == j else fr(0) for j in range(m)] for i in range(m)]
            _, _, _, op = nijenhuis.build_example("left_mult", A=A)
            tl = nijenhuis.torsion_residual(op)
            vals[f"left_mult_gl{m}"] = float(tl)
            ok = ok and tl == 0
        checks.append(_check("torsion", ok, vals, {"residual": 0}))

    if on("involution"):
        fam = flows.build_family(case, "AB", lambda_grid=cfg.lambda_grid, seed=cfg.seed)
        mx, _ = flows.involution_matrix(case, fam, points=20, seed=cfg.seed)
        geom = flows.get_geometry(case)
        control = flows.RawMomentumCoordinate(geom, 0)
        cmx, _ = flows.involution_matrix(case, list(fam) + [control],
                                         points=5, seed=cfg.seed)
        rk, per = flows.independence_rank(case, fam, points=20, seed=cfg.seed)
        counters["family_size"] = len(fam)
        checks.append(_check(
            "involution", mx <= 1e-9 and cmx > 1e-3,
            {"max_bracket": mx, "negative_control": cmx},
            {"max_bracket": 1e-9, "negative_control_min": 1e-3}))
        expected_rank = case.dim_m
        good = sum(1 for r in per if r == expected_rank)
        checks.append(_check(
            "independence_rank", good >= 18,
            {"rank": rk, "per_point": per, "points_at_expected": good},
            {"expected": expected_rank, "min_points": 18}))

    if on("pencil-ranks"):
        geom = flows.get_geometry(case)
        generic_t = next(t for t in (7.0, 11.0, 13.0)
                         if abs(t - geom.lam1) > 1e-9 and abs(t - geom.lam2) > 1e-9)
        expect = {generic_t: 2 * geom.dm,
                  geom.lam1: 2 * geom.dm - 2 * case.k1.dim,
                  geom.lam2: 2 * geom.dm - 2 * case.k2.dim}
        values, ok = {}, True
        for tval, want_rank in expect.items():
            rep = flows.pencil_rank_probe(case, tval, points=5, seed=cfg.seed)
            values[f"t={tval:g}"] = {"ranks": rep.ranks, "expected": want_rank,
                                     "span": rep.span_ranks}
            ok = ok and all(r == want_rank for r in rep.ranks) and rep.span_ok
        checks.append(_check("pencil_ranks", ok, values, {"span": 2 * geom.dm}))

    if on("integrate"):
        fam = flows.build_family(case, "AB", lambda_grid=cfg.lambda_grid, seed=cfg.seed)
        x0 = flows.random_phase_points(case, 1, seed=cfg.seed)[0]
        res = flows.integrate(case, "inertia", x0, cfg.step, cfg.duration, family=fam)
        r = res.report
        counters["integration_steps"] = int(round(cfg.duration / cfg.step))
        worst_int = max(r.per_integral_drifts.values()) if r.per_integral_drifts else 0.0
        ok = (r.energy_drift <= 1e-8 and r.mu_drift <= 1e-7
              and worst_int <= 1e-6 and r.unitarity_drift <= 1e-10)
        checks.append(_check(
            "conservation_inertia", ok,
            {"energy_drift": r.energy_drift, "mu_drift": r.mu_drift,
             "max_integral_drift": worst_int, "unitarity_drift": r.unitarity_drift,
             "k_component_drift": r.k_component_drift},
            {"energy": 1e-8, "mu": 1e-7, "integral": 1e-6, "unitarity": 1e-10}))
        import scipy.linalg
        geom = flows.get_geometry(case)
        resn = flows.integrate(case, "normal", x0, cfg.step, 1.0)
        gT = resn.sampled_states[-1][1]
        closed = x0.g @ scipy.linalg.expm(geom.rep_m(np.asarray(x0.p, float)))
        errn = float(np.abs(gT - closed).max())
        checks.append(_check("normal_closed_form", errn <= 1e-6,
                             {"error": errn}, {"error": 1e-6}))
        if cfg.csv:
            _write_csv(cfg.csv, case, res, fam)

    return checks, counters


def _write_csv(path: str, case, result, family) -> None:
    """Time series: t, H, unitarity, plus each family member value."""
    from .flows import EvalPoint, PhasePoint, get_geometry, hamiltonian, unitarity_defect

    geom = get_geometry(case)
    header = ["t", "H", "unitarity"] + [F.name for F in family]
    lines = [",".join(header)]
    for (t, g, p) in result.sampled_states:
        ep = EvalPoint(geom, PhasePoint(g, p))
        row = [f"{t:.9g}", f"{hamiltonian(case, 'inertia', PhasePoint(g, p)):.17g}",
               f"{unitarity_defect(g):.3e}"]
        row += [f"{F.value(ep):.17g}" for F in family]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_report(cfg: RunConfig, checks: list[dict], counters: dict) -> str:
    from . import __version__

    report = {
        "meta": {
            "version": __version__,
            "command": cfg.command,
            "case": {"family": cfg.family, "n": cfg.n,
                     "lambda1": str(cfg.lambda1), "lambda2": str(cfg.lambda2)},
            "seed": cfg.seed,
            "step": cfg.step,
            "duration": cfg.duration,
            "samples": cfg.samples,
            "lambda_grid": cfg.lambda_grid,
        },
        "checks": checks,
        "timings": counters,
    }
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    validate_report(json.loads(text))
    if cfg.out:
        Path(cfg.out).write_text(text)
    return text


def validate_report(report: dict) -> None:
    import jsonschema

    schema = json.loads(
        resources.files("nijflow").joinpath("report-schema.json").read_text())
    jsonschema.validate(report, schema)


def run_command(cfg: RunConfig) -> int:
    checks, counters = _run_checks(cfg)
    text = write_report(cfg, checks, counters)
    failing = [c["name"] for c in checks if not c["pass"]]
    for c in checks:
        status = "PASS" if c["pass"] else "FAIL"
        print(f"[{status}] {c['name']}")
    if cfg.out:
        print(f"report written to {cfg.out}")
    else:
        print(text, end="")
    if failing:
        print(f"FAILED: {', '.join(failing)}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = load_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse error
        return 2 if exc.code not in (0, None) else 0
    try:
        return run_command(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
