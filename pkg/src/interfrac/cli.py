"""Configuration-driven batch front end.

A scenario is a YAML document naming the material pair, interface law,
crack-face loading and solver settings.  `interfrac run` solves it and
writes a delimited profile table plus a JSON metadata sidecar;
`interfrac oracle-check` solves it along both the collocation and spectral
paths and reports their deviation against a threshold.

Exit codes: 0 success, 2 validation failure, 3 solver/convergence failure,
4 oracle threshold exceeded.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import materials, mode3, mode12, operators, oracle
from .errors import InterfracError, ThresholdError, ValidationError

PROFILE_SCHEMA_VERSION = 1
MODES = ("iii", "i-ii", "constants")

DEFAULT_ORACLE = {"rel_tol": 0.005, "window_scale": 5.0, "xi_max": None, "n_xi": 2**15}


@dataclass(frozen=True)
class Scenario:
    """Resolved scenario: all references checked, objects constructed."""

    name: str
    mode: str
    material_one: object
    material_two: object
    law: materials.InterfaceLaw
    loading: object
    F: float
    l: float
    formulation: str = "t-only"
    grid_params: dict = field(default_factory=dict)
    oracle_params: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def _material_from_spec(spec, where):
    if isinstance(spec, str):
        return materials.material_preset(spec)
    if not isinstance(spec, dict):
        raise ValidationError(f"{where}: material must be a preset name or a mapping")
    keys = set(spec)
    if keys == {"mu23", "mu13"}:
        return materials.compliance_from_shear_moduli(spec["mu23"], spec["mu13"])
    if keys == {"e1", "e2", "e3", "mu12"}:
        return materials.compliance_from_incompressible(
            materials.IncompressibleOrthotropicParams(**spec)
        )
    if keys <= {"s11", "s12", "s22", "s66", "s44", "s55"} and keys:
        return materials.OrthotropicCompliance(**spec)
    raise ValidationError(
        f"{where}: unrecognized material keys {sorted(keys)}; use a preset name, "
        "(mu23, mu13), (e1, e2, e3, mu12) or compliance entries"
    )


def _loading_from_spec(spec, where):
    if not isinstance(spec, list) or not spec:
        raise ValidationError(f"{where}: loading must be a non-empty list of terms")
    terms = []
    for i, term in enumerate(spec):
        try:
            c = term["c"]
            c = tuple(c) if isinstance(c, (list, tuple)) else (c,)
            terms.append(
                materials.LoadTerm(
                    face=term["face"], c=c, l=float(term["l"]), n=int(term["n"])
                )
            )
        except KeyError as exc:
            raise ValidationError(f"{where}: term {i} is missing key {exc}") from None
    return materials.Loading(terms=tuple(terms))


def bundled_scenario_names():
    base = resources.files("interfrac").joinpath("scenarios")
    return sorted(p.name[: -len(".yaml")] for p in base.iterdir() if p.name.endswith(".yaml"))


def load_scenario(ref):
    """Read a scenario mapping from a file path or a bundled scenario name."""
    path = Path(ref)
    if path.exists():
        text = path.read_text()
    else:
        candidate = resources.files("interfrac").joinpath("scenarios", f"{ref}.yaml")
        if not candidate.is_file():
            raise ValidationError(
                f"scenario {ref!r} is neither a file nor a bundled name; "
                f"bundled: {', '.join(bundled_scenario_names())}"
            )
        text = candidate.read_text()
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ValidationError(f"scenario {ref!r} did not parse to a mapping")
    return data


def build_scenario(data):
    """Validate a scenario mapping and construct the domain objects."""
    name = data.get("name")
    if not name:
        raise ValidationError("scenario needs a 'name'")
    mode = data.get("mode")
    if mode not in MODES:
        raise ValidationError(f"scenario {name}: mode must be one of {MODES}")
    m1 = _material_from_spec(data.get("material_one"), f"{name}.material_one")
    m2 = _material_from_spec(data.get("material_two"), f"{name}.material_two")
    norm = data.get("normalization", {})
    F = float(norm.get("F", 1.0))
    l = float(norm.get("l", 1.0))

    iface = data.get("interface", {})
    if not isinstance(iface, dict):
        raise ValidationError(f"{name}: interface must be a mapping")
    kappa = iface.get("kappa")
    if kappa is None and "kappa_star" in iface:
        kappa = float(iface["kappa_star"]) * l * m1.out_of_plane_root()
    law_kwargs = {k: iface[k] for k in ("k11", "k12", "k22") if k in iface}
    if kappa is not None:
        law_kwargs["kappa"] = float(kappa)
    if mode == "constants" and not law_kwargs:
        law = None
    else:
        law = materials.InterfaceLaw(**law_kwargs)

    loading = None
    if mode != "constants":
        loading = _loading_from_spec(data.get("loading"), f"{name}.loading")
        if mode == "iii" and loading.ncomp != 1:
            raise ValidationError(f"{name}: mode iii takes scalar loading terms")
        if mode == "i-ii" and loading.ncomp != 2:
            raise ValidationError(f"{name}: mode i-ii takes 2-component loading terms")
        materials.require_self_balanced(loading)

    formulation = data.get("formulation", "t-only")
    oracle_params = dict(DEFAULT_ORACLE)
    oracle_params.update(data.get("oracle", {}))
    return Scenario(
        name=name,
        mode=mode,
        material_one=m1,
        material_two=m2,
        law=law,
        loading=loading,
        F=F,
        l=l,
        formulation=formulation,
        grid_params=dict(data.get("grid", {})),
        oracle_params=oracle_params,
        raw=data,
    )


def _build_grid(scenario, fallback_scale):
    gp = scenario.grid_params
    n = int(gp.get("n", 400))
    q = float(gp.get("q", 3.0))
    far_factor = float(gp.get("far_factor", operators.FAR_FIELD_FACTOR))
    far_ratio = float(gp.get("far_ratio", operators.FAR_FIELD_RATIO))
    half = gp.get("half_length")
    if half is None:
        half = operators.default_truncation(fallback_scale, scenario.loading.max_scale)
    core = operators.build_grid(float(half), float(half), n, n, q)
    return operators.extend_grid(core, factor=far_factor, ratio=far_ratio)


def _solve(scenario, method="direct"):
    """Solve a scenario; returns (normalized profile, derived-constants dict)."""
    bc = materials.bimaterial_constants(scenario.material_one, scenario.material_two)
    if scenario.mode == "iii":
        kappa = scenario.law.require_mode3()
        grid = _build_grid(scenario, bc.h33 / kappa)
        problem = mode3.Mode3Problem(
            constants=bc,
            kappa=kappa,
            loading=scenario.loading,
            grid=grid,
            formulation=scenario.formulation,
        )
        profile = mode3.solve_mode3(problem, method=method)
        profile = mode3.normalize(profile, scenario.F, scenario.l, scenario.material_one)
        derived = {
            "h33": bc.h33,
            "delta3": bc.delta3,
            "kernel_scale": problem.scale,
            "kappa": kappa,
            "kappa_star": profile.meta["kappa_star"],
        }
        return profile, derived, problem
    ipc = mode12.in_plane_constants(bc, scenario.law)
    grid = _build_grid(scenario, ipc.xi1)
    profile = mode12.solve_mode12(ipc, scenario.law, scenario.loading, grid)
    profile = mode12.normalize(profile, scenario.F, scenario.l)
    derived = ipc.as_dict()
    derived.update(gamma=ipc.gamma)
    return profile, derived, (ipc, grid)


def _derived_constants_only(scenario):
    bc = materials.bimaterial_constants(scenario.material_one, scenario.material_two)
    out = {
        k: getattr(bc, k)
        for k in (
            "h33", "delta3", "h11", "h22", "beta", "gamma", "delta1", "delta2",
            "lambdaI", "lambdaII", "nI", "nII", "rhoI", "rhoII",
        )
        if getattr(bc, k) is not None
    }
    if scenario.law is not None and scenario.law.has_in_plane and bc.has_in_plane:
        out.update(mode12.in_plane_constants(bc, scenario.law).as_dict())
    if scenario.law is not None and scenario.law.has_mode3:
        out["kappa"] = scenario.law.kappa
    return out


def _fmt(v):
    return format(float(v), ".17g")


def write_profile(profile, scenario, out_path):
    """Delimited profile table with a versioned header."""
    ncomp = profile.ncomp
    if ncomp == 1:
        cols = ["x1", "region", "jump_u", "jump_u_star", "traction", "t_star"]
    else:
        cols = ["x1", "region"]
        cols += [f"jump_u_{k}" for k in (1, 2)]
        cols += [f"jump_u_star_{k}" for k in (1, 2)]
        cols += [f"traction_{k}" for k in (1, 2)]
        cols += [f"t_star_{k}" for k in (1, 2)]
    lines = [
        f"# interfrac profile v{PROFILE_SCHEMA_VERSION}",
        f"# scenario={scenario.name} mode={scenario.mode}",
        ",".join(cols),
    ]
    jump = np.atleast_2d(profile.jump.T).T
    jstar = np.atleast_2d(profile.jump_star.T).T
    trac = np.atleast_2d(profile.traction.T).T
    tstar = np.atleast_2d(profile.traction_star.T).T
    for i, x in enumerate(profile.x1):
        row = [_fmt(x), profile.region[i]]
        row += [_fmt(v) for v in jump[i]]
        row += [_fmt(v) for v in jstar[i]]
        row += [_fmt(v) for v in trac[i]]
        row += [_fmt(v) for v in tstar[i]]
        lines.append(",".join(row))
    out_path.write_text("\n".join(lines) + "\n")


def write_metadata(meta, out_path):
    out_path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=float) + "\n")


def run_scenario(scenario, out_dir, method="direct"):
    """Solve and write profile + metadata; returns the metadata mapping."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "schema_version": PROFILE_SCHEMA_VERSION,
        "scenario": scenario.raw,
        "normalization": {"F": scenario.F, "l": scenario.l},
    }
    if scenario.mode == "constants":
        meta["derived_constants"] = _derived_constants_only(scenario)
        write_metadata(meta, out_dir / f"{scenario.name}.meta.json")
        return meta
    profile, derived, _ = _solve(scenario, method=method)
    meta["derived_constants"] = derived
    meta["solver"] = profile.meta
    write_profile(profile, scenario, out_dir / f"{scenario.name}.profile.csv")
    write_metadata(meta, out_dir / f"{scenario.name}.meta.json")
    return meta


def oracle_report(scenario):
    """Solve along both paths and compare inside the configured window."""
    if scenario.mode == "constants":
        raise ValidationError("oracle check applies to solving scenarios only")
    profile, derived, extra = _solve(scenario)
    params = scenario.oracle_params
    xi_max = params.get("xi_max") or 80.0 / scenario.loading.max_scale
    cfg = oracle.SpectralConfig(xi_max=float(xi_max), n_xi=int(params["n_xi"]))
    if scenario.mode == "iii":
        spectral = oracle.spectral_solve_mode3(extra, cfg)
    else:
        ipc, _ = extra
        spectral = oracle.spectral_solve_mode12(ipc, scenario.law, scenario.loading, cfg)
    window = float(params["window_scale"]) * scenario.loading.max_scale
    cmp = oracle.compare_profiles(profile, spectral, window=window)
    report = {
        "scenario": scenario.name,
        "mode": scenario.mode,
        "window": window,
        "rel_tol": float(params["rel_tol"]),
        "comparison": cmp,
        "spectral": spectral.meta,
        "passed": bool(cmp["overall_max"] <= float(params["rel_tol"])),
    }
    return report


def _cmd_run(args):
    for ref in args.scenario:
        data = load_scenario(ref)
        if args.formulation:
            data["formulation"] = args.formulation
        grid = data.setdefault("grid", {})
        if args.grid_n:
            grid["n"] = args.grid_n
        if args.grid_q:
            grid["q"] = args.grid_q
        if args.half_length:
            grid["half_length"] = args.half_length
        scenario = build_scenario(data)
        meta = run_scenario(scenario, args.out, method=args.method)
        print(f"{scenario.name}: wrote profile and metadata to {args.out}")
        if args.oracle_check:
            report = oracle_report(scenario)
            write_metadata(report, Path(args.out) / f"{scenario.name}.oracle.json")
            status = "pass" if report["passed"] else "FAIL"
            print(
                f"{scenario.name}: oracle {status} "
                f"(max dev {report['comparison']['overall_max']:.3e}, "
                f"tol {report['rel_tol']:.3e})"
            )
            if not report["passed"]:
                raise ThresholdError(
                    f"{scenario.name}: dual-path deviation "
                    f"{report['comparison']['overall_max']:.3e} exceeds "
                    f"{report['rel_tol']:.3e}"
                )
    return 0


def _cmd_oracle_check(args):
    failed = []
    for ref in args.scenario:
        data = load_scenario(ref)
        if args.rel_tol:
            data.setdefault("oracle", {})["rel_tol"] = args.rel_tol
        scenario = build_scenario(data)
        report = oracle_report(scenario)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_metadata(report, out_dir / f"{scenario.name}.oracle.json")
        status = "pass" if report["passed"] else "FAIL"
        print(
            f"{scenario.name}: {status} crack={report['comparison']['crack']['max']:.3e} "
            f"interface={report['comparison']['interface']['max']:.3e} "
            f"tol={report['rel_tol']:.3e}"
        )
        if not report["passed"]:
            failed.append(scenario.name)
    if failed:
        raise ThresholdError(f"oracle threshold exceeded for: {', '.join(failed)}")
    return 0


def _cmd_list(args):
    for name in bundled_scenario_names():
        print(name)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="interfrac",
        description="Crack-on-imperfect-interface integral equation solvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve scenarios and write profiles")
    run.add_argument("scenario", nargs="+", help="scenario file path or bundled name")
    run.add_argument("--out", default="out", help="output directory (default: out)")
    run.add_argument(
        "--method", choices=("direct", "fixed-point"), default="direct",
        help="linear solve strategy (default: direct)",
    )
    run.add_argument(
        "--formulation", choices=mode3.FORMULATIONS, default=None,
        help="override the mode III formulation (default: scenario value or t-only)",
    )
    run.add_argument("--grid-n", type=int, default=None, help="core nodes per side")
    run.add_argument("--grid-q", type=float, default=None, help="grading exponent")
    run.add_argument(
        "--half-length", type=float, default=None,
        help="core truncation half-length (default: kernel/loading rule)",
    )
    run.add_argument(
        "--oracle-check", action="store_true",
        help="also run the spectral cross-check after solving",
    )
    run.set_defaults(func=_cmd_run)

    check = sub.add_parser("oracle-check", help="dual-path comparison only")
    check.add_argument("scenario", nargs="+")
    check.add_argument("--out", default="out")
    check.add_argument(
        "--rel-tol", type=float, default=None,
        help="override the scenario's threshold",
    )
    check.set_defaults(func=_cmd_oracle_check)

    lst = sub.add_parser("list-scenarios", help="print bundled scenario names")
    lst.set_defaults(func=_cmd_list)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InterfracError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
