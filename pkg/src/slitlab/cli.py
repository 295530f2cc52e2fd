"""Command line front end: ``slitlab <subcommand> [--config FILE] [--flag value ...]``.

Every parameter can come from a flat ``key = value`` config file (keys are
the flag names, dashes or underscores) and be overridden on the command
line.  Artifacts are staged in a hidden directory and renamed into the
output directory only when the whole experiment succeeded.

Exit status: 0 success, 2 configuration error (nothing written), 3 numerical
failure (only ``diagnostic.txt`` is written).
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import math
import os
import platform
import shutil
import sys
import tempfile
import traceback
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
import scipy

from . import __version__, kernels
from .errors import ConfigurationError, NumericalError
from .geometry import BC, ConfocalEllipse, DomainSpec, SlitSpec, parse_key_values
from .io import atomic_open, svg_lines, write_csv

log = logging.getLogger("slitlab")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
DIAGNOSTIC = "diagnostic.txt"
MANIFEST = "manifest.json"


# -- parameter parsing -------------------------------------------------------


def _float(s) -> float:
    try:
        v = float(s)
    except (TypeError, ValueError):
        raise ConfigurationError(f"not a number: {s!r}") from None
    if not math.isfinite(v):
        raise ConfigurationError(f"not a finite number: {s!r}")
    return v


def _positive(s) -> float:
    v = _float(s)
    if v <= 0:
        raise ConfigurationError(f"must be positive: {s!r}")
    return v


def _nonneg(s) -> float:
    v = _float(s)
    if v < 0:
        raise ConfigurationError(f"must be nonnegative: {s!r}")
    return v


def _count(s) -> int:
    try:
        v = int(str(s))
    except ValueError:
        raise ConfigurationError(f"not an integer: {s!r}") from None
    if v < 1:
        raise ConfigurationError(f"must be >= 1: {s!r}")
    return v


def _index(s) -> int:
    try:
        v = int(str(s))
    except ValueError:
        raise ConfigurationError(f"not an integer: {s!r}") from None
    if v < 0:
        raise ConfigurationError(f"must be >= 0: {s!r}")
    return v


def _resolution(s) -> float:
    v = _float(s)
    if v < 8:
        raise ConfigurationError(f"resolution must be >= 8, got {s!r}")
    return v


def _bc(s) -> BC:
    return BC.parse(s)


def _flag(s) -> bool:
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {s!r}")


def _float_list(s) -> list[float]:
    s = str(s).strip()
    return [_float(p) for p in s.split(",") if p.strip()] if s else []


def parse_t_grid(s) -> np.ndarray:
    """``"0.2,0.1,0.05"`` or ``"geom:START:RATIO:COUNT"``."""
    s = str(s).strip()
    if s.startswith("geom:"):
        parts = s[5:].split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"geometric grid needs geom:START:RATIO:COUNT, got {s!r}")
        start, ratio, n = _positive(parts[0]), _positive(parts[1]), _count(parts[2])
        grid = start * ratio ** np.arange(n)
    else:
        grid = np.array(_float_list(s))
    if len(grid) == 0:
        raise ConfigurationError("empty t grid")
    if np.any(grid <= 0) or np.any(np.diff(grid) >= 0):
        raise ConfigurationError("t grid must be positive and strictly decreasing")
    return grid


@dataclass(frozen=True)
class Param:
    name: str
    conv: Callable[[Any], Any]
    default: Any
    help: str


@dataclass
class ExperimentConfig:
    command: str
    out: Path
    domain_path: str | None = None
    domain: DomainSpec | None = None
    params: dict[str, Any] = field(default_factory=dict)
    raw: dict[str, str] = field(default_factory=dict)

    def __getitem__(self, key):
        return self.params[key]

    def echo(self) -> dict[str, str]:
        """The effective configuration as strings (the manifest record)."""
        out = {"command": self.command, "out": str(self.out)}
        if self.domain_path is not None:
            out["domain"] = self.domain_path
        for k, v in self.params.items():
            if isinstance(v, np.ndarray):
                v = ",".join(repr(float(x)) for x in v)
            elif isinstance(v, list):
                v = ",".join(repr(float(x)) for x in v)
            elif isinstance(v, BC):
                v = v.value
            elif isinstance(v, float):
                v = repr(v)
            out[k] = "" if v is None else str(v)
        return out


# -- experiments --------------------------------------------------------------


def _spectrum_values_svg(path, t, values, title):
    series = {f"k={b}": (list(t), list(values[:, b])) for b in range(values.shape[1])}
    svg_lines(path, series, title=title, xlabel="t", ylabel="E", logx=len(t) > 1)


def run_mathieu(cfg: ExperimentConfig, out: Path) -> dict:
    from .mathieu import angular_spectrum, radial_solve, write_table

    modes = angular_spectrum(cfg["h"], cfg["modes"], cfg["truncation"])
    write_table(out / "mathieu.csv", modes)
    if cfg["x_max"] is not None:
        for m in modes:
            sol = radial_solve(m.index_i, m.h, m.b, cfg["bc"], cfg["x_max"], tol=cfg["tol"])
            sol.to_csv(out / f"radial_{m.index_i}.csv")
    return {"b": [float(m.b) for m in modes]}


def _sov_problem(cfg: ExperimentConfig):
    if cfg.domain is not None:
        spec = cfg.domain
        if not isinstance(spec.outer, ConfocalEllipse):
            raise ConfigurationError("sov needs a confocal_ellipse domain")
        s = spec.slits[0]
        return s.half_length_t, spec.outer.x0, s.condition, spec.outer_bc["outer"]
    t = cfg["t"]
    return t, math.asinh(cfg["r0"] / t), cfg["slit_bc"], cfg["outer_bc"]


def run_sov(cfg: ExperimentConfig, out: Path) -> dict:
    from .sov import eigenvalues_sov, write_csv as write_sov

    t, x0, sbc, obc = _sov_problem(cfg)
    eigs = eigenvalues_sov(t, x0, sbc, obc, cfg["e_max"], per_index_count=cfg["per_index"], rtol=cfg["rtol"])
    write_sov(out / "sov.csv", eigs)
    return {"count": len(eigs), "t": t, "x0": x0}


def _template(cfg: ExperimentConfig):
    from .fem.mesh import build_template

    return build_template(cfg.domain, cfg["resolution"])


def _default_t(spec: DomainSpec) -> float:
    return spec.slits[0].half_length_t if spec.slits else 1.0


def run_fem_solve(cfg: ExperimentConfig, out: Path) -> dict:
    from .fem.mesh import instantiate, write_mesh
    from .fem.solver import solve_mesh

    tmpl = _template(cfg)
    t = cfg["t"] if cfg["t"] is not None else _default_t(cfg.domain)
    spec, system = solve_mesh(tmpl, t, min(cfg["k"], tmpl.n_nodes), cfg.domain)
    spec.to_csv(out / "spectrum.csv")
    write_mesh(out / "mesh.txt", tmpl, instantiate(tmpl, t).coords)
    return {"t": t, "n_nodes": tmpl.n_nodes, "n_free": system.n_free, "method": spec.method}


def _track(cfg: ExperimentConfig, k: int):
    from .analysis.branches import track_branches

    tmpl = _template(cfg)
    return track_branches(tmpl, cfg["t_grid"], k, cfg.domain, buffer=cfg["buffer"])


def run_track(cfg: ExperimentConfig, out: Path) -> dict:
    from .analysis.branches import extrapolate_limit

    br = _track(cfg, cfg["k"])
    br.to_csv(out / "branches.csv")
    rows = []
    if len(br.t_grid) >= 4:
        for b in range(br.n_branches):
            ex = extrapolate_limit(br.t_grid, br.values[:, b])
            rows.append([b, ex.E0, ex.c, ex.p, ex.residual, ex.t2E_last, int(ex.t2E_decreasing),
                         int(ex.accepted), ex.message])
        write_csv(out / "extrapolation.csv",
                  ["k", "E0", "c", "p", "residual", "t2E_last", "t2E_decreasing", "accepted", "message"], rows)
    if cfg["plot"]:
        _spectrum_values_svg(out / "branches.svg", br.t_grid, br.values, "tracked branches")
    return {"warnings": list(br.warnings)}


def run_audit(cfg: ExperimentConfig, out: Path) -> dict:
    from .analysis.audits import mode_estimates, nonconcentration_report, variation_audit
    from .fem.solver import relative_gap

    b = cfg["branch"]
    br = _track(cfg, max(cfg["k"], b + 1))
    spec = cfg.domain
    if not spec.slits:
        raise ConfigurationError("audit needs a domain with a slit")
    r0 = cfg["r0"] if cfg["r0"] is not None else spec.chart_radius_r0
    r_star = cfg["r_star"] if cfg["r_star"] is not None else 0.5 * r0
    var = variation_audit(br, b, r0=r0, delta_frac=cfg["delta_frac"])
    mass = nonconcentration_report(br, b, r_star)
    rows = []
    for j, (vr, mr) in enumerate(zip(var.rows, mass)):
        f = vr.forms
        gap = min(relative_gap(br.spectra[j].eigenvalues, m) for m in range(br.n_branches))
        rows.append([vr.t, vr.t ** 2 * vr.E, vr.lam, vr.kappa,
                     f.q_U if f else None, f.N_U if f else None, f.qdot_U if f else None, f.Ndot_U if f else None,
                     mr.ratio, gap])
    write_csv(out / "diagnostics.csv",
              ["t", "t2E", "lambda", "kappa", "qU", "NU", "qdotU", "NdotU", "mass_ratio", "min_gap"], rows)
    summary = [["C_fit", var.C_fit, var.C_fit_t], ["kappa_max", var.kappa_max, var.kappa_max_t]]
    if cfg["modes"]:
        mode_rows = []
        for j, t in enumerate(br.t_grid):
            if t > cfg["mode_t_max"]:
                continue
            rep = mode_estimates(br, b, j, r0=r0, n_modes=cfg["n_modes"])
            for m in rep.modes:
                mode_rows.append([rep.t, m.i, m.energy_fraction, m.exp_der, m.exp_norm, m.exp_nco2])
            summary.append(["epsilon", rep.epsilon, rep.t])
            summary.append(["parseval_defect", rep.parseval_defect, rep.t])
        write_csv(out / "modes.csv", ["t", "i", "energy_fraction", "exp_der", "exp_norm", "exp_nco2"], mode_rows)
    write_csv(out / "summary.csv", ["quantity", "value", "t"], summary)
    return {"notes": list(var.notes)}


def run_symmetry(cfg: ExperimentConfig, out: Path) -> dict:
    from .analysis.symmetry import symmetry_reduction_check

    a = cfg["a"]
    centers = cfg["centers"] if cfg["centers"] is not None else [0.5 * a]
    rep = symmetry_reduction_check(a, centers, cfg["t"], cfg["slit_bc"], cfg["resolution"],
                                   n_compare=cfg["n_compare"], threshold=cfg["threshold"])
    rows = [[j, rep.full[j], rep.merged[j], rep.rel_errors[j]] for j in range(len(rep.rel_errors))]
    write_csv(out / "symmetry.csv", ["j", "full", "merged", "rel_error"], rows)
    write_csv(out / "symmetry_counts.csv", ["threshold", "count_full", "count_merged"],
              [[rep.threshold, rep.count_full, rep.count_merged]])
    return {"max_rel_error": rep.max_rel_error, "counts_agree": rep.counts_agree}


def run_gap_scan(cfg: ExperimentConfig, out: Path) -> dict:
    from .analysis.symmetry import gap_scan

    tmpl = _template(cfg)
    grid = cfg["t_grid"] if cfg.domain.slits else np.array([1.0])
    scan = gap_scan(tmpl, grid, cfg["k"], cfg.domain, threshold=cfg["threshold"])
    rows = [[t, g, int(np.argmin(row))] for t, g, row in zip(scan.t_grid, scan.min_gap, scan.gaps)]
    write_csv(out / "gaps.csv", ["t", "min_gap", "pair"], rows)
    write_csv(out / "candidates.csv", ["t", "pair", "gap"], [list(c) for c in scan.candidates])
    if cfg["plot"] and len(scan.t_grid) > 1:
        svg_lines(out / "gaps.svg", {"min gap": (list(scan.t_grid), list(scan.min_gap))},
                  title="minimal relative gap", xlabel="t", ylabel="gap", logx=True)
    return {"isolated": scan.isolated, "n_candidates": len(scan.candidates)}


def run_cross_validate(cfg: ExperimentConfig, out: Path) -> dict:
    from .fem.mesh import build_template
    from .fem.solver import solve_mesh
    from .sov import eigenvalues_sov

    t, r0, k = cfg["t"], cfg["r0"], cfg["k"]
    x0 = math.asinh(r0 / t)
    spec = DomainSpec(outer=ConfocalEllipse(x0), slits=[SlitSpec((0.0, 0.0), 0.0, t, cfg["slit_bc"])],
                      outer_bc={"outer": cfg["outer_bc"]})
    E_max = 4.0 * math.pi * (k + 4) / spec.area
    while True:
        eigs = eigenvalues_sov(t, x0, cfg["slit_bc"], cfg["outer_bc"], E_max)
        if len(eigs) >= k:
            break
        E_max *= 2.0
    ref = np.array([e.E for e in eigs[:k]])
    fem = []
    for res in (cfg["resolution"], 2 * cfg["resolution"]):
        s, _ = solve_mesh(build_template(spec, res), t, k, spec)
        fem.append(s.eigenvalues[:k])
    err = [np.abs(f - ref) / np.abs(np.where(ref == 0, 1.0, ref)) for f in fem]
    rows = [[j, ref[j], fem[0][j], fem[1][j], err[0][j], err[1][j]] for j in range(k)]
    write_csv(out / "cross_validate.csv", ["k", "E_sov", "E_fem", "E_fem_refined", "rel_err", "rel_err_refined"], rows)
    return {"max_rel_err_refined": float(np.max(err[1]))}


_T_GRID = Param("t_grid", parse_t_grid, None, "decreasing slit half-lengths: list a,b,c or geom:START:RATIO:COUNT")
_RES = Param("resolution", _resolution, 16.0, "elements per unit length (>= 8)")
_PLOT = Param("plot", _flag, True, "write SVG plots (1/0)")

COMMANDS: dict[str, tuple[str, bool | None, list[Param], Callable]] = {
    # name: (help, domain required (None = optional), params, runner)
    "mathieu": ("angular Mathieu table and optional radial dumps", False, [
        Param("h", _nonneg, 0.1, "Mathieu parameter h"),
        Param("modes", _count, 5, "number of modes"),
        Param("truncation", lambda s: None if s in (None, "") else _count(s), None, "max harmonic (default automatic)"),
        Param("x_max", lambda s: None if s in (None, "") else _positive(s), None, "radial dump range (omit to skip)"),
        Param("bc", _bc, BC.DIRICHLET, "radial start condition at x=0"),
        Param("tol", _positive, 1e-10, "radial integration tolerance"),
    ], run_mathieu),
    "sov": ("separated-variables eigenvalues of the slit ellipse", None, [
        Param("t", _positive, 0.3, "slit half-length (ignored with --domain)"),
        Param("r0", _positive, 1.0, "outer radius r0 = t sinh(x0) (ignored with --domain)"),
        Param("slit_bc", _bc, BC.DIRICHLET, "slit condition"),
        Param("outer_bc", _bc, BC.DIRICHLET, "outer condition"),
        Param("e_max", _positive, 30.0, "largest eigenvalue sought"),
        Param("per_index", lambda s: None if s in (None, "") else _count(s), None, "roots kept per angular index"),
        Param("rtol", _positive, 1e-9, "relative root tolerance"),
    ], run_sov),
    "fem-solve": ("P1 eigenpairs at one slit length", True, [
        _RES, Param("k", _count, 10, "number of eigenpairs"),
        Param("t", lambda s: None if s in (None, "") else _positive(s), None, "slit half-length (default: domain value)"),
    ], run_fem_solve),
    "track": ("eigenbranches over a decreasing t grid", True, [
        _RES, Param("k", _count, 6, "number of branches"), _T_GRID,
        Param("buffer", _index, 5, "extra eigenpairs solved for matching"), _PLOT,
    ], run_track),
    "audit": ("variation, annulus, mass and mode diagnostics along one branch", True, [
        _RES, Param("k", _count, 4, "branches tracked"), _T_GRID,
        Param("buffer", _index, 5, "extra eigenpairs solved for matching"),
        Param("branch", _index, 0, "audited branch"),
        Param("r0", lambda s: None if s in (None, "") else _positive(s), None, "annulus radius (default chart radius)"),
        Param("r_star", lambda s: None if s in (None, "") else _positive(s), None, "mass window radius (default r0/2)"),
        Param("delta_frac", _positive, 0.01, "relative differencing step"),
        Param("modes", _flag, True, "run the Mathieu mode estimates (1/0)"),
        Param("mode_t_max", _positive, 0.05, "mode estimates only for t at or below this"),
        Param("n_modes", _count, 32, "Mathieu modes in the expansion"),
    ], run_audit),
    "symmetry-check": ("full vs reflected-half spectra of a midline-slit rectangle", False, [
        Param("a", _positive, math.sqrt(2.0), "rectangle width"),
        Param("centers", lambda s: None if s in (None, "") else _float_list(s), None, "slit centres on y=1/2"),
        Param("t", _positive, 0.2, "slit half-length"),
        Param("slit_bc", _bc, BC.NEUMANN, "slit condition"),
        Param("resolution", _resolution, 32.0, "elements per unit length (>= 8)"),
        Param("n_compare", _count, 10, "eigenvalues compared"),
        Param("threshold", _positive, 100.0, "counting threshold"),
    ], run_symmetry),
    "gap-scan": ("minimal spectral gaps over a t grid", True, [
        _RES, Param("k", _count, 10, "eigenvalues considered"), _T_GRID,
        Param("threshold", _positive, 0.02, "relative gap flagged as crossing candidate"), _PLOT,
    ], run_gap_scan),
    "cross-validate": ("separated-variables vs FEM eigenvalues on the slit ellipse", False, [
        Param("t", _positive, 0.3, "slit half-length"),
        Param("r0", _positive, 1.0, "outer radius"),
        Param("slit_bc", _bc, BC.DIRICHLET, "slit condition"),
        Param("outer_bc", _bc, BC.DIRICHLET, "outer condition"),
        Param("resolution", _resolution, 16.0, "coarse resolution; the refined run doubles it"),
        Param("k", _count, 5, "eigenvalues compared"),
    ], run_cross_validate),
}
_TGRID_OPTIONAL = {"gap-scan"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slitlab", description="Laplace eigenvalues on domains with small slits.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (help_, needs_domain, params, _) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--out", help="output directory (default: out)")
        if needs_domain is not False:
            sp.add_argument("--domain", help="domain key = value file" + (" (required)" if needs_domain else ""))
        for prm in params:
            d = prm.default
            shown = d.value if isinstance(d, BC) else d
            sp.add_argument("--" + prm.name.replace("_", "-"), dest=prm.name,
                            help=f"{prm.help} [default: {shown}]")
    return p


def make_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge defaults, config file and flags; validate everything before any output exists."""
    help_, needs_domain, params, _ = COMMANDS[args.command]
    raw: dict[str, str] = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}") from None
        raw = {k.replace("-", "_"): v for k, v in parse_key_values(text).items()}
    allowed = {prm.name for prm in params} | {"out"} | ({"domain"} if needs_domain is not False else set())
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigurationError(f"unknown config keys for {args.command}: {unknown}")
    for key in allowed:
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    values = {}
    for prm in params:
        if prm.name in raw:
            values[prm.name] = prm.conv(raw[prm.name])
        else:
            values[prm.name] = prm.default
    if "t_grid" in values and values["t_grid"] is None and args.command not in _TGRID_OPTIONAL:
        raise ConfigurationError("t_grid is required")
    domain_path = raw.get("domain")
    domain = None
    if needs_domain and not domain_path:
        raise ConfigurationError(f"{args.command} needs --domain")
    if domain_path:
        domain = DomainSpec.load(domain_path)
    if args.command == "gap-scan" and values["t_grid"] is None:
        if domain.slits:
            raise ConfigurationError("t_grid is required for slit domains")
    if values.get("t_grid") is not None and domain is not None and domain.slits:
        t_ref = min(s.half_length_t for s in domain.slits)
        if values["t_grid"][0] > t_ref * (1 + 1e-12):
            raise ConfigurationError(f"t grid must lie in (0, t_ref] with t_ref = {t_ref}")
    return ExperimentConfig(command=args.command, out=Path(raw.get("out") or "out"), domain_path=domain_path,
                            domain=domain, params=values, raw=raw)


def versions() -> dict[str, str]:
    return {"slitlab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(), "kernels": kernels.BACKEND_NAME}


def _diagnostic_text(cfg: ExperimentConfig, exc: BaseException) -> str:
    lines = [f"command: {cfg.command}", f"error: {type(exc).__name__}", f"message: {exc}"]
    for attr in ("t", "x_reached", "worst_triangle", "worst_area"):
        v = getattr(exc, attr, None)
        if v is not None:
            lines.append(f"{attr}: {v}")
    lines.append("config:")
    lines += [f"  {k} = {v}" for k, v in cfg.echo().items()]
    lines.append("traceback:")
    lines += ["  " + ln for ln in "".join(traceback.format_exception(exc)).splitlines()]
    return "\n".join(lines) + "\n"


def run(cfg: ExperimentConfig) -> int:
    """Run one experiment; returns the exit status."""
    runner = COMMANDS[cfg.command][3]
    out = cfg.out
    created = not out.exists()
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"slitlab: cannot create output directory {out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    stage = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    status = EXIT_OK
    try:
        with np.errstate(over="ignore", under="ignore"):
            summary = runner(cfg, stage)
        artifacts = sorted(p.name for p in stage.iterdir())
        for name in artifacts:
            os.replace(stage / name, out / name)
        with contextlib.suppress(FileNotFoundError):
            (out / DIAGNOSTIC).unlink()
        manifest = {"command": cfg.command, "config": cfg.echo(), "versions": versions(),
                    "artifacts": artifacts, "summary": _jsonable(summary)}
        if cfg.domain is not None:
            manifest["domain"] = cfg.domain.to_text().splitlines()
        with atomic_open(out / MANIFEST) as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except ConfigurationError as exc:
        print(f"slitlab: configuration error: {exc}", file=sys.stderr)
        status = EXIT_CONFIG
    except (NumericalError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"slitlab: numerical failure: {exc} (see {out / DIAGNOSTIC})", file=sys.stderr)
        with atomic_open(out / DIAGNOSTIC) as fh:
            fh.write(_diagnostic_text(cfg, exc))
        status = EXIT_NUMERICAL
    finally:
        shutil.rmtree(stage, ignore_errors=True)
        if status == EXIT_CONFIG and created:
            shutil.rmtree(out, ignore_errors=True)
    return status


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, (np.integer, np.bool_)):
        return v.item()
    if isinstance(v, BC):
        return v.value
    return v


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
    except ConfigurationError as exc:
        print(f"slitlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
