"""Scenario runner, unique-continuation comparison and Stein report batches.

Outputs are deterministic: no timestamps, fixed column order, floats printed
with 17 significant digits.  Every text output carries the manifest hash
(sha256 over the config echo, code version and numerical settings), so
re-running a manifest reproduces outputs byte for byte.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig
from .diagnostics import (
    SobolevSpec,
    directional_sobolev_norms,
    mass,
    hamiltonian,
    truncated_x_norm,
    truncated_y_norm,
    x_moment,
    zero_mode_slice,
)
from .fraclab import (
    dstein_profile,
    fit_exponent,
    l2_membership_classify,
    make_profile,
    SteinQuery,
)
from .propagator import xi_expansion_check
from .snapshot import SnapshotFile, write_snapshot
from .solver import BlowUpError, evolve

__all__ = [
    "NUMERICAL_SETTINGS",
    "manifest_hash",
    "run_scenario",
    "uc_compare",
    "load_stein_batch",
    "stein_report",
    "run_expansion_check",
]

# settings that pin the numerical methods behind every run
NUMERICAL_SETTINGS = {
    "transform_normalization": "continuous-forward (coeff = fft2 * dx * dy)",
    "dealias_rule": "two-thirds",
    "etdrk4_contour_points": 32,
    "weight_blend": "smootherstep derivative profile",
    "stein_split_radius": "local_scale / 100",
    "stein_inner_substitution": "s = delta * v^(1/(2-2b))",
    "float_format": "%.17g",
}


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def manifest_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _write_csv(path: Path, header: list[str], rows: list[list], mhash: str) -> None:
    lines = [f"# manifest={mhash}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    path.write_text("\n".join(lines) + "\n")


@dataclass
class ScenarioResult:
    config: RunConfig
    csv_path: Path
    manifest_path: Path
    columns: list[str]
    rows: list[list[float]]
    sup_es_norm: float
    blowup: str | None = None


def _scenario_observers(cfg: RunConfig):
    plan = cfg.diagnostics
    a = cfg.params.a
    sspec = SobolevSpec.from_scalar(plan.sobolev_s, a)
    state = {"zm0": None}

    def observe(t, u):
        row = {}
        row["mass"] = mass(u)
        row["hamiltonian"] = hamiltonian(u, cfg.params)
        sx, sy = directional_sobolev_norms(u, sspec)
        row["sob_x"] = sx
        row["sob_y"] = sy
        for N in plan.n_ladder:
            row[f"wnorm_x_N{_ladder_tag(N)}"] = truncated_x_norm(u, plan.r1, N)
        row["wnorm_y"] = truncated_y_norm(u, plan.r2)
        zm = zero_mode_slice(u)
        if state["zm0"] is None:
            state["zm0"] = zm
        row["zero_mode_maxdev"] = float(np.max(np.abs(zm - state["zm0"])))
        xm = x_moment(u)
        row["xmom_re"] = xm.real
        row["xmom_im"] = xm.imag
        return row

    return observe


def _ladder_tag(N: float) -> str:
    return str(int(N)) if float(N).is_integer() else ("%g" % N)


def run_scenario(cfg: RunConfig) -> ScenarioResult:
    """Integrate one configured run and write CSV + manifest (+ snapshots)."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    payload = {
        "config": cfg.to_dict(),
        "code_version": __version__,
        "settings": NUMERICAL_SETTINGS,
    }
    mhash = manifest_hash(payload)

    initial = cfg.initial.build(cfg.grid)
    observe = _scenario_observers(cfg)
    columns = ["t"] + list(observe(0.0, initial).keys())

    blowup_err: BlowUpError | None = None
    rows: list[list[float]] = []

    # evolve() takes per-key callables; computing the full row once per
    # record is cheaper, so wrap it in a single pseudo-observer
    observers = {"_row": lambda t, u: observe(t, u)}
    try:
        traj = evolve(
            initial,
            cfg.solver,
            observers=observers,
            stride=cfg.diagnostics.stride,
            snapshot_stride=cfg.snapshot_stride,
        )
    except BlowUpError as err:
        blowup_err = err
        traj = getattr(err, "trajectory", None)

    records = traj.records if traj is not None else []
    for rec in records:
        row = [rec["t"]] + [rec["_row"][key] for key in columns[1:]]
        rows.append(row)

    csv_path = out / "diagnostics.csv"
    _write_csv(csv_path, columns, rows, mhash)

    sup_es = 0.0
    if rows:
        idx_m, idx_sx, idx_sy = (
            columns.index("mass"),
            columns.index("sob_x"),
            columns.index("sob_y"),
        )
        sup_es = max(
            float(np.sqrt(r[idx_m] + r[idx_sx] ** 2 + r[idx_sy] ** 2)) for r in rows
        )

    if traj is not None:
        for t_snap, u_snap in traj.snapshots:
            write_snapshot(
                out / f"snapshot_t{t_snap:g}.gbzk",
                SnapshotFile(u_snap, a=cfg.params.a, t=t_snap),
            )

    manifest = dict(payload)
    manifest["manifest_sha256"] = mhash
    manifest["results"] = {
        "rows": len(rows),
        "sup_es_norm": sup_es,
        "blowup": str(blowup_err) if blowup_err else None,
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")

    if blowup_err is not None:
        raise blowup_err

    return ScenarioResult(
        config=cfg,
        csv_path=csv_path,
        manifest_path=manifest_path,
        columns=columns,
        rows=rows,
        sup_es_norm=sup_es,
    )


# --- unique-continuation comparison -------------------------------------------

@dataclass
class UcCompareResult:
    csv_path: Path
    report_path: Path
    columns: list[str]
    rows: list[list[float]]
    moment_residuals: dict[str, float]
    zero_mode_maxdev: dict[str, float]


def _uc_ladder_exponents(a: float) -> list[float]:
    return [2.0, 2.5 + a, 3.5 + a]


def uc_compare(cfg_a: RunConfig, cfg_b: RunConfig, out_dir: str | Path) -> UcCompareResult:
    """Contrast a zero-x-mean branch against a nonzero-mean branch.

    The two configs must be identical except for the x_mean_removed flag.
    Tracks the truncated-norm ladders ||<x>_N^{r1} u|| for r1 in
    {2, 5/2+a, 7/2+a} over the configured N ladder, the zero-mode deviation
    and the first x-moment; the report states box-truncated trends only.
    """
    da, db = cfg_a.to_dict(), cfg_b.to_dict()
    da["initial"] = {k: v for k, v in da["initial"].items() if k != "x_mean_removed"}
    db["initial"] = {k: v for k, v in db["initial"].items() if k != "x_mean_removed"}
    da.pop("output"), db.pop("output")
    if da != db:
        raise ConfigError("uc_compare configs must differ only in x_mean_removed")
    if cfg_a.initial.x_mean_removed == cfg_b.initial.x_mean_removed:
        raise ConfigError("uc_compare needs exactly one branch with x_mean_removed")
    if cfg_a.initial.x_mean_removed:
        cfg_a, cfg_b = cfg_b, cfg_a  # branch A: nonzero mean, branch B: zero mean

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    a = cfg_a.params.a
    ladder_r = _uc_ladder_exponents(a)
    ladder_n = cfg_a.diagnostics.n_ladder

    payload = {
        "config_pair": [cfg_a.to_dict(), cfg_b.to_dict()],
        "code_version": __version__,
        "settings": NUMERICAL_SETTINGS,
    }
    mhash = manifest_hash(payload)

    branches = {}
    for tag, cfg in (("nz", cfg_a), ("zm", cfg_b)):
        initial = cfg.initial.build(cfg.grid)
        zm0 = zero_mode_slice(initial)

        def observe(t, u, zm0=zm0, r_list=ladder_r, n_list=ladder_n):
            row = {"mass": mass(u)}
            for r1 in r_list:
                for N in n_list:
                    row[f"w_r{_rtag(r1)}_N{_ladder_tag(N)}"] = truncated_x_norm(u, r1, N)
            zm = zero_mode_slice(u)
            row["zero_mode_maxdev"] = float(np.max(np.abs(zm - zm0)))
            xm = x_moment(u)
            row["xmom_re"], row["xmom_im"] = xm.real, xm.imag
            return row

        traj = evolve(
            initial,
            cfg.solver,
            observers={"_row": lambda t, u, f=observe: f(t, u)},
            stride=cfg.diagnostics.stride,
        )
        branches[tag] = traj

    keys = list(branches["nz"].records[0]["_row"].keys())
    columns = ["t"] + [f"{k}_{tag}" for k in keys for tag in ("nz", "zm")]
    rows = []
    for rec_a, rec_b in zip(branches["nz"].records, branches["zm"].records):
        row = [rec_a["t"]]
        for k in keys:
            row.append(rec_a["_row"][k])
            row.append(rec_b["_row"][k])
        rows.append(row)
    csv_path = out / "uc_compare.csv"
    _write_csv(csv_path, columns, rows, mhash)

    # moment-identity residual: d/dt xmom = mass/2, centered differences
    residuals, zmdev, trends = {}, {}, {}
    times = np.array([r[0] for r in rows])
    for tag in ("nz", "zm"):
        xm = np.array(
            [rec["_row"]["xmom_re"] for rec in branches[tag].records]
        )
        ms = np.array([rec["_row"]["mass"] for rec in branches[tag].records])
        if len(times) >= 3:
            dt = times[2:] - times[:-2]
            deriv = (xm[2:] - xm[:-2]) / dt
            residuals[tag] = float(np.max(np.abs(deriv - 0.5 * ms[1:-1])))
        else:
            residuals[tag] = float("nan")
        zmdev[tag] = float(
            max(rec["_row"]["zero_mode_maxdev"] for rec in branches[tag].records)
        )
        for r1 in ladder_r:
            for N in ladder_n:
                key = f"w_r{_rtag(r1)}_N{_ladder_tag(N)}"
                series = np.array([rec["_row"][key] for rec in branches[tag].records])
                grow = (series[-1] - series[0]) / series[0] if series[0] > 0 else 0.0
                trends[f"{key}_{tag}"] = float(grow)

    report_lines = [
        f"# manifest={mhash}",
        "unique-continuation comparison (box-truncated norms; no claim about",
        "norms on the full plane is implied by these trends)",
        "",
        f"dispersion a = {_fmt(a)}; ladder r1 = "
        + ", ".join(_fmt(r) for r in ladder_r)
        + "; N ladder = "
        + ", ".join(_ladder_tag(N) for N in ladder_n),
        "",
        "branch nz: initial x-mean nonzero; branch zm: x-mean removed",
        f"zero-mode max deviation: nz = {_fmt(zmdev['nz'])}, zm = {_fmt(zmdev['zm'])}",
        f"x-moment identity residual (d/dt int x u = mass/2): "
        f"nz = {_fmt(residuals['nz'])}, zm = {_fmt(residuals['zm'])}",
        "",
        "relative growth of truncated weighted norms over [0, T]:",
    ]
    for key, grow in trends.items():
        report_lines.append(f"  {key}: {_fmt(grow)}")
    report_path = out / "uc_report.txt"
    report_path.write_text("\n".join(report_lines) + "\n")

    return UcCompareResult(
        csv_path=csv_path,
        report_path=report_path,
        columns=columns,
        rows=rows,
        moment_residuals=residuals,
        zero_mode_maxdev=zmdev,
    )


def _rtag(r: float) -> str:
    return ("%g" % r).replace(".", "p")


# --- Stein report batches -------------------------------------------------------

@dataclass(frozen=True)
class SteinBatchQuery:
    name: str
    kind: str  # power | power_sign | gamma
    theta: float
    alpha: float | None = None
    gamma: float | None = None


def load_stein_batch(path: str | Path) -> list[SteinBatchQuery]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(Path(path).read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    queries = []
    for section in parser.sections():
        keys = set(parser.options(section))
        allowed = {"kind", "theta", "alpha", "gamma"}
        if not keys <= allowed:
            raise ConfigError(
                f"{path}: unknown keys {sorted(keys - allowed)} in [{section}]"
            )
        kind = parser.get(section, "kind")
        if kind not in ("power", "power_sign", "gamma"):
            raise ConfigError(f"{path}: [{section}] unknown kind {kind!r}")
        theta = parser.getfloat(section, "theta")
        alpha = parser.getfloat(section, "alpha") if "alpha" in keys else None
        gamma = parser.getfloat(section, "gamma") if "gamma" in keys else None
        queries.append(SteinBatchQuery(section, kind, theta, alpha, gamma))
    return queries


def _run_one_query(q: SteinBatchQuery) -> dict:
    profile = make_profile(q.kind, alpha=q.alpha, gamma=q.gamma)
    evidence = l2_membership_classify(profile, q.theta)
    out = {
        "name": q.name,
        "kind": q.kind,
        "param": q.alpha if q.kind != "gamma" else q.gamma,
        "theta": q.theta,
        "verdict": evidence.verdict,
        "increment_slope": evidence.increment_slope,
        "rule": evidence.rule,
    }
    # pointwise profile values and the large-|eta| decay fit need the Stein
    # integral itself, which only exists for orders below 1
    if 0.0 < q.theta < 1.0:
        eta_large = np.geomspace(10.0, 200.0, 12)
        vals_large = dstein_profile(SteinQuery(q.theta, profile, tuple(eta_large)))
        fit = fit_exponent(eta_large, vals_large)
        out["slope_large_eta"] = fit.slope
        out["fit_window"] = "10..200"
        out["values"] = list(zip(eta_large.tolist(), vals_large.tolist()))
    else:
        out["slope_large_eta"] = float("nan")
        out["fit_window"] = ""
        out["values"] = []
    return out


def stein_report(
    queries: list[SteinBatchQuery], out_dir: str | Path
) -> tuple[Path, Path]:
    """Run a query batch; write verdicts and pointwise values as CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "queries": [vars(q) for q in queries],
        "code_version": __version__,
        "settings": NUMERICAL_SETTINGS,
    }
    mhash = manifest_hash(payload)

    workers = int(os.environ.get("GBOZK_WORKERS", "1"))
    if workers > 1 and len(queries) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one_query, queries))
    else:
        results = [_run_one_query(q) for q in queries]

    verdict_header = [
        "name",
        "kind",
        "param",
        "theta",
        "verdict",
        "increment_slope",
        "slope_large_eta",
        "fit_window",
        "rule",
    ]
    verdict_rows = [
        [
            r["name"],
            r["kind"],
            r["param"] if r["param"] is not None else "",
            r["theta"],
            r["verdict"],
            r["increment_slope"],
            r["slope_large_eta"],
            r["fit_window"],
            r["rule"],
        ]
        for r in results
    ]
    verdicts_path = out / "stein_verdicts.csv"
    _write_csv(verdicts_path, verdict_header, verdict_rows, mhash)

    value_rows = []
    for r in results:
        for eta, val in r["values"]:
            value_rows.append([r["name"], eta, val])
    values_path = out / "stein_values.csv"
    _write_csv(values_path, ["name", "eta", "value"], value_rows, mhash)
    return verdicts_path, values_path


# --- expansion check driver -----------------------------------------------------

def run_expansion_check(
    a: float,
    ks: list[int],
    ts: list[float],
    xi_lo: float = 0.1,
    xi_hi: float = 1.45,
    eta_lo: float = 0.0,
    eta_hi: float = 1.35,
    n: int = 10,
    tolerance: float = 1e-6,
):
    """Run xi_expansion_check over a (xi, eta) grid for each (k, t)."""
    from .propagator import DispersionParams

    params = DispersionParams(a)
    xi_set = np.linspace(xi_lo, xi_hi, n)
    eta_set = np.linspace(eta_lo, eta_hi, n)
    reports = []
    for k in ks:
        for t in ts:
            reports.append(
                xi_expansion_check(k, t, params, xi_set, eta_set, tolerance=tolerance)
            )
    return reports
