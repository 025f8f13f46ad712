"""Command-line front end: solve sweeps, blow-up scans, period checks, comparisons.

One structured YAML config file drives every run (the full grammar is documented
in the repository README).  The file has up to four blocks::

    problem:   the force term -- a named preset or an explicit matrix plus g
    data:      the initial-velocity family and its parameters
    task:      the command block (times/points to sweep, tolerances, seeds)
    solver:    optional Newton knobs (newton_tol, max_iter, grid_num)

Subcommands: ``solve`` (CSV sweep of u(t, x)), ``blowup`` (sheet scan plus
catastrophe summary), ``period`` (text report from the matrix-exponential
period test), ``compare`` (random characteristic samples against the implicit
solver, with a pass/fail error gate) and ``coriolis3d`` (solve/blowup routed
through the kernel-adapted frame for the rotating 3D preset; initial data for
this command is registered in the rotated coordinates ``y = L x``).

Output is CSV (or plain text for ``period``) with a leading comment block that
carries the config hash; identical config plus seed produces byte-identical
output regardless of ``--threads``.  Exit codes: 0 success, 1 config error,
2 solver failure, 3 comparison gate breach.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from concurrent.futures import ThreadPoolExecutor
from io import StringIO

import numpy as np
import yaml

from . import blowup, degenerate, hodograph, matops, model, oracle, periodicity
from .errors import ConfigError, HodoflowError

_COMMANDS = ("solve", "blowup", "period", "compare", "coriolis3d")
_PRESETS = ("coriolis2d", "coriolis3d", "diag", "periodic2d")
_TOP_KEYS = ("problem", "data", "task", "solver")


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


# ---------------------------------------------------------------------------
# config loading


def load_config(path):
    """Read and validate a YAML run config; returns a plain dict."""
    with open(path, "r", encoding="utf-8") as fh:
        cfg = yaml.safe_load(fh)
    _require(isinstance(cfg, dict), "top-level config must be a mapping")
    validate_config(cfg)
    return cfg


def dump_config(cfg):
    """Canonical YAML serialization (sorted keys); load(dump(cfg)) == cfg."""
    return yaml.safe_dump(cfg, sort_keys=True)


def config_hash(cfg):
    """SHA-256 of the canonical serialization, used to stamp output files."""
    return hashlib.sha256(dump_config(cfg).encode("utf-8")).hexdigest()


def validate_config(cfg):
    """Structural checks; raises ConfigError with a pointed message."""
    for key in cfg:
        _require(key in _TOP_KEYS, f"unknown top-level config key {key!r}")
    _require("problem" in cfg, "config needs a 'problem' block")
    problem = cfg["problem"]
    _require(isinstance(problem, dict), "'problem' must be a mapping")
    preset = problem.get("preset")
    if preset is not None:
        _require(preset in _PRESETS, f"unknown preset {preset!r}; known: {_PRESETS}")
    else:
        _require("matrix" in problem, "problem needs a 'preset' or an explicit 'matrix'")
    if "data" in cfg:
        data = cfg["data"]
        _require(isinstance(data, dict), "'data' must be a mapping")
        _require("family" in data, "data block needs a 'family'")
        _require(data["family"] in model.FAMILIES,
                 f"unknown data family {data['family']!r}; known: {sorted(model.FAMILIES)}")
    if "task" in cfg:
        task = cfg["task"]
        _require(isinstance(task, dict), "'task' must be a mapping")
        name = task.get("name")
        if name is not None:
            _require(name in _COMMANDS, f"unknown task name {name!r}; known: {_COMMANDS}")
    if "solver" in cfg:
        _require(isinstance(cfg["solver"], dict), "'solver' must be a mapping")


def build_spec(problem):
    """ForceSpec from the problem block (preset or explicit matrix)."""
    g = problem.get("g")
    g_vec = None if g is None else np.asarray(g, dtype=float)
    preset = problem.get("preset")
    try:
        if preset == "coriolis2d":
            spec = model.coriolis2d_spec(float(problem["omega"]), g=g_vec)
        elif preset == "coriolis3d":
            _require(g is None, "the coriolis3d preset takes 'g_mag', not a 'g' vector")
            spec = model.coriolis3d_spec(problem["omega"], g_mag=float(problem.get("g_mag", 0.0)))
        elif preset == "diag":
            spec = model.diag_spec(problem["rates"], g=g_vec)
        elif preset == "periodic2d":
            A = periodicity.make_periodic_2d(
                float(problem["lam"]), float(problem["a11"]), float(problem["a12"])
            )
            spec = model.ForceSpec(A, np.zeros(2) if g_vec is None else g_vec)
        else:
            A = np.asarray(problem["matrix"], dtype=float)
            _require(A.ndim == 2 and A.shape[0] == A.shape[1], "'matrix' must be square")
            spec = model.ForceSpec(A, np.zeros(A.shape[0]) if g_vec is None else g_vec)
    except KeyError as exc:
        raise ConfigError(f"problem block is missing {exc.args[0]!r}") from None
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad problem block: {exc}") from None
    dim = problem.get("dimension")
    if dim is not None:
        _require(int(dim) == spec.n, f"declared dimension {dim} != matrix size {spec.n}")
    return spec


def build_data(data_block):
    """InitialData from the data block (family + params, separable recursion)."""
    family = data_block["family"]
    if family == "separable":
        comps = data_block.get("components")
        _require(isinstance(comps, list) and comps, "separable data needs a 'components' list")
        pairs = []
        for comp in comps:
            _require(isinstance(comp, dict) and "family" in comp,
                     "each separable component needs a 'family'")
            pairs.append((comp["family"], dict(comp.get("params", {}))))
        return model.make_data("separable", components=pairs)
    params = data_block.get("params", {})
    _require(isinstance(params, dict), "'params' must be a mapping")
    try:
        return model.make_data(family, **params)
    except TypeError as exc:
        raise ConfigError(f"bad params for family {family!r}: {exc}") from None


def build_problem(cfg):
    """HodographProblem from the problem/data/solver blocks."""
    _require("data" in cfg, "this command needs a 'data' block")
    spec = build_spec(cfg["problem"])
    data = build_data(cfg["data"])
    solver = cfg.get("solver", {})
    return model.HodographProblem(
        spec,
        data,
        newton_tol=float(solver.get("newton_tol", 1e-12)),
        newton_max_iter=int(solver.get("max_iter", 50)),
        grid_num=int(solver.get("grid_num", 201)),
    )


def _task_block(cfg, command):
    task = cfg.get("task", {})
    name = task.get("name")
    if name is not None:
        _require(name == command,
                 f"config task name {name!r} does not match command {command!r}")
    return task


def _parse_times(task):
    times = task.get("times")
    if isinstance(times, dict):
        try:
            return np.linspace(float(times["start"]), float(times["stop"]), int(times["num"]))
        except KeyError as exc:
            raise ConfigError(f"times range is missing {exc.args[0]!r}") from None
    if isinstance(times, list):
        _require(len(times) > 0, "'times' list is empty")
        return np.asarray(times, dtype=float)
    raise ConfigError("task needs 'times': a list or {start, stop, num}")


def _parse_points(task, n):
    pts = task.get("points")
    if isinstance(pts, dict):
        try:
            lo = np.atleast_1d(np.asarray(pts["min"], dtype=float))
            hi = np.atleast_1d(np.asarray(pts["max"], dtype=float))
            num = pts["num"]
        except KeyError as exc:
            raise ConfigError(f"points range is missing {exc.args[0]!r}") from None
        _require(lo.size == n and hi.size == n, f"points min/max must have {n} entries")
        nums = [int(num)] * n if np.isscalar(num) else [int(k) for k in num]
        _require(len(nums) == n, f"points num must be a scalar or {n} entries")
        axes = [np.linspace(lo[i], hi[i], nums[i]) for i in range(n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)
    if isinstance(pts, list):
        arr = np.asarray(pts, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        _require(arr.ndim == 2 and arr.shape[1] == n,
                 f"each point must have {n} coordinates")
        return arr
    raise ConfigError("task needs 'points': a list or {min, max, num}")


# ---------------------------------------------------------------------------
# output helpers


def _fmt(v):
    if v is None:
        return "nan"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _emit(out_path, comments, header, rows):
    buf = StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    _write_text(out_path, buf.getvalue())


def _write_text(out_path, text):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _chunked(items, workers):
    chunks = np.array_split(np.arange(len(items)), max(1, workers))
    return [idx for idx in chunks if idx.size]


# ---------------------------------------------------------------------------
# solve


def _field_rows(problem, times, points, threads, solve_fn=None):
    """solve_field over points, chunked across threads, merged in point order."""
    solve_fn = solve_fn or (lambda pts: hodograph.solve_field(problem, times, pts))
    if threads <= 1 or len(points) <= 1:
        return solve_fn(points)
    rows = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(solve_fn, [points[idx] for idx in _chunked(points, threads)])
        for part in parts:
            rows.extend(part)
    return rows


def cmd_solve(cfg, out_path, threads):
    problem = build_problem(cfg)
    task = _task_block(cfg, "solve")
    times = _parse_times(task)
    points = _parse_points(task, problem.spec.n)
    samples = _field_rows(problem, times, points, threads)
    n = problem.spec.n
    header = (["t"] + [f"x{i + 1}" for i in range(n)]
              + [f"u{i + 1}" for i in range(n)] + ["newton_iters", "status"])
    rows = []
    for s in samples:
        u_cols = list(s.u) if s.u is not None else [None] * n
        rows.append([s.t, *s.x, *u_cols, s.iters, s.status])
    _emit(out_path, [f"config-sha256: {config_hash(cfg)}", "command: solve"], header, rows)
    if not any(s.status == "OK" for s in samples):
        print("solve: no point/time converged", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# blowup


def _is_scalar_multiple(A, tol=1e-12):
    a = A[0, 0]
    return np.allclose(A, a * np.eye(A.shape[0]), atol=tol * max(1.0, abs(a)))


def _is_coriolis2d(A, tol=1e-12):
    w = A[0, 1]
    return A.shape == (2, 2) and np.allclose(
        A, w * np.array([[0.0, 1.0], [-1.0, 0.0]]), atol=tol * max(1.0, abs(w))
    )


def _build_sheets(problem, task):
    """Dispatch the blow-up scan on the force-matrix structure.

    Returns (sheets, certificate_lines).  Certificates: the 1D catalog check
    where A = a < -kappa * sup phi' has one, the diagonal machinery reports
    per-sheet absence, the 2D Coriolis case reports the a^2 + b^2 < c^2 test
    through each sheet's absent_reason.
    """
    A = problem.spec.A
    n = problem.spec.n
    grid_num = task.get("grid_num")
    grids = problem.data.m_grids(int(grid_num)) if grid_num else problem.data.m_grids()
    cert_lines = []
    if n == 1:
        sheets = [blowup.sheet_1d(problem, M_grid=grids[0])]
        cert = blowup.certify_no_blowup_1d(problem)
        word = "Certified" if cert.certified else "NotCertified"
        cert_lines.append(f"certificate: {word} ({cert.reason})")
    elif _is_scalar_multiple(A):
        sheets = blowup.sheets_diag(problem, M_grid=grids)
        for sheet in sheets:
            try:
                cert = blowup.certify_branch_absent(problem, sheet)
            except ValueError:
                continue
            word = "Absent" if cert.certified else "NotAbsent"
            cert_lines.append(f"certificate[{sheet.branch}]: {word} ({cert.reason})")
    elif _is_coriolis2d(A):
        k_range = task.get("k_range")
        if k_range is not None:
            sheets = blowup.sheets_coriolis2d(problem, M_grid=grids, k_range=tuple(k_range))
        else:
            sheets = blowup.sheets_coriolis2d(problem, M_grid=grids)
        for sheet in sheets:
            if sheet.absent_reason and bool(np.all(sheet.absent)):
                cert_lines.append(
                    f"certificate[{sheet.branch}]: Absent everywhere ({sheet.absent_reason})"
                )
    elif n == 2 and np.allclose(A, np.diag(np.diag(A)), atol=1e-12):
        sheets = blowup.sheets_diag2(
            problem, M_grid=grids, t_max=float(task.get("t_max", 10.0))
        )
    else:
        raise ConfigError(
            "blowup scan needs A scalar, 1D, 2x2 diagonal, or the 2D Coriolis pattern; "
            "use the coriolis3d command for the rotating 3D preset"
        )
    return sheets, cert_lines


def _summary_lines(problem, ext, to_original=None):
    if isinstance(ext, blowup.NoBlowup):
        return [f"no blow-up: {ext.reason}"]
    x_star, u_star = ext.x_star, ext.u_star
    if to_original is not None:
        x_star, u_star = to_original(x_star), to_original(u_star)
    return [
        f"t_star: {_fmt(ext.t_star)}",
        f"M_star: {' '.join(_fmt(v) for v in np.atleast_1d(ext.M_star))}",
        f"x_star: {' '.join(_fmt(v) for v in np.atleast_1d(x_star))}",
        f"u_star: {' '.join(_fmt(v) for v in np.atleast_1d(u_star))}",
        f"branch: {ext.branch}",
    ]


def cmd_blowup(cfg, out_path, threads):
    problem = build_problem(cfg)
    task = _task_block(cfg, "blowup")
    sheets, cert_lines = _build_sheets(problem, task)
    ext = blowup.min_blowup_time(problem, sheets)
    comments = [f"config-sha256: {config_hash(cfg)}", "command: blowup"]
    for sheet in sheets:
        if sheet.absent_reason:
            comments.append(f"sheet {sheet.branch} nan entries: {sheet.absent_reason}")
    comments.extend(cert_lines)
    summary = _summary_lines(problem, ext)
    comments.extend(summary)
    n = problem.spec.n
    header = ["branch"] + [f"M{i + 1}" for i in range(n)] + ["t"]
    rows = []
    for sheet in sheets:
        pts = np.atleast_2d(sheet.points)
        for M, t in zip(pts, np.atleast_1d(sheet.t)):
            rows.append([sheet.branch, *np.atleast_1d(M), t])
    _emit(out_path, comments, header, rows)
    if out_path:
        print("\n".join(summary + cert_lines))
    return 0


# ---------------------------------------------------------------------------
# period


def cmd_period(cfg, out_path, threads, seed=None):
    spec = build_spec(cfg["problem"])
    task = _task_block(cfg, "period")
    report = periodicity.check_periodic(
        spec.A,
        rational_tol=float(task.get("rational_tol", 1e-9)),
        max_denominator=int(task.get("max_denominator", 64)),
    )
    lines = [f"# config-sha256: {config_hash(cfg)}", "command: period"]
    lines.append(f"periodic: {str(bool(report)).lower()}")
    if report.periodic:
        lines.append(f"T: {_fmt(report.T)}")
        lines.append("eigenvalues: " + "; ".join(
            f"{v.real:+.12g}{v.imag:+.12g}j" for v in report.eigenvalues))
        lines.append("multipliers: " + "; ".join(
            f"{f.numerator}/{f.denominator}" for f in report.multipliers))
        lines.append(f"exp_defect: {_fmt(report.exp_defect)}")
    else:
        lines.append(f"reason: {report.reason}")
    verify = task.get("verify")
    if report.periodic and verify is not None and "data" in cfg:
        _require(isinstance(verify, dict), "'verify' must be a mapping")
        problem = build_problem(cfg)
        _require(not np.any(problem.spec.g), "period verification needs g = 0")
        rng = np.random.default_rng(seed if seed is not None else int(verify.get("seed", 0)))
        num = int(verify.get("num_points", 20))
        t_lo, t_hi = (float(v) for v in verify.get("t_range", [0.0, report.T]))
        box = problem.data.sample_box()
        samples = [
            (rng.uniform(t_lo, t_hi), rng.uniform(box[:, 0], box[:, 1])) for _ in range(num)
        ]
        check = periodicity.verify_solution_period(
            problem, report.T, samples, tol=float(verify.get("tol", 1e-8))
        )
        lines.append(f"verify: {'pass' if check.ok else 'fail'}")
        lines.append(f"verify_max_delta: {_fmt(check.max_delta)}")
        for failure in check.failures:
            lines.append(f"verify_failure: {failure}")
    _write_text(out_path, "\n".join(lines) + "\n")
    if out_path:
        print("\n".join(lines[1:]))
    return 0


# ---------------------------------------------------------------------------
# compare


def _compare_rows(cfg, problem, task, threads, seed):
    """Random characteristic endpoints vs the implicit solver.

    Samples x0 from the data's sampling box and t from t_range, flows the
    exact characteristic to (t, x(t)), then asks the solver for u(t, x(t)).
    Points whose track hits a caustic before t are tagged POST_BLOWUP and
    excluded from the gate.
    """
    spec, data = problem.spec, problem.data
    preset = cfg["problem"].get("preset")
    rot = None
    if preset == "coriolis3d":
        basis = degenerate.coriolis3d_basis(cfg["problem"]["omega"])
        rot = (basis, degenerate.rotated_spec(spec, basis))
    rng = np.random.default_rng(seed)
    num = int(task.get("num_samples", 200))
    t_lo, t_hi = (float(v) for v in task.get("t_range", [0.05, 0.5]))
    box = data.sample_box()
    draws = []
    for _ in range(num):
        y0 = rng.uniform(box[:, 0], box[:, 1])
        draws.append((rng.uniform(t_lo, t_hi), y0))

    def evaluate(idx):
        t, y0 = draws[idx]
        if rot is None:
            x0, u0_val = y0, data.u0(y0)
            caustic = oracle.first_caustic_time(spec, data, y0, t_max=t)
        else:
            basis, rot_spec = rot
            x0 = basis.P @ y0
            u0_val = degenerate.u0_original(basis, data, x0)
            caustic = oracle.first_caustic_time(rot_spec, data, y0, t_max=t)
        flow = oracle.exact_flow(spec, x0, u0_val, t)
        if caustic is not None and caustic <= t:
            return [idx, t, *flow.x, None, "POST_BLOWUP"]
        try:
            if rot is None:
                numeric = hodograph.solve_u(problem, t, flow.x)
            else:
                numeric = degenerate.degenerate_solve(problem, rot[0], t, flow.x)
        except HodoflowError as exc:
            return [idx, t, *flow.x, None, f"SOLVE_FAIL({type(exc).__name__})"]
        err = float(np.max(np.abs(numeric.u - flow.u)))
        return [idx, t, *flow.x, err, "OK"]

    if threads <= 1:
        return [evaluate(i) for i in range(num)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(evaluate, range(num)))


def cmd_compare(cfg, out_path, threads, seed=None):
    problem = build_problem(cfg)
    task = _task_block(cfg, "compare")
    eff_seed = seed if seed is not None else int(task.get("seed", 0))
    rows = _compare_rows(cfg, problem, task, threads, eff_seed)
    bound = float(task.get("bound", 1e-9))
    errs = [r[-2] for r in rows if r[-1] == "OK"]
    max_err = max(errs) if errs else float("nan")
    n_fail = sum(1 for r in rows if str(r[-1]).startswith("SOLVE_FAIL"))
    n_post = sum(1 for r in rows if r[-1] == "POST_BLOWUP")
    gate_ok = bool(errs) and max_err <= bound
    comments = [
        f"config-sha256: {config_hash(cfg)}",
        "command: compare",
        f"seed: {eff_seed}",
        f"samples: {len(rows)} (ok: {len(errs)}, post_blowup: {n_post}, solve_fail: {n_fail})",
        f"max_error: {_fmt(max_err)}",
        f"bound: {_fmt(bound)}",
        f"gate: {'pass' if gate_ok and not n_fail else 'fail'}",
    ]
    n = problem.spec.n
    header = ["sample", "t"] + [f"x{i + 1}" for i in range(n)] + ["err", "status"]
    _emit(out_path, comments, header, rows)
    if out_path:
        print("\n".join(comments[3:]))
    if n_fail:
        print(f"compare: {n_fail} pre-blow-up sample(s) failed to solve", file=sys.stderr)
        return 2
    if not gate_ok:
        print(f"compare: max error {_fmt(max_err)} exceeds bound {_fmt(bound)}",
              file=sys.stderr)
        return 3
    return 0


# ---------------------------------------------------------------------------
# coriolis3d (degenerate-frame solve/blowup)


def _coriolis3d_setup(cfg):
    problem = build_problem(cfg)
    _require(cfg["problem"].get("preset") == "coriolis3d",
             "the coriolis3d command needs problem.preset: coriolis3d")
    basis = degenerate.coriolis3d_basis(cfg["problem"]["omega"])
    return problem, basis


def cmd_coriolis3d(cfg, out_path, threads):
    problem, basis = _coriolis3d_setup(cfg)
    task = _task_block(cfg, "coriolis3d")
    mode = task.get("mode", "solve")
    _require(mode in ("solve", "blowup"), "coriolis3d mode must be 'solve' or 'blowup'")
    rot_problem = degenerate.rotated_problem(problem, basis)
    comments = [f"config-sha256: {config_hash(cfg)}", f"command: coriolis3d ({mode})"]
    if mode == "solve":
        times = _parse_times(task)
        points = _parse_points(task, 3)
        y_points = points @ basis.L.T
        samples = _field_rows(rot_problem, times, y_points, threads)
        header = (["t"] + [f"x{i + 1}" for i in range(3)]
                  + [f"u{i + 1}" for i in range(3)] + ["newton_iters", "status"])
        rows = []
        for i, s in enumerate(samples):
            x_orig = points[i // len(times)]
            u_cols = list(basis.P @ s.u) if s.u is not None else [None] * 3
            rows.append([s.t, *x_orig, *u_cols, s.iters, s.status])
        _emit(out_path, comments, header, rows)
        if not any(s.status == "OK" for s in samples):
            print("coriolis3d: no point/time converged", file=sys.stderr)
            return 2
        return 0
    # blowup: scan the rotated M-grid for the first root of the time residual
    grids = rot_problem.data.m_grids(int(task.get("grid_num", 11)))
    mesh = np.meshgrid(*grids, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    t_max = float(task.get("t_max", 10.0))
    step = float(task.get("scan_step", 5e-2))

    def branch_fn(M):
        if not rot_problem.data.in_domain(M):
            return np.nan
        root = degenerate.coriolis3d_blowup_time(problem, M, t_max=t_max, step=step)
        return np.nan if root is None else root

    t_vals = np.array([branch_fn(M) for M in points])
    sheet = blowup.BlowupSheet(
        branch="coriolis3d_first", axes=grids, points=points, t=t_vals, branch_fn=branch_fn
    )
    ext = blowup.min_blowup_time(rot_problem, sheet)
    comments.extend(_summary_lines(rot_problem, ext, to_original=lambda v: basis.P @ v))
    header = ["branch", "M1", "M2", "M3", "t"]
    rows = [[sheet.branch, *M, t] for M, t in zip(points, t_vals)]
    _emit(out_path, comments, header, rows)
    if out_path:
        print("\n".join(comments[2:]))
    return 0


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract wants 1 for config errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(prog="hodoflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("solve", "sweep u(t, x) over a time/point grid, CSV output"),
        ("blowup", "scan blow-up sheets and report the first catastrophe"),
        ("period", "matrix-exponential periodicity report for A"),
        ("compare", "random characteristics vs the implicit solver, with gate"),
        ("coriolis3d", "solve/blowup through the kernel-adapted rotating frame"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="YAML run config")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
        p.add_argument("--seed", type=int, default=None,
                       help="override the task seed (compare / period verify)")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "solve":
            return cmd_solve(cfg, args.out, args.threads)
        if args.command == "blowup":
            return cmd_blowup(cfg, args.out, args.threads)
        if args.command == "period":
            return cmd_period(cfg, args.out, args.threads, seed=args.seed)
        if args.command == "compare":
            return cmd_compare(cfg, args.out, args.threads, seed=args.seed)
        return cmd_coriolis3d(cfg, args.out, args.threads)
    except BrokenPipeError:
        return 0
    except (ConfigError, OSError, yaml.YAMLError) as exc:
        print(f"hodoflow: config error: {exc}", file=sys.stderr)
        return 1
    except HodoflowError as exc:
        print(f"hodoflow: solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
