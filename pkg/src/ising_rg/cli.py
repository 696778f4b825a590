"""Command line front end: ``ising-rg <command> --config PATH [--key value ...]``.

The configuration file holds flat ``key = value`` lines (``#`` starts a
comment); ``--key value`` pairs on the command line override it.  Results go
to stdout (or ``--output``) as CSV or as one JSON document, diagnostics to
stderr.  Exit status: 0 when every requested check passes, 1 when a check
fails, 2 for invalid input, 3 for resource limits, 4 for numerical failures.
"""

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import rgflow, transfer
from .dynamics import (
    DynamicsParams,
    Schedule,
    analytic_spectrum,
    build_transfer_determined,
    convergence_horizon,
    exact_ring_evolve,
    gibbs_initial_distribution,
    mc_simulate,
    point_mass_distribution,
    spectrum_check,
    two_point_table,
)
from .errors import DomainError, IsingRGError, UnsupportedRegimeError

DEFAULT_BUDGET = 2_000_000_000
BUDGET_ENV = "ISING_RG_BUDGET"
COMMANDS = ("correlation", "observable", "rg-flow", "spectrum", "evolve", "simulate", "free-energy")
CHECK_FAILED = 1


# --- configuration -------------------------------------------------------------


def parse_config_text(text, source="config"):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{source}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if not key:
            raise DomainError(f"{source}:{lineno}: empty key")
        out[key] = value.strip()
    return out


def parse_overrides(tokens):
    out = {}
    it = iter(tokens)
    for tok in it:
        if not tok.startswith("--") or len(tok) == 2:
            raise DomainError(f"unexpected argument {tok!r}; overrides look like --key value")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            try:
                value = next(it)
            except StopIteration:
                raise DomainError(f"missing value for --{key}") from None
        out[key.replace("-", "_")] = value
    return out


class Config:
    """Flat string mapping with typed getters; remembers which keys were read."""

    def __init__(self, values):
        self.values = dict(values)
        self.used = set()

    def _raw(self, key, default):
        self.used.add(key)
        return self.values.get(key, default)

    def str(self, key, default=None):
        v = self._raw(key, default)
        if v is None:
            raise DomainError(f"missing required key {key!r}")
        return str(v)

    def float(self, key, default=None):
        v = self._raw(key, default)
        if v is None:
            raise DomainError(f"missing required key {key!r}")
        try:
            x = float(v)
        except ValueError:
            raise DomainError(f"{key} must be a number, got {v!r}") from None
        if not math.isfinite(x):
            raise DomainError(f"{key} must be finite")
        return x

    def int(self, key, default=None):
        v = self._raw(key, default)
        if v is None:
            raise DomainError(f"missing required key {key!r}")
        try:
            x = float(v)
        except ValueError:
            raise DomainError(f"{key} must be an integer, got {v!r}") from None
        if not x.is_integer():
            raise DomainError(f"{key} must be an integer, got {v!r}")
        return int(x)

    def optional_int(self, key):
        return None if self._raw(key, None) is None else self.int(key)

    def floats(self, key, default=None):
        v = self.str(key, default)
        try:
            return [float(p) for p in v.replace(";", ",").split(",") if p.strip()]
        except ValueError:
            raise DomainError(f"{key} must be a comma separated list of numbers, got {v!r}") from None

    def ints(self, key, default=None):
        vals = self.floats(key, default)
        if any(not x.is_integer() for x in vals):
            raise DomainError(f"{key} must be a list of integers")
        return [int(x) for x in vals]

    def unused(self):
        return sorted(set(self.values) - self.used)


# --- output --------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def render_json(doc):
    # float repr is the shortest round-tripping form
    return json.dumps(_jsonable(doc), indent=2, allow_nan=False) + "\n"


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v) + 0.0  # drop the sign of negative zero
        return format(x, ".17g") if math.isfinite(x) else ""
    return str(v)


def render_csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue()


class Report:
    """Result of one command: a JSON document plus a tabular view, and the checks performed."""

    def __init__(self, command, params, columns, rows, extra=None):
        self.command = command
        self.params = params
        self.columns = columns
        self.rows = rows
        self.extra = extra or {}
        self.checks = []

    def check(self, name, passed, **detail):
        self.checks.append({"name": name, "passed": bool(passed), **detail})

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks)

    def render(self, fmt):
        if fmt == "csv":
            return render_csv(self.columns, self.rows)
        doc = {"command": self.command, "params": self.params, "rows": self.rows}
        doc.update(self.extra)
        doc["checks"] = self.checks
        doc["status"] = "PASS" if self.passed else "FAIL"
        return render_json(doc)


# --- shared parameter readers ------------------------------------------------------


def _observable_fn(cfg, key):
    vals = cfg.floats(key, "1,1")
    if len(vals) != 2:
        raise DomainError(f"{key} needs two values: f^2(+1), f^2(-1)")
    return transfer.ObservableFn(*vals)


def _table(cfg):
    if "table" in cfg.values:
        table = np.array(cfg.floats("table"))
        n = len(table)
        if n < 2 or n & (n - 1):
            raise DomainError("table length must be a power of two >= 2")
        return table
    return two_point_table(_observable_fn(cfg, "f"), _observable_fn(cfg, "g"))


def _schedule(cfg):
    kind = cfg.str("schedule", "geometric")
    k0 = cfg.float("K0", "0.5")
    if kind == "geometric":
        return Schedule.geometric(k0, cfg.float("q", "0.5"))
    return Schedule(kind, k0)


def _dyn_params(cfg):
    return DynamicsParams(cfg.float("gamma", "0"), cfg.float("noise_scale", "1"))


def _coupling(cfg, K_default="1"):
    return transfer.Coupling(cfg.float("K", K_default), cfg.float("h", "0"))


def _budget():
    raw = os.environ.get(BUDGET_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_BUDGET
    try:
        value = int(float(raw))
    except ValueError:
        raise DomainError(f"{BUDGET_ENV} must be a number, got {raw!r}") from None
    if value < 1:
        raise DomainError(f"{BUDGET_ENV} must be positive")
    return value


# --- commands --------------------------------------------------------------------


def cmd_correlation(cfg):
    c = _coupling(cfg)
    if "d" in cfg.values:
        ds = cfg.ints("d")
    else:
        ds = list(range(cfg.int("d_min", "0"), cfg.int("d_max", "5") + 1))
    if not ds or min(ds) < 0:
        raise DomainError("distances must be >= 0")
    rows = [{"K": c.K, "h": c.h, "d": d, "value": transfer.correlation_two_point(c, d)} for d in ds]
    return Report("correlation", {"K": c.K, "h": c.h}, ["K", "h", "d", "value"], rows)


def cmd_observable(cfg):
    c = _coupling(cfg, "0.5")
    if c.h != 0:
        raise UnsupportedRegimeError("observables are only available at h = 0")
    f, g = _observable_fn(cfg, "f"), _observable_fn(cfg, "g")
    boundary = cfg.str("boundary", "periodic")
    oracle = cfg.optional_int("oracle")
    params = {"K": c.K, "f": [f.v_plus, f.v_minus], "g": [g.v_plus, g.v_minus], "boundary": boundary}
    cols = ["boundary", "s_hat", "s_tilde", "s", "oracle_N", "oracle_s_hat", "oracle_s_tilde", "tolerance", "passed"]

    if boundary == "periodic":
        d = cfg.int("d", "3")
        obs = transfer.two_point_observable(c, f, g, d)
        params["d"] = d
        row = {"boundary": boundary, "s_hat": obs.s_hat, "s_tilde": obs.s_tilde, "s": obs.s}
        report = Report("observable", params, cols, [row])
        if oracle is not None:
            if oracle <= d:
                raise DomainError("oracle ring must be longer than d")
            ref = transfer.finite_ring_observable(c, f, g, 1, 1 + d, oracle)
            tol = cfg.float("tol", repr(5.0 * math.tanh(c.K) ** (oracle - d) + 1e-12))
            ok = abs(obs.s_hat - ref.s_hat) <= tol and abs(obs.s_tilde - ref.s_tilde) <= tol
            row.update(oracle_N=oracle, oracle_s_hat=ref.s_hat, oracle_s_tilde=ref.s_tilde, tolerance=tol, passed=ok)
            report.check("periodic_oracle", ok, N=oracle, tolerance=tol)
        return report

    labels = {"++": 0, "-+": 1, "+-": 2, "--": 3}
    if boundary != "all" and boundary not in labels:
        raise DomainError("boundary must be periodic, all, ++, -+, +- or --")
    i, j = cfg.int("i", "2"), cfg.int("j", "5")
    params.update(i=i, j=j)
    lim = transfer.boundary_limit_observables(c, f, g, i, j)
    chosen = list(labels) if boundary == "all" else [boundary]
    rows = []
    report = Report("observable", params, cols, rows)
    tol = cfg.float("tol", "1e-2")
    for lab in chosen:
        k = labels[lab]
        row = {"boundary": lab, "s_hat": lim.s_hat[k], "s_tilde": lim.s_tilde[k], "s": lim.s_hat[k] - lim.s_tilde[k]}
        if oracle is not None:
            s0, sN1 = transfer.BOUNDARIES[k]
            ref = transfer.finite_open_chain_observable(c, f, g, i, j, oracle, s0, sN1)
            ok = abs(row["s_hat"] - ref.s_hat) <= tol and abs(row["s_tilde"] - ref.s_tilde) <= tol
            row.update(oracle_N=oracle, oracle_s_hat=ref.s_hat, oracle_s_tilde=ref.s_tilde, tolerance=tol, passed=ok)
            report.check(f"boundary_oracle_{lab}", ok, N=oracle, tolerance=tol)
        rows.append(row)
    report.extra["limit_set"] = {
        "m11": lim.m11,
        "m21": lim.m21,
        "l11": lim.l11,
        "l21": lim.l21,
        "r11": lim.r11,
        "r21": lim.r21,
        "r_hat_1": lim.r_hat_1,
        "r_hat_2": lim.r_hat_2,
    }
    return report


def _rate_or_none(series, start):
    try:
        return rgflow.decay_rate_fit(series, start)
    except DomainError:
        return None


def cmd_rg_flow(cfg):
    K0 = cfg.float("K0", "1")
    n = cfg.int("n", "12")
    if not 0 <= n <= 60:
        raise DomainError("n must lie in 0..60")
    x1, x2 = cfg.int("x1", "0"), cfg.int("x2", "1")
    z = cfg.float("z", "1")
    f, g = _observable_fn(cfg, "f"), _observable_fn(cfg, "g")
    fit_from = cfg.int("fit_from", "1")
    corr = rgflow.correlation_remainder(K0, x1, x2, n, z)
    hat, tilde, total = rgflow.observable_remainders(K0, f, g, x1, x2, n, z)
    rates = {
        "rate_S": _rate_or_none(corr, fit_from),
        "rate_O_hat": _rate_or_none(hat, fit_from),
        "rate_O_tilde": _rate_or_none(tilde, fit_from),
        "rate_O": _rate_or_none(total, fit_from),
    }
    rows = []
    for m in range(n + 1):
        row = {
            "n": m,
            "K_n": corr.k_values[m],
            "S_n": corr.values[m],
            "O_hat_n": hat.values[m],
            "O_tilde_n": tilde.values[m],
            "O_n": total.values[m],
        }
        row.update(rates)
        rows.append(row)
    cols = ["n", "K_n", "S_n", "O_hat_n", "O_tilde_n", "O_n", *rates]
    params = {"K0": K0, "n": n, "x1": x1, "x2": x2, "z": z, "f": [f.v_plus, f.v_minus], "g": [g.v_plus, g.v_minus]}
    return Report("rg-flow", params, cols, rows, {"decay_rates": rates})


def cmd_spectrum(cfg):
    params = _dyn_params(cfg)
    m = cfg.int("m", "2")
    eps = cfg.float("eps", "1e-10")
    M = build_transfer_determined(params, m)
    ev = spectrum_check(M)
    analytic = analytic_spectrum(params, m)
    r = params.r
    horizon = convergence_horizon(r, eps)
    power_err = float(np.max(np.abs(np.linalg.matrix_power(M, horizon) - 2.0**-m)))
    rows = [{"index": k, "eigenvalue": float(ev[k]), "analytic": float(analytic[k])} for k in range(len(ev))]
    report = Report(
        "spectrum",
        {"gamma": params.gamma, "noise_scale": params.noise_scale, "m": m, "eps": eps},
        ["index", "eigenvalue", "analytic"],
        rows,
        {"r": r, "horizon": horizon, "power_error": power_err},
    )
    report.check("analytic_spectrum", bool(np.max(np.abs(ev - analytic)) <= 1e-10))
    report.check("simple_top_eigenvalue", bool(len(ev) == 1 or ev[1] < 1.0 - 1e-10))
    report.check("power_convergence", power_err <= eps, horizon=horizon)
    return report


def _initial_distribution(cfg, N):
    init = cfg.str("init", "gibbs")
    if init == "gibbs":
        return gibbs_initial_distribution(cfg.float("init_K", "1"), N)
    if init in ("plus", "minus"):
        return point_mass_distribution([1 if init == "plus" else -1] * N)
    raise DomainError("init must be gibbs, plus or minus")


def cmd_evolve(cfg):
    params = _dyn_params(cfg)
    schedule = _schedule(cfg)
    N, T = cfg.int("N", "10"), cfg.int("T", "60")
    sites = cfg.ints("sites", "1,4")
    table = _table(cfg)
    res = exact_ring_evolve(params, schedule, _initial_distribution(cfg, N), T, sites, table)
    lim = res.limit
    rows = []
    for t in range(T + 1):
        rows.append(
            {
                "t": t,
                "K": res.k_values[t] if t < T else None,
                "s_hat": res.s_hat[t],
                "s_tilde": res.s_tilde[t],
                "s": res.s[t],
                "mean": res.mean[t],
                "connected": res.connected[t] if len(sites) >= 2 else None,
                "limit_s": lim[2],
                "gap": abs(res.s[t] - lim[2]),
            }
        )
    cols = ["t", "K", "s_hat", "s_tilde", "s", "mean", "connected", "limit_s", "gap"]
    report = Report(
        "evolve",
        {"N": N, "T": T, "sites": sites, "schedule": schedule.kind, "K0": schedule.k0, "table": table},
        cols,
        rows,
        {"limit": {"s_hat": lim[0], "s_tilde": lim[1], "s": lim[2]}, "final_gap": res.gap},
    )
    if "tol" in cfg.values:
        tol = cfg.float("tol")
        report.check("final_gap", res.gap <= tol, tolerance=tol)
    return report


def cmd_simulate(cfg):
    params = _dyn_params(cfg)
    schedule = _schedule(cfg)
    N, T = cfg.int("N", "256"), cfg.int("T", "60")
    replicas, seed = cfg.int("replicas", "1000"), cfg.int("seed", "0")
    sites = cfg.ints("sites", "100,103")
    table = _table(cfg)
    if "checkpoints" in cfg.values:
        ckpts = cfg.ints("checkpoints")
    else:
        every = cfg.int("checkpoint_every", "10")
        if every < 1:
            raise DomainError("checkpoint_every must be >= 1")
        ckpts = sorted(set(range(0, T + 1, every)) | {T})
    init = cfg.str("init", "gibbs")
    init_state = init if init == "gibbs" else None
    if init in ("plus", "minus"):
        init_state = np.full(N, 1 if init == "plus" else -1, dtype=np.int8)
    elif init != "gibbs":
        raise DomainError("init must be gibbs, plus or minus")
    init_k = cfg.float("init_K", repr(schedule.k0))
    sigmas = cfg.float("sigmas", "3")
    res = mc_simulate(
        params,
        schedule,
        N,
        T,
        replicas,
        seed,
        sites,
        table,
        checkpoints=ckpts,
        init=init_state,
        init_k=init_k,
        budget=_budget(),
    )
    est, se, lim = res.estimates, res.stderr, res.limit
    has_corr = "connected" in est
    rows = []
    for k, t in enumerate(res.checkpoints):
        row = {"t": int(t), "K": res.k_values[t] if t < T else None}
        for name in ("s_hat", "s_tilde", "s", "mean"):
            row[name] = est[name][k]
            row[name + "_se"] = se[name][k]
        if has_corr:
            row["connected"] = est["connected"][k]
            row["connected_se"] = se["connected"][k]
        row["limit_s_hat"], row["limit_s"] = lim[0], lim[2]
        rows.append(row)
    cols = list(rows[0])
    report = Report(
        "simulate",
        {"N": N, "T": T, "replicas": replicas, "seed": seed, "sites": sites, "schedule": schedule.kind,
         "K0": schedule.k0, "init": init, "init_K": init_k, "table": table},
        cols,
        rows,
        {"limit": {"s_hat": lim[0], "s_tilde": lim[1], "s": lim[2]}},
    )
    last = rows[-1]
    for name, target in (("s_hat", lim[0]), ("s", lim[2])):
        dev, tol = abs(last[name] - target), sigmas * last[name + "_se"]
        report.check(f"{name}_vs_limit", bool(dev <= tol), deviation=dev, tolerance=tol)
    if has_corr:
        dev, tol = abs(last["connected"]), sigmas * last["connected_se"]
        report.check("connected_vanishes", bool(dev <= tol), deviation=dev, tolerance=tol)
    verdict = "PASS" if report.passed else "FAIL"
    for row in rows:
        row["verdict"] = verdict
    report.columns.append("verdict")
    return report


def cmd_free_energy(cfg):
    c = _coupling(cfg)
    if c.h != 0:
        raise UnsupportedRegimeError("free energy with fixed boundaries is implemented at h = 0")
    f = transfer.free_energy_density(c)
    N = cfg.optional_int("N")
    cols = ["K", "N", "boundary", "log_Z_per_site", "free_energy", "gap"]
    if N is None:
        return Report("free-energy", {"K": c.K}, cols, [{"K": c.K, "free_energy": f}])
    if N < 1:
        raise DomainError("N must be >= 1")
    rows = []
    for s0, sN1 in transfer.BOUNDARIES:
        z = transfer.fixed_boundary_partition(c, N, s0, sN1)
        per_site = math.log(z) / (N + 1)
        rows.append(
            {"K": c.K, "N": N, "boundary": ("+" if s0 > 0 else "-") + ("+" if sN1 > 0 else "-"),
             "log_Z_per_site": per_site, "free_energy": f, "gap": abs(per_site - f)}
        )
    report = Report("free-energy", {"K": c.K, "N": N}, cols, rows)
    if "tol" in cfg.values:
        tol = cfg.float("tol")
        report.check("boundary_gap", max(r["gap"] for r in rows) <= tol, tolerance=tol)
    return report


DISPATCH = {
    "correlation": (cmd_correlation, "csv"),
    "observable": (cmd_observable, "json"),
    "rg-flow": (cmd_rg_flow, "csv"),
    "spectrum": (cmd_spectrum, "json"),
    "evolve": (cmd_evolve, "csv"),
    "simulate": (cmd_simulate, "json"),
    "free-energy": (cmd_free_energy, "json"),
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="ising-rg",
        allow_abbrev=False,
        description="Transfer-matrix observables, RG remainders and synchronous spin dynamics.",
        epilog="Any further --key value pair overrides the configuration file.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default depends on the command)")
    p.add_argument("--output", help="write the result here instead of stdout")
    return p


def run(argv=None, stdout=None, stderr=None):
    """Run the CLI and return the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args, rest = parser.parse_known_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        values = {}
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    values = parse_config_text(fh.read(), args.config)
            except OSError as exc:
                raise DomainError(f"cannot read config: {exc}") from None
        values.update(parse_overrides(rest))
        fmt = values.pop("format", None) or args.format
        output = values.pop("output", None) or args.output
        func, default_fmt = DISPATCH[args.command]
        fmt = fmt or default_fmt
        if fmt not in ("csv", "json"):
            raise DomainError("format must be csv or json")
        cfg = Config(values)
        report = func(cfg)
        unused = cfg.unused()
        if unused:
            raise DomainError(f"unknown keys for {args.command}: {', '.join(unused)}")
        text = report.render(fmt)
    except IsingRGError as exc:
        print(f"ising-rg: error: {exc}", file=stderr)
        return exc.exit_code
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    for chk in report.checks:
        print(f"{'PASS' if chk['passed'] else 'FAIL'} {chk['name']}", file=stderr)
    return 0 if report.passed else CHECK_FAILED


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
