"""Command-line front end: sigma | verify | eigen | green | talenti.

Configuration comes from defaults, then an optional ``key = value`` config
file, then flags.  Exit codes: 0 success, 2 configuration error, 3 solver
failure, 4 at least one gating verification check failed.  With a fixed
seed the bodies of all CSV/JSONL outputs (everything below the timestamped
header line) are byte identical across runs; POISSON_SHARP_THREADS caps
worker threads for the optimizer multistarts.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import reporting
from .bathtub import GreenCache, OptimizerOptions, optimize_extremal, sigma_curve
from .bounds import (
    BallModulusParams,
    BoundReport,
    ball_sigma_evaluator,
    bound_shifted,
    bound_sign_split,
    printed_sigma_ball,
    radial_sigma_ball,
    verify_modulus_bound,
)
from .families import Lcg64, clipped_bump, indicator_blob, nonnegative_field, sign_changing_field
from .grid import make_domain, parse_shape
from .rearrange import comparison_ball, green_rearrangement_check, radial_profile, rearrange, talenti_check
from .solver import SolveError, solve_poisson, torsion_function
from .spectral import eigen_bound_check, eigen_raw_bound_check, eigenpairs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CHECK_FAILED = 4

ALL_SUITES = ("sigma", "ball", "talenti", "green", "sign", "eigen")
_SUITE_SALT = {name: 101 + 13 * i for i, name in enumerate(ALL_SUITES)}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    domain: str = "square:1.0"
    h: float = 1.0 / 64.0
    rtol: float = 1e-10
    betas: tuple | None = None
    beta_count: int = 8
    suites: tuple = ALL_SUITES
    kmax: int = 6
    seed: int = 1
    out: str = "out"
    verify_fields: int = 20
    sign_fields: int = 30
    talenti_fields: int = 20
    green_sources: int = 5

    def validate(self):
        if self.h <= 0:
            raise ConfigError(f"h must be positive, got {self.h}")
        if not 0 < self.rtol < 1:
            raise ConfigError(f"rtol must be in (0, 1), got {self.rtol}")
        unknown = set(self.suites) - set(ALL_SUITES)
        if unknown:
            raise ConfigError(f"unknown suites: {sorted(unknown)}")
        if self.beta_count < 1:
            raise ConfigError("beta_count must be >= 1")
        for count in (self.verify_fields, self.sign_fields, self.talenti_fields,
                      self.green_sources):
            if count < 0:
                raise ConfigError("suite sample counts must be >= 0")
        try:
            parse_shape(self.domain)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _parse_value(key, raw):
    raw = raw.strip()
    if key in ("h", "rtol"):
        return float(raw)
    if key in ("beta_count", "kmax", "seed", "verify_fields", "sign_fields",
               "talenti_fields", "green_sources"):
        return int(raw)
    if key == "betas":
        return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    if key == "suites":
        return tuple(tok.strip() for tok in raw.split(",") if tok.strip())
    return raw


def read_config_file(path) -> dict:
    known = {f.name for f in fields(RunConfig)}
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                overrides[key] = _parse_value(key, raw)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return overrides


def _build_domain(cfg: RunConfig):
    return make_domain(cfg.domain, 1.0 / cfg.h)


def _suite_rng(cfg: RunConfig, suite: str) -> Lcg64:
    return Lcg64(cfg.seed * 1000003 + _SUITE_SALT[suite])


def _resolve_betas(cfg: RunConfig, domain) -> list:
    if cfg.betas:
        betas = sorted(float(b) for b in cfg.betas)
        for b in betas:
            if not 0.0 <= b <= domain.measure * (1 + 1e-9):
                raise ConfigError(f"beta {b} outside [0, |D|] = [0, {domain.measure:.6g}]")
        return betas
    return [k / cfg.beta_count * domain.measure for k in range(1, cfg.beta_count + 1)]


# ----------------------------------------------------------------------
# commands


def cmd_sigma(cfg: RunConfig) -> int:
    domain = _build_domain(cfg)
    betas = _resolve_betas(cfg, domain)
    reporting.ensure_dir(cfg.out)
    opts = OptimizerOptions(rtol=cfg.rtol, seed=cfg.seed)
    curve = sigma_curve(domain, betas, opts)
    reporting.write_sigma_curve_csv(os.path.join(cfg.out, "sigma_curve.csv"), curve)
    reporting.write_sigma_curve_json(os.path.join(cfg.out, "sigma_curve.json"), curve)
    for i, sp in enumerate(curve.points):
        reporting.write_field_pgm(
            os.path.join(cfg.out, f"sigma_{i:03d}_u.pgm"), sp.solution.u
        )
        reporting.write_field_pgm(
            os.path.join(cfg.out, f"sigma_{i:03d}_f.pgm"), sp.extremal.field
        )
    for sp in curve.points:
        print(f"sigma  beta={sp.beta:.6g}  sigma={sp.sigma:.8g}  iters={sp.iterations}")
    return EXIT_OK


def _suite_sigma(cfg, domain, cache, torsion, rng):
    reports = []
    opts = OptimizerOptions(rtol=cfg.rtol, seed=cfg.seed)
    for i in range(cfg.verify_fields):
        f = indicator_blob(domain, rng) if i % 2 == 0 else clipped_bump(domain, rng)
        beta = f.norm_l1 / f.norm_linf
        sp = optimize_extremal(domain, beta, opts, cache=cache, torsion=torsion)
        reports.append(verify_modulus_bound(domain, f, sp, cfg.rtol))
        witness = solve_poisson(domain, sp.extremal.field, cfg.rtol).u.norm_linf
        reports.append(
            BoundReport.evaluate(
                "modulus_equality",
                abs(witness - sp.sigma),
                1e-10 * sp.sigma,
                tol=0.0,
                beta=beta,
                domain=domain.name,
            )
        )
    return reports


def _suite_ball(cfg, domain, cache, torsion, rng):
    reports = []
    rows = []
    radius2d = (
        BallModulusParams.from_domain(domain).radius if domain.dim == 2 else 1.0
    )
    for n, radius in ((2, radius2d), (3, 1.0)):
        p = BallModulusParams(n, radius)
        ts = np.linspace(p.max_mass * 1e-6, p.max_mass, 512)
        worst = -np.inf
        for t in ts:
            radial = radial_sigma_ball(p, t)
            printed = printed_sigma_ball(p, t)
            rows.append((n, radius, t, radial, printed))
            worst = max(worst, radial - printed)
        reports.append(
            BoundReport.evaluate(
                f"ball_domination_n{n}",
                worst,
                0.0,
                tol=1e-12,
                radius=radius,
                points=len(ts),
            )
        )
    path = os.path.join(cfg.out, "ball_adjudication.csv")
    with open(path, "w", encoding="ascii") as fh:
        fh.write(reporting.csv_header_line("ball"))
        fh.write("n,R,t,radial_sigma,printed_sigma,printed_minus_radial\n")
        for n, radius, t, radial, printed in rows:
            fh.write(
                f"{n},{radius:.17g},{t:.17g},{radial:.17g},{printed:.17g},"
                f"{printed - radial:.17g}\n"
            )

    kind, _ = parse_shape(cfg.domain)
    if kind in ("disk", "ball"):
        p = BallModulusParams.from_domain(domain)
        opts = OptimizerOptions(rtol=cfg.rtol, seed=cfg.seed)
        for frac in (0.2, 0.5, 0.8):
            beta = frac * domain.measure
            sp = optimize_extremal(domain, beta, opts, cache=cache, torsion=torsion)
            oracle = radial_sigma_ball(p, beta)
            reports.append(
                BoundReport.evaluate(
                    "ball_sharpness",
                    abs(sp.sigma - oracle),
                    0.03 * oracle,
                    tol=0.0,
                    beta=beta,
                    sigma=sp.sigma,
                    oracle=oracle,
                )
            )
    return reports


def _suite_talenti(cfg, domain, cache, torsion, rng):
    ball = comparison_ball(domain)
    return [
        talenti_check(domain, nonnegative_field(domain, rng), cfg.rtol, ball=ball)
        for _ in range(cfg.talenti_fields)
    ]


def _suite_green(cfg, domain, cache, torsion, rng):
    ball = comparison_ball(domain)
    reports = []
    for _ in range(cfg.green_sources):
        source = rng.below(domain.n_cells)
        reports.append(
            green_rearrangement_check(domain, source, cfg.rtol, ball=ball)
        )
    return reports


def _suite_sign(cfg, domain, cache, torsion, rng):
    sigma_eval = ball_sigma_evaluator(domain)
    reports = []
    for i in range(cfg.sign_fields):
        f = sign_changing_field(domain, rng)
        reports.append(bound_sign_split(sigma_eval, f, cfg.rtol))
        if i < 3:
            reports.extend(bound_shifted(domain, f, sigma_eval, torsion, cfg.rtol))
    return reports


def _suite_eigen(cfg, domain, cache, torsion, rng):
    if cfg.kmax < 1:
        raise ConfigError(f"kmax must be >= 1, got {cfg.kmax}")
    p = BallModulusParams.from_domain(domain)
    reports = []
    pairs = eigenpairs(domain, cfg.kmax)
    for ep in pairs:
        reports.append(eigen_bound_check(p, ep))
        reports.append(eigen_raw_bound_check(ep, domain))
    return reports


_SUITE_RUNNERS = {
    "sigma": _suite_sigma,
    "ball": _suite_ball,
    "talenti": _suite_talenti,
    "green": _suite_green,
    "sign": _suite_sign,
    "eigen": _suite_eigen,
}


def cmd_verify(cfg: RunConfig) -> int:
    domain = _build_domain(cfg)
    reporting.ensure_dir(cfg.out)
    cache = GreenCache(domain, cfg.rtol)
    torsion = torsion_function(domain, cfg.rtol)
    reports = []
    for suite in ALL_SUITES:
        if suite not in cfg.suites:
            continue
        suite_reports = _SUITE_RUNNERS[suite](cfg, domain, cache, torsion, _suite_rng(cfg, suite))
        reports.extend(suite_reports)
        n_pass = sum(r.passed for r in suite_reports)
        print(f"verify suite={suite:8s} checks={len(suite_reports):4d} pass={n_pass}")
    meta = {"domain": cfg.domain, "h": cfg.h, "seed": cfg.seed, "suites": sorted(cfg.suites)}
    reporting.write_reports_jsonl(os.path.join(cfg.out, "verify_reports.jsonl"), reports, meta)
    reporting.write_reports_summary_csv(os.path.join(cfg.out, "verify_summary.csv"), reports)
    failed = [r for r in reports if r.gating and not r.passed]
    if failed:
        for r in failed:
            print(
                f"FAILED {r.inequality_id}: lhs={r.lhs:.6g} rhs={r.rhs:.6g}",
                file=sys.stderr,
            )
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_eigen(cfg: RunConfig) -> int:
    if cfg.kmax < 1:
        raise ConfigError(f"kmax must be >= 1, got {cfg.kmax}")
    domain = _build_domain(cfg)
    reporting.ensure_dir(cfg.out)
    pairs = eigenpairs(domain, cfg.kmax)
    p = BallModulusParams.from_domain(domain)
    peak, raw = {}, []
    for ep in pairs:
        peak[ep.k] = eigen_bound_check(p, ep)
        raw.append(eigen_raw_bound_check(ep, domain))
    reports = list(peak.values()) + raw
    reporting.write_eigen_csv(os.path.join(cfg.out, "eigen.csv"), pairs, peak)
    reporting.write_reports_jsonl(
        os.path.join(cfg.out, "eigen_reports.jsonl"),
        reports,
        {"domain": cfg.domain, "h": cfg.h, "kmax": cfg.kmax},
    )
    for ep in pairs:
        print(f"eigen  k={ep.k}  lambda={ep.lam:.8g}  residual={ep.residual:.2e}")
    if any(r.gating and not r.passed for r in reports):
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_green(cfg: RunConfig) -> int:
    domain = _build_domain(cfg)
    reporting.ensure_dir(cfg.out)
    rng = _suite_rng(cfg, "green")
    ball = comparison_ball(domain)
    reports = []
    for i in range(cfg.green_sources):
        source = rng.below(domain.n_cells)
        reports.append(green_rearrangement_check(domain, source, cfg.rtol, ball=ball))
        if i == 0:
            from .solver import green_column

            col = green_column(domain, source, cfg.rtol)
            reporting.write_field_csv(
                os.path.join(cfg.out, "green_column.csv"), col.g, tool="green"
            )
            reporting.write_field_pgm(os.path.join(cfg.out, "green_column.pgm"), col.g)
            profile = radial_profile(rearrange(col.g, ball))
            reporting.write_radial_profile_csv(
                os.path.join(cfg.out, "green_profile.csv"), profile
            )
    reporting.write_reports_jsonl(
        os.path.join(cfg.out, "green_reports.jsonl"),
        reports,
        {"domain": cfg.domain, "h": cfg.h, "seed": cfg.seed},
    )
    print(f"green  checks={len(reports)} pass={sum(r.passed for r in reports)}")
    if any(r.gating and not r.passed for r in reports):
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_talenti(cfg: RunConfig) -> int:
    domain = _build_domain(cfg)
    reporting.ensure_dir(cfg.out)
    rng = _suite_rng(cfg, "talenti")
    ball = comparison_ball(domain)
    reports = [
        talenti_check(domain, nonnegative_field(domain, rng), cfg.rtol, ball=ball)
        for _ in range(cfg.talenti_fields)
    ]
    reporting.write_reports_jsonl(
        os.path.join(cfg.out, "talenti_reports.jsonl"),
        reports,
        {"domain": cfg.domain, "h": cfg.h, "seed": cfg.seed},
    )
    print(f"talenti  checks={len(reports)} pass={sum(r.passed for r in reports)}")
    if any(r.gating and not r.passed for r in reports):
        return EXIT_CHECK_FAILED
    return EXIT_OK


_COMMANDS = {
    "sigma": cmd_sigma,
    "verify": cmd_verify,
    "eigen": cmd_eigen,
    "green": cmd_green,
    "talenti": cmd_talenti,
}


def _add_common_flags(sub):
    sub.add_argument("--config", help="key = value config file")
    sub.add_argument("--domain", help="shape spec, e.g. disk:1.0 or mask_file:dom.mask")
    sub.add_argument("--h", type=float, help="grid spacing")
    sub.add_argument("--rtol", type=float, help="solver relative tolerance")
    sub.add_argument("--betas", help="comma-separated mass budgets")
    sub.add_argument("--beta-count", type=int, dest="beta_count",
                     help="number of evenly spaced budgets when --betas is absent")
    sub.add_argument("--kmax", type=int, help="number of eigenpairs")
    sub.add_argument("--seed", type=int, help="base seed for pseudorandom families")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--suites", help="comma-separated verify suites")


def build_config(args) -> RunConfig:
    overrides = {}
    if args.config:
        overrides.update(read_config_file(args.config))
    for key in ("domain", "h", "rtol", "beta_count", "kmax", "seed", "out"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "betas", None):
        overrides["betas"] = _parse_value("betas", args.betas)
    if getattr(args, "suites", None) is not None:
        overrides["suites"] = _parse_value("suites", args.suites)
    cfg = replace(RunConfig(), **overrides)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="poisson-sharp",
        description="Sharp peak bounds for the Dirichlet Poisson problem on grid domains",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        _add_common_flags(subs.add_parser(name))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        cfg = build_config(args)
        return _COMMANDS[args.command](cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolveError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
