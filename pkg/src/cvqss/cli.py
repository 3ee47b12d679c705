"""Command-line front end.

    cvqss --config cq-35.json --command rate --out results/

Exit codes: 0 success, 2 configuration error, 3 numerical or physicality
error, 4 Monte-Carlo validation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import mc
from .cc import cc_rate
from .cluster import build_cluster
from .config import PRESETS, ProtocolConfig, load_config, load_preset
from .cq import balance_squeezing, classical_postprocess, cq_pipeline, extract_DA, state_average
from .errors import ConfigError, CVQSSError, NumericError, ValidationFailure
from .qq import extracted_negativity

CC_COLUMNS = ("sigma", "I_DA", "holevo", "K_cc")
CQ_COLUMNS = ("sigma", "V", "tau", "chi", "I_DA", "holevo", "K_CQ", "gamma_D", "gamma_h")
QQ_COLUMNS = ("sigma", "negativity")
MI_TOLERANCE = 0.05
SE_MULTIPLE = 3.0


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _points(cfg: ProtocolConfig):
    grid = cfg.sigma_grid()
    return [float(s) for s in grid] if grid is not None else [cfg.sigma]


def _sigma_value(sigma) -> float:
    return float(sigma) if np.isscalar(sigma) else math.nan


def _row(cfg: ProtocolConfig, command: str, collab: str, sigma, sigma_d):
    protocol = cfg.build()
    try:
        if command == "negativity":
            seq = protocol.sequence(collab)
            r = extracted_negativity(protocol.graph, seq, sigma, sigma_d, protocol.dealer)
            return (_sigma_value(sigma), r.negativity)
        if cfg.task == "cc":
            r = cc_rate(protocol, collab, sigma)
            return (_sigma_value(sigma), r.I_DA, r.holevo, r.K_cc)
        r = cq_pipeline(protocol, collab, sigma, sigma_d)
        p = r.params
        return (_sigma_value(sigma), p.V, p.tau, p.chi, r.I_DA, r.holevo, r.K_CQ, *r.gammas)
    except NumericError as exc:
        raise type(exc)(f"sigma={_fmt(_sigma_value(sigma))}, collaboration {collab!r}: {exc}") from None


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def run_sweep(cfg: ProtocolConfig, command: str, out: Path, sigma_d=None, workers: int = 1) -> list[Path]:
    if command == "rate" and cfg.task == "qq":
        raise ConfigError("--command: 'rate' is not available for task 'qq'; use 'negativity'")
    if command == "negativity" and cfg.task == "cc":
        raise ConfigError("--command: 'negativity' needs a dealer mode (task 'cq' or 'qq')")
    header = QQ_COLUMNS if command == "negativity" else (CC_COLUMNS if cfg.task == "cc" else CQ_COLUMNS)
    points = _points(cfg)
    written = []
    for c in cfg.collaborations:
        jobs = [(cfg, command, c.name, s, sigma_d) for s in points]
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                rows = list(pool.map(lambda a: _row(*a), jobs))
        else:
            rows = [_row(*a) for a in jobs]
        rows.sort(key=lambda r: r[0])
        path = out / f"{cfg.name}_{c.name}_{command}.csv"
        _write_csv(path, header, rows)
        written.append(path)
    return written


# -- Monte-Carlo validation ------------------------------------------------


def _substream(seed: int, k: int) -> int:
    return int(np.random.SeedSequence([int(seed), k]).generate_state(1)[0])


def _check(name, analytic, empirical, stderr, ok) -> dict:
    return {"check": name, "analytic": float(analytic), "empirical": float(empirical),
            "stderr": float(stderr), "pass": bool(ok)}


def _cov_checks(label: str, analytic: np.ndarray, empirical: np.ndarray, shots: int, entries=None) -> list[dict]:
    se = mc.covariance_stderr(analytic, shots)
    if entries is None:
        n = analytic.shape[0]
        entries = [(i, j) for i in range(n) for j in range(i, n)]
    return [
        _check(f"{label} cov[{i},{j}]", analytic[i, j], empirical[i, j], se[i, j],
               abs(empirical[i, j] - analytic[i, j]) <= SE_MULTIPLE * se[i, j])
        for i, j in entries
    ]


def validation_checks(cfg: ProtocolConfig, seed: int = 0, shots: int = 100_000, sigma_d=None) -> list[dict]:
    """Compare Monte-Carlo estimates against the analytic pipeline at the config's ``sigma``."""
    protocol = cfg.build()
    sigma = cfg.sigma
    checks: list[dict] = []
    k = 0
    if cfg.task == "cc":
        graph = protocol.graph_at(sigma)
        state = build_cluster(graph)
        batch = mc.sample_state(state, shots, _substream(seed, k))
        checks += _cov_checks("cluster", state.cov, mc.empirical_covariance(batch), shots)
        for c in cfg.collaborations:
            k += 1
            rate = cc_rate(protocol, c.name, sigma)
            s, est = mc.sample_secret_and_estimate(protocol, c.name, sigma, shots, _substream(seed, k))
            emp = mc.empirical_mutual_information(s, est)
            rho = math.sqrt(1 - 2.0 ** (-2 * rate.I_DA))
            se = rho / (math.log(2) * math.sqrt(shots))
            checks.append(_check(f"{c.name} I(D:A)", rate.I_DA, emp, se, abs(emp - rate.I_DA) <= MI_TOLERANCE))
        return checks
    for c in cfg.collaborations:
        seq = c.sequence
        state = extract_DA(protocol.graph, seq, sigma, sigma_d, protocol.dealer)
        k += 1
        batch = mc.sample_state(state, shots, _substream(seed, k))
        checks += _cov_checks(f"{c.name} V_DA", state.cov, mc.empirical_covariance(batch), shots)
        if cfg.task == "cq":
            k += 1
            gD, gh, Vp = balance_squeezing(state)
            target = state_average(Vp)
            record = mc.sample_paired_homodyne(state, shots, _substream(seed, k))
            processed = classical_postprocess(record, gD, gh)
            emp, se = processed.covariance(), processed.standard_errors()
            for i, j in ((0, 0), (1, 1), (2, 2), (3, 3), (0, 2), (1, 3)):
                checks.append(_check(f"{c.name} V'' cov[{i},{j}]", target[i, j], emp[i, j], se[i, j],
                                     abs(emp[i, j] - target[i, j]) <= SE_MULTIPLE * se[i, j]))
    return checks


def run_validate(cfg: ProtocolConfig, out: Path, seed: int, shots: int, sigma_d=None) -> tuple[Path, bool]:
    checks = validation_checks(cfg, seed, shots, sigma_d)
    ok = all(c["pass"] for c in checks)
    report = {"config": cfg.name, "seed": seed, "shots": shots, "pass": ok, "checks": checks}
    path = out / f"{cfg.name}_validate.json"
    path.write_text(json.dumps(report, indent=2) + "\n")
    return path, ok


# -- entry point ---------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cvqss", description="CV cluster-state secret sharing: rates, negativity, MC validation")
    ap.add_argument("--config", required=True, help=f"config JSON path, or a preset name ({', '.join(PRESETS)})")
    ap.add_argument("--command", required=True, choices=("rate", "negativity", "validate"))
    ap.add_argument("--out", default=".", help="output directory (created if missing)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--shots", type=int, default=100_000)
    ap.add_argument("--sigma-d", type=float, default=None, help="dealer squeezing, overrides the config")
    ap.add_argument("--workers", type=int, default=1, help="threads for sweep points")
    return ap


def _load(arg: str) -> ProtocolConfig:
    if not Path(arg).exists() and arg in PRESETS:
        return load_preset(arg)
    return load_config(arg)


def run(args: argparse.Namespace) -> int:
    cfg = _load(args.config)
    if args.shots < 2:
        raise ConfigError("--shots: must be at least 2")
    if args.workers < 1:
        raise ConfigError("--workers: must be at least 1")
    sigma_d = cfg.sigma_D
    if args.sigma_d is not None:
        if cfg.task == "cc":
            raise ConfigError("--sigma-d: task 'cc' has no dealer mode")
        if not args.sigma_d > 0:
            raise ConfigError("--sigma-d: must be positive")
        sigma_d = args.sigma_d
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.command == "validate":
        path, ok = run_validate(cfg, out, args.seed, args.shots, sigma_d)
        print(path)
        if not ok:
            raise ValidationFailure(f"Monte-Carlo validation failed; see {path}")
        return 0
    for path in run_sweep(cfg, args.command, out, sigma_d, args.workers):
        print(path)
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except ValidationFailure as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 4
    except CVQSSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
