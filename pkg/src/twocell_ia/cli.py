"""Command-line harness for the two-cell simulator.

Subcommands: ``simulate`` (SNR sweeps to CSV from an experiment spec file),
``dof`` (slope fits on sweep CSVs), ``feedback-table`` (closed-form feedback
overhead), ``verify`` (invariant spot checks on fresh channels), ``plot``
(sum rate vs SNR figures).

Exit codes: 0 success, 1 invariant failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .align import BeamformerSet, run_proposed_scheme
from .baselines import SCHEME_NAMES, czf_dof, scheme_supported
from .errors import (
    DegenerateRealizationError,
    InfeasibleConfigError,
    InvalidInputError,
    TwoCellIAError,
)
from .exchange import feedback_count, format_trace, simulate_exchange
from .linalg import DEFAULT_TOL, collinearity_angle, fix_phase
from .metrics import (
    DOF_WINDOW_DB,
    MAX_REDRAWS_PER_TRIAL,
    compute_rates,
    ergodic_sum_rate,
    estimate_dof,
    interference_leakage,
)
from .scenario import ScenarioConfig, config_at_snr, generate_channels, other_cell

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2

CSV_HEADER = "scheme,M,N,K,snr_db,sum_rate_mean,sum_rate_stderr,trials,redraws"
DOF_HEADER = "scheme,M,N,K,dof,fit_quality"

_GLOBAL_KEYS = ("schemes", "output_dir", "emit_plot")
_SCENARIO_KEYS = ("M", "N", "K", "snr_db", "trials", "seed")
_VERIFY_SNR_DB = 30.0
_RATE_EQUIVALENCE_TOL = 1e-9


@dataclass
class ExperimentSpec:
    """Parsed experiment file: scenarios to sweep, schemes to run, output options."""

    scenarios: list[ScenarioConfig] = field(default_factory=list)
    schemes: list[str] = field(default_factory=list)
    output_dir: Path = Path("results")
    emit_plot: bool = False


class SpecFileError(Exception):
    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")


def _parse_snr_grid(text: str, path, line_no) -> tuple[float, ...]:
    """Either 'start:stop:step' (inclusive) or a whitespace-separated list of dB values."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise SpecFileError(path, line_no, f"snr_db range must be start:stop:step, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise SpecFileError(path, line_no, f"non-numeric snr_db range {text!r}") from None
        if step <= 0 or stop < start:
            raise SpecFileError(path, line_no, f"snr_db range must ascend with positive step: {text!r}")
        n = int(round((stop - start) / step))
        return tuple(start + j * step for j in range(n + 1))
    try:
        return tuple(float(p) for p in text.replace(",", " ").split())
    except ValueError:
        raise SpecFileError(path, line_no, f"non-numeric snr_db list {text!r}") from None


def _parse_bool(text: str, path, line_no) -> bool:
    lowered = text.strip().lower()
    if lowered in ("yes", "true", "1", "on"):
        return True
    if lowered in ("no", "false", "0", "off"):
        return False
    raise SpecFileError(path, line_no, f"expected yes/no, got {text!r}")


def _finish_scenario(block: dict, path, line_no) -> ScenarioConfig:
    missing = [key for key in _SCENARIO_KEYS if key not in block]
    if missing:
        raise SpecFileError(path, line_no, f"scenario block missing keys: {', '.join(missing)}")
    try:
        return ScenarioConfig(
            M=block["M"],
            N=block["N"],
            K=block["K"],
            snr_grid_db=block["snr_db"],
            trials=block["trials"],
            seed=block["seed"],
        )
    except InvalidInputError as exc:
        raise SpecFileError(path, line_no, f"invalid scenario: {exc}") from None


def parse_experiment_file(path) -> ExperimentSpec:
    """Parse the flat line-oriented experiment format (see README for the grammar)."""
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise SpecFileError(path, 0, f"cannot read spec file: {exc}") from None

    spec = ExperimentSpec()
    block: dict | None = None
    block_start = 0
    for line_no, raw_line in enumerate(raw.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "scenario":
            if block is not None:
                spec.scenarios.append(_finish_scenario(block, path, block_start))
            block = {}
            block_start = line_no
            continue
        if "=" not in line:
            raise SpecFileError(path, line_no, f"expected 'key = value' or 'scenario', got {line!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if block is None:
            if key == "schemes":
                spec.schemes = value.replace(",", " ").split()
            elif key == "output_dir":
                spec.output_dir = Path(value)
            elif key == "emit_plot":
                spec.emit_plot = _parse_bool(value, path, line_no)
            else:
                raise SpecFileError(path, line_no, f"unknown global key {key!r} (known: {_GLOBAL_KEYS})")
            continue
        if key in ("M", "N", "K", "trials", "seed"):
            try:
                block[key] = int(value)
            except ValueError:
                raise SpecFileError(path, line_no, f"{key} must be an integer, got {value!r}") from None
        elif key == "snr_db":
            block[key] = _parse_snr_grid(value, path, line_no)
        else:
            raise SpecFileError(path, line_no, f"unknown scenario key {key!r} (known: {_SCENARIO_KEYS})")
    if block is not None:
        spec.scenarios.append(_finish_scenario(block, path, len(raw.splitlines())))

    if not spec.scenarios:
        raise SpecFileError(path, 0, "spec contains no scenario block")
    if not spec.schemes:
        raise SpecFileError(path, 0, "spec lists no schemes")
    unknown = [s for s in spec.schemes if s not in SCHEME_NAMES]
    if unknown:
        raise SpecFileError(path, 0, f"unknown schemes {unknown}; known: {list(SCHEME_NAMES)}")
    return spec


def _scenario_csv_name(cfg: ScenarioConfig, used: set) -> str:
    base = f"sum_rate_M{cfg.M}_N{cfg.N}_K{cfg.K}"
    name = f"{base}.csv"
    suffix = 1
    while name in used:
        suffix += 1
        name = f"{base}_{suffix}.csv"
    used.add(name)
    return name


def cmd_simulate(args) -> int:
    try:
        spec = parse_experiment_file(args.spec)
    except SpecFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outdir = Path(args.output) if args.output else spec.output_dir
    outdir.mkdir(parents=True, exist_ok=True)
    used_names: set = set()
    for cfg in spec.scenarios:
        if args.trials is not None:
            cfg = dataclasses.replace(cfg, trials=args.trials)
        rows = []
        for scheme in sorted(set(spec.schemes)):
            support = scheme_supported(scheme, cfg.M, cfg.N, cfg.K)
            if not support:
                print(
                    f"warning: skipping {scheme} at (M,N,K)=({cfg.M},{cfg.N},{cfg.K}): {support.reason}",
                    file=sys.stderr,
                )
                continue
            for snr_db in cfg.snr_grid_db:
                result = ergodic_sum_rate(cfg, scheme, snr_db, workers=args.workers)
                rows.append(
                    f"{scheme},{cfg.M},{cfg.N},{cfg.K},{float(snr_db)!r},"
                    f"{float(result.mean)!r},{float(result.stderr)!r},{result.trials},{result.redraws}"
                )
        csv_path = outdir / _scenario_csv_name(cfg, used_names)
        csv_path.write_text(CSV_HEADER + "\n" + "".join(r + "\n" for r in rows))
        print(f"wrote {csv_path} ({len(rows)} rows)")
        if spec.emit_plot and rows:
            plot_path = csv_path.with_suffix(".pdf")
            _plot_csv(csv_path, plot_path)
            print(f"wrote {plot_path}")
    return EXIT_OK


def _read_sweep_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_dof(args) -> int:
    window = (args.window[0], args.window[1])
    groups: dict[tuple, list[tuple[float, float]]] = {}
    for path in args.csv:
        for row in _read_sweep_csv(path):
            key = (row["scheme"], int(row["M"]), int(row["N"]), int(row["K"]))
            groups.setdefault(key, []).append((float(row["snr_db"]), float(row["sum_rate_mean"])))
    if not groups:
        print("error: no data rows in the given CSV files", file=sys.stderr)
        return EXIT_CONFIG

    failures = 0
    lines = [DOF_HEADER]
    for key in sorted(groups):
        scheme, M, N, K = key
        try:
            est = estimate_dof(groups[key], window=window)
        except InvalidInputError as exc:
            print(f"error: {scheme} (M,N,K)=({M},{N},{K}): {exc}", file=sys.stderr)
            failures += 1
            continue
        lines.append(f"{scheme},{M},{N},{K},{float(est.dof)!r},{float(est.fit_quality)!r}")
    for line in lines:
        print(line)
    if args.out:
        Path(args.out).write_text("".join(line + "\n" for line in lines))
    return EXIT_CONFIG if failures else EXIT_OK


def cmd_feedback_table(args) -> int:
    if args.k_min < 2 or args.k_max < args.k_min:
        print("error: feedback table requires 2 <= k-min <= k-max", file=sys.stderr)
        return EXIT_CONFIG
    dof_of = {
        "czf": lambda K: czf_dof(K + 1, K, K),
        "subspace_proxy": lambda K: 2 * (K - 1),
        "proposed": lambda K: 2 * K,
    }
    header = f"{'K':>3} {'scheme':<15} {'dof':>4} {'serving':>9} {'interfering':>12} {'total':>9}"
    print(header)
    print("-" * len(header))
    csv_lines = ["K,scheme,dof,serving,interfering,total"]
    for K in range(args.k_min, args.k_max + 1):
        for scheme in ("czf", "subspace_proxy", "proposed"):
            report = feedback_count(scheme, K + 1, K, K)
            dof = dof_of[scheme](K)
            print(
                f"{K:>3} {scheme:<15} {dof:>4} {report.serving_complex_count:>9} "
                f"{report.interfering_complex_count:>12} {report.total_complex_count:>9}"
            )
            csv_lines.append(
                f"{K},{scheme},{dof},{report.serving_complex_count},"
                f"{report.interfering_complex_count},{report.total_complex_count}"
            )
    if args.out:
        Path(args.out).write_text("".join(line + "\n" for line in csv_lines))
    return EXIT_OK


def _max_ici_collinearity(channels, bf: BeamformerSet) -> float:
    """Largest pairwise angle among each cell's combined cross-cell channel vectors."""
    worst = 0.0
    K = channels.K
    for i in (0, 1):
        victim = other_cell(i)
        vecs = [
            channels.bs_to_user(i, victim, k).conj().T @ bf.w[victim, k] for k in range(K)
        ]
        for a in range(K):
            for b in range(a + 1, K):
                worst = max(worst, collinearity_angle(vecs[a], vecs[b]))
    return worst


def _perturbed_combiner(bf: BeamformerSet) -> BeamformerSet:
    """Fault injection: rotate one combiner slightly, keeping it unit norm."""
    w = bf.w.copy()
    bumped = w[0, 0] + 1e-3 * np.roll(w[0, 0], 1)
    w[0, 0] = fix_phase(bumped / np.linalg.norm(bumped))
    return dataclasses.replace(bf, w=w)


def cmd_verify(args) -> int:
    support = scheme_supported("proposed", args.M, args.N, args.K)
    if not support:
        print(
            f"error: (M,N,K)=({args.M},{args.N},{args.K}) infeasible: {support.reason}",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    cfg = config_at_snr(
        ScenarioConfig(M=args.M, N=args.N, K=args.K, trials=args.trials, seed=args.seed),
        _VERIFY_SNR_DB,
    )
    tol = DEFAULT_TOL
    worst = {"leakage": 0.0, "collinearity": 0.0, "rate_diff": 0.0}
    redraws = 0
    for trial in range(cfg.trials):
        channels = None
        for attempt in range(MAX_REDRAWS_PER_TRIAL + 1):
            candidate = generate_channels(cfg, trial, attempt=attempt)
            try:
                bf = run_proposed_scheme(candidate, cfg, tol)
            except DegenerateRealizationError:
                redraws += 1
                continue
            channels = candidate
            break
        if channels is None:
            print(f"error: trial {trial} degenerate beyond redraw budget", file=sys.stderr)
            return EXIT_INVARIANT
        if args.inject_fault and trial == 0:
            bf = _perturbed_combiner(bf)

        failures = []
        leakage = interference_leakage(channels, bf)
        worst["leakage"] = max(worst["leakage"], leakage)
        if leakage > tol.align_tol:
            failures.append(f"interference leakage {leakage:.3e} > {tol.align_tol}")
        if args.K >= 2:
            angle = _max_ici_collinearity(channels, bf)
            worst["collinearity"] = max(worst["collinearity"], angle)
            if angle > tol.align_tol:
                failures.append(f"ICI collinearity angle {angle:.3e} > {tol.align_tol}")
        # simulate_exchange performs the locality audit internally.
        distributed_bf, log = simulate_exchange(channels, cfg, tol)
        if args.dump_trace and trial == 0:
            Path(args.dump_trace).write_text(format_trace(log))
            print(f"wrote message trace of trial 0 to {args.dump_trace}")
        central = compute_rates(channels, bf, cfg.noise_var).per_user_rate
        distributed = compute_rates(channels, distributed_bf, cfg.noise_var).per_user_rate
        rate_diff = float(np.max(np.abs(central - distributed)))
        worst["rate_diff"] = max(worst["rate_diff"], rate_diff)
        if rate_diff > _RATE_EQUIVALENCE_TOL:
            failures.append(f"distributed/centralized rate gap {rate_diff:.3e} > {_RATE_EQUIVALENCE_TOL}")

        if failures:
            print(f"FAIL trial {trial}: " + "; ".join(failures))
            print(f"replay with seed={cfg.seed} trial_index={trial}")
            return EXIT_INVARIANT
    print(
        f"PASS {cfg.trials} trials at (M,N,K)=({args.M},{args.N},{args.K}): "
        f"max leakage {worst['leakage']:.3e}, max ICI angle {worst['collinearity']:.3e}, "
        f"max rate gap {worst['rate_diff']:.3e}, redraws {redraws}"
    )
    return EXIT_OK


def render_sweep_plot(rows):
    """Build the sum-rate-vs-SNR figure for a list of sweep CSV rows."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not rows:
        raise InvalidInputError("no data rows to plot")
    groups: dict[tuple, list[tuple[float, float]]] = {}
    for row in rows:
        key = (row["scheme"], int(row["M"]), int(row["N"]), int(row["K"]))
        groups.setdefault(key, []).append((float(row["snr_db"]), float(row["sum_rate_mean"])))

    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for key in sorted(groups):
        scheme, M, N, K = key
        pts = sorted(groups[key])
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                label=f"{scheme} ({M},{N},{K})")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("ergodic sum rate (bits/s/Hz)")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper left")
    return fig, ax


def _plot_csv(csv_path, out_path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = _read_sweep_csv(csv_path)
    if not rows:
        raise InvalidInputError(f"no data rows in {csv_path}")
    fig, _ = render_sweep_plot(rows)
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)


def cmd_plot(args) -> int:
    out = Path(args.out) if args.out else Path(args.csv).with_suffix(".pdf")
    try:
        _plot_csv(args.csv, out)
    except (InvalidInputError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twocell-ia",
        description="Two-cell MIMO downlink simulator: alignment scheme, baselines, feedback accounting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run the SNR sweeps of an experiment spec file to CSV")
    p_sim.add_argument("spec", help="experiment spec file (see README for the format)")
    p_sim.add_argument("-o", "--output", help="output directory (overrides the spec file)")
    p_sim.add_argument("--trials", type=int, help="override the trial count of every scenario")
    p_sim.add_argument("--workers", type=int, default=1, help="parallel trial workers (default 1)")
    p_sim.set_defaults(func=cmd_simulate)

    p_dof = sub.add_parser("dof", help="least-squares DoF slopes from sweep CSV files")
    p_dof.add_argument("csv", nargs="+", help="CSV files produced by `simulate`")
    p_dof.add_argument(
        "--window", nargs=2, type=float, default=list(DOF_WINDOW_DB), metavar=("LOW", "HIGH"),
        help="SNR window in dB (default 40 60)",
    )
    p_dof.add_argument("--out", help="also write the table to this CSV path")
    p_dof.set_defaults(func=cmd_dof)

    p_fb = sub.add_parser("feedback-table", help="DoF and feedback-overhead table on (K+1, K, K)")
    p_fb.add_argument("--k-min", type=int, default=2)
    p_fb.add_argument("--k-max", type=int, default=8)
    p_fb.add_argument("--out", help="also write the table to this CSV path")
    p_fb.set_defaults(func=cmd_feedback_table)

    p_ver = sub.add_parser("verify", help="spot-check the scheme invariants on fresh channels")
    p_ver.add_argument("-M", type=int, required=True)
    p_ver.add_argument("-N", type=int, required=True)
    p_ver.add_argument("-K", type=int, required=True)
    p_ver.add_argument("--trials", type=int, default=1000)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument(
        "--inject-fault", action="store_true",
        help="perturb a combiner on trial 0 to prove the checks catch violations",
    )
    p_ver.add_argument(
        "--dump-trace", metavar="FILE",
        help="write the message trace of trial 0 (round,sender,receiver,payload_kind,count)",
    )
    p_ver.set_defaults(func=cmd_verify)

    p_plot = sub.add_parser("plot", help="plot sum rate vs SNR from a sweep CSV")
    p_plot.add_argument("csv")
    p_plot.add_argument("--out", help="output file (default: CSV path with .pdf suffix)")
    p_plot.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on bad arguments
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InvalidInputError, InfeasibleConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TwoCellIAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    raise SystemExit(main())
