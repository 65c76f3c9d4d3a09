"""Command-line interface.

Subcommands
-----------
simulate
    Monte-Carlo SNR sweep producing a per-detector SINR gain table (CSV).
complexity
    Per-bin complex-multiply counts over an (M, K) grid (CSV).
verify
    Randomized detector identity/property suite; nonzero exit on violation.
precode-check
    Precoder self-consistency suite; nonzero exit on violation.

Scenario parameters come from built-in defaults, overridden by an optional
``key=value`` config file (one pair per line, ``#`` comments), overridden in
turn by command-line flags of the same name.
"""

from __future__ import annotations

import argparse
import sys

from .channel import ChannelConfig
from .detect import DetectorKind
from .frame import FrameConfig
from .harness import ScenarioConfig, complexity_sweep, run_monte_carlo
from .verify import run_detector_checks, run_precoder_checks

# One entry per scenario key; config-file keys and CLI flags share these names.
SCENARIO_DEFAULTS = {
    "m": 64,
    "k": 14,
    "n": 2048,
    "l_h": 130,
    "l_cp": 144,
    "decay_samples": 25.0,
    "power_low": 0.1,
    "power_high": 1.9,
    "constellation": "qpsk",
    "snr_sweep": "-30:10:2",
    "frames_per_point": 20,
    "detectors": "mrc_mmse,tr_mrc",
    "seed": 1,
    "output": "sinr.csv",
}

_CASTS = {
    "m": int,
    "k": int,
    "n": int,
    "l_h": int,
    "l_cp": int,
    "decay_samples": float,
    "power_low": float,
    "power_high": float,
    "constellation": str,
    "snr_sweep": str,
    "frames_per_point": int,
    "detectors": str,
    "seed": int,
    "output": str,
}


def parse_config_file(path: str) -> dict:
    """Read ``key=value`` lines, ignoring blanks and ``#`` comments."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line.strip()!r}")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in SCENARIO_DEFAULTS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _CASTS[key](raw.strip())
    return values


def parse_sweep(text: str) -> tuple[float, ...]:
    """Parse ``start:stop:step`` (inclusive) or a comma-separated dB list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"sweep range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("sweep step must be positive")
        count = int(round((stop - start) / step)) + 1
        points = tuple(start + i * step for i in range(max(count, 0)) if start + i * step <= stop + 1e-9)
        if not points:
            raise ValueError(f"empty sweep range {text!r}")
        return points
    return tuple(float(p) for p in text.split(","))


def parse_detectors(text: str) -> tuple[DetectorKind, ...]:
    kinds = []
    for token in text.split(","):
        token = token.strip()
        try:
            kinds.append(DetectorKind(token))
        except ValueError:
            known = ", ".join(k.value for k in DetectorKind)
            raise ValueError(f"unknown detector {token!r}; known: {known}") from None
    return tuple(kinds)


def build_scenario(values: dict) -> ScenarioConfig:
    channel = ChannelConfig(
        num_antennas=values["m"],
        num_users=values["k"],
        frame_len=values["n"],
        channel_len=values["l_h"],
        decay_samples=values["decay_samples"],
        power_spread=(values["power_low"], values["power_high"]),
        seed=values["seed"],
    )
    frame = FrameConfig(
        frame_len=values["n"],
        cp_len=values["l_cp"],
        constellation=values["constellation"],
    )
    return ScenarioConfig(
        channel=channel,
        frame=frame,
        detectors=parse_detectors(values["detectors"]),
        snr_sweep_db=parse_sweep(values["snr_sweep"]),
        frames_per_point=values["frames_per_point"],
        output=values["output"],
    )


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value scenario file; flags override it")
    parser.add_argument("--m", type=int, help="base-station antenna count")
    parser.add_argument("--k", type=int, help="user count")
    parser.add_argument("--n", type=int, help="samples per frame")
    parser.add_argument("--l-h", dest="l_h", type=int, help="impulse-response length")
    parser.add_argument("--l-cp", dest="l_cp", type=int, help="cyclic-prefix length")
    parser.add_argument("--decay-samples", dest="decay_samples", type=float,
                        help="exponential profile constant")
    parser.add_argument("--power-low", dest="power_low", type=float,
                        help="lower per-antenna power bound")
    parser.add_argument("--power-high", dest="power_high", type=float,
                        help="upper per-antenna power bound")
    parser.add_argument("--constellation", help="qpsk or 16qam")
    parser.add_argument("--snr-sweep", dest="snr_sweep",
                        help="input SNR points: start:stop:step or comma list (dB)")
    parser.add_argument("--frames-per-point", dest="frames_per_point", type=int,
                        help="Monte-Carlo frames per sweep point")
    parser.add_argument("--detectors", help="comma list: mmse, mrc_mmse, tr_mrc, low_snr, high_snr_zf")
    parser.add_argument("--seed", type=int, help="master RNG seed (default 1)")
    parser.add_argument("--output", help="CSV output path")


def _resolve_scenario(args: argparse.Namespace) -> ScenarioConfig:
    values = dict(SCENARIO_DEFAULTS)
    if args.config:
        values.update(parse_config_file(args.config))
    for key in SCENARIO_DEFAULTS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            values[key] = flag_value
    return build_scenario(values)


def _print_checks(checks) -> int:
    failed = 0
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status}  {check.name}: {check.detail}")
        failed += 0 if check.passed else 1
    if failed:
        print(f"{failed} check(s) failed", file=sys.stderr)
    return 1 if failed else 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    scenario = _resolve_scenario(args)
    report = run_monte_carlo(scenario)
    print(f"{'snr_db':>8} {'detector':>12} {'out_sinr_db':>12} {'gain_db':>9} "
          f"{'low_db':>8} {'high_db':>8} {'frames':>7}")
    for row in report.rows:
        print(
            f"{row.input_snr_db:8.1f} {row.detector.value:>12} {row.mean_output_sinr_db:12.3f} "
            f"{row.gain_db:9.3f} {row.gain_low_db:8.3f} {row.gain_high_db:8.3f} {row.n_frames:7d}"
        )
    if scenario.output:
        print(f"wrote {scenario.output}")
    return 0


def _cmd_complexity(args: argparse.Namespace) -> int:
    m_list = [int(v) for v in args.m_list.split(",")]
    report = complexity_sweep(m_list, args.k_max)
    text = report.to_csv(args.output)
    if args.output:
        print(f"wrote {args.output} ({len(report.rows)} rows)")
    else:
        print(text, end="")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    return _print_checks(run_detector_checks(seed=args.seed))


def _cmd_precode_check(args: argparse.Namespace) -> int:
    return _print_checks(run_precoder_checks(seed=args.seed))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fdmud",
        description="Frequency-domain multi-user detection for cyclic-prefix single-carrier massive MIMO",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the Monte-Carlo SNR sweep")
    _add_scenario_flags(sim)
    sim.set_defaults(func=_cmd_simulate)

    comp = sub.add_parser("complexity", help="emit per-bin complex-multiply counts")
    comp.add_argument("--m-list", dest="m_list", default="32,64,128",
                      help="comma list of antenna counts")
    comp.add_argument("--k-max", dest="k_max", type=int, default=30, help="largest user count")
    comp.add_argument("--output", default=None, help="CSV output path (default: stdout)")
    comp.set_defaults(func=_cmd_complexity)

    ver = sub.add_parser("verify", help="run the detector identity/property suite")
    ver.add_argument("--seed", type=int, default=1, help="suite RNG seed (default 1)")
    ver.set_defaults(func=_cmd_verify)

    pre = sub.add_parser("precode-check", help="run the precoder self-consistency suite")
    pre.add_argument("--seed", type=int, default=1, help="suite RNG seed (default 1)")
    pre.set_defaults(func=_cmd_precode_check)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
