"""Command-line front end.

Every subcommand reads a JSON config (``--config``) and prints a short
machine-parseable report; the schedule-running subcommands also write a CSV
population trace (``--out``).  Exit codes: 0 success, 2 config error, 1
numerical failure (an ``--strict`` threshold violated, or I/O trouble).

Config layout::

    {
      "topology": "diamond_chain" | "switch" | "hex_lattice" | "custom",
      "n": 3,                      # diamond_chain
      "descriptor": {...},         # hex_lattice
      "network": {...},            # custom: explicit NetworkSpec
      "params": {"omega_c": 1.0, "delta": 0.0, "g": 65.0, "j": 1.0},
      "protocol": {
        "times": "auto",           # or explicit [t1, t2] / single number
        "port": 2,                 # switch target port
        "path": ["a", "b"],        # hex route, upload vertex to download vertex
        "compensate": true,        # entangle only
        "window": [0.0, 10.0],     # search window for "auto" times
        "grid": 20001              # scan resolution for "auto" times
      },
      "output": {"path": "trace.csv", "samples_per_window": 241}
    }

Analysis subcommands (``blocks``, ``transfer-time``, ``validate-analytic``)
ignore the protocol/output blocks; ``transfer-time`` reads the block name
from ``"block"`` or ``--block``.  Flags override config values.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .closed_form import validate_analytic
from .collective import (
    block_decompose,
    chain_collective_basis,
    extract_block,
    lattice_collective_basis,
    switch_collective_basis,
)
from .evolution import (
    auto_grid_points,
    find_transfer_time,
    site_population,
)
from .network import (
    HexLatticeDescriptor,
    NetworkSpec,
    SystemParams,
    build_diamond_chain,
    build_hex_lattice,
    build_single_excitation_hamiltonian,
    build_switch,
)
from .routing import (
    TraceResult,
    chain_routing_schedule,
    entanglement_transfer,
    hex_routing_schedule,
    run_schedule,
    switch_schedule,
)

__all__ = ["main", "emit_trace_csv", "ConfigError"]

# atom-to-atom transfer pair inside a block, by block dimension
_TRANSFER_PAIRS = {4: (1, 3), 6: (1, 5)}

_RESIDUAL_THRESHOLD = 1e-12
_ANALYTIC_THRESHOLD = 1e-9


class ConfigError(Exception):
    """Malformed or inconsistent configuration; maps to exit code 2."""


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def _config_params(cfg: dict) -> SystemParams:
    raw = cfg.get("params", {})
    if not isinstance(raw, dict):
        raise ConfigError("'params' must be an object")
    try:
        return SystemParams.from_json_dict(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad params: {exc}") from exc


def _protocol(cfg: dict) -> dict:
    proto = cfg.get("protocol", {})
    if not isinstance(proto, dict):
        raise ConfigError("'protocol' must be an object")
    return proto


def _search_window(args, cfg: dict, params: SystemParams) -> tuple[float, float]:
    if args.tmax is not None:
        if not args.tmax > 0:
            raise ConfigError(f"--tmax must be positive, got {args.tmax}")
        return (0.0, float(args.tmax))
    window = cfg.get("window", _protocol(cfg).get("window"))
    if window is not None:
        if not (isinstance(window, (list, tuple)) and len(window) == 2):
            raise ConfigError("'window' must be a [lo, hi] pair")
        lo, hi = float(window[0]), float(window[1])
        if not hi > lo:
            raise ConfigError(f"empty search window {window}")
        return (lo, hi)
    # dispersive transfers are slower by a factor ~|delta|/g
    return (0.0, 10.0) if abs(params.delta) <= params.g else (0.0, 600.0)


def _grid_points(args, cfg: dict, block, window) -> int:
    grid = args.grid if args.grid is not None else cfg.get("grid", _protocol(cfg).get("grid"))
    if grid is None:
        return auto_grid_points(block, window)
    grid = int(grid)
    if grid < 3:
        raise ConfigError(f"grid must be >= 3, got {grid}")
    return grid


def _samples_per_window(args, cfg: dict) -> int:
    output = cfg.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("'output' must be an object")
    samples = args.samples if args.samples is not None else output.get("samples_per_window", 241)
    samples = int(samples)
    if samples < 2:
        raise ConfigError(f"samples_per_window must be >= 2, got {samples}")
    return samples


def _out_path(args, cfg: dict) -> str | None:
    output = cfg.get("output", {})
    return args.out if args.out is not None else output.get("path")


def _require_topology(cfg: dict, *allowed: str) -> str:
    topology = cfg.get("topology")
    if topology not in allowed:
        raise ConfigError(f"this subcommand needs topology in {sorted(allowed)}, got {topology!r}")
    return topology


def _chain_size(cfg: dict) -> int:
    n = cfg.get("n")
    if not isinstance(n, int) or n < 1:
        raise ConfigError(f"diamond_chain needs a positive integer 'n', got {n!r}")
    return n


def _descriptor(cfg: dict) -> HexLatticeDescriptor:
    raw = cfg.get("descriptor")
    if not isinstance(raw, dict):
        raise ConfigError("hex_lattice needs a 'descriptor' object")
    return HexLatticeDescriptor.from_json_dict(raw)


def _resolved_time(params: SystemParams, which: str, window, grid):
    block = extract_block(params, which)
    n = grid if grid is not None else auto_grid_points(block, window)
    src, tgt = _TRANSFER_PAIRS[block.dim]
    return find_transfer_time(block, src, tgt, window=window, grid_points=n)


def _positive_time(value, label: str) -> float:
    try:
        t = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{label} must be a number, got {value!r}") from None
    if not t > 0:
        raise ConfigError(f"{label} must be positive, got {t}")
    return t


def emit_trace_csv(
    trace: TraceResult,
    path: str,
    t_star: float | None = None,
    fidelity: float | None = None,
    phase: float | None = None,
    extra_comments: tuple[str, ...] = (),
) -> None:
    """Write a population trace as CSV.

    Header ``t,F,<labels>,norm``; one row per sample with 12 significant
    digits; footer comment ``# t_star=.. fidelity=.. phase=..`` (preceded by
    any extra comment lines).  Defaults report the end of the schedule.
    """
    if trace.num_samples == 0:
        raise ValueError("refusing to write an empty trace")
    t_star = trace.total_time if t_star is None else t_star
    fidelity = trace.final_population if fidelity is None else fidelity
    phase = trace.final_phase if phase is None else phase
    lines = ["t,F," + ",".join(trace.labels) + ",norm"]
    for i in range(trace.num_samples):
        row = [f"{trace.times[i]:.12g}", f"{trace.photon[i]:.12g}"]
        row.extend(f"{p:.12g}" for p in trace.populations[i])
        row.append(f"{trace.norms[i]:.12f}")
        lines.append(",".join(row))
    lines.extend(extra_comments)
    lines.append(f"# t_star={t_star:.12g} fidelity={fidelity:.12g} phase={phase:.12g}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _network_and_basis(cfg: dict, params: SystemParams):
    topology = _require_topology(cfg, "diamond_chain", "switch", "hex_lattice")
    if topology == "diamond_chain":
        n = _chain_size(cfg)
        return build_diamond_chain(n, params), chain_collective_basis(n)
    if topology == "switch":
        return build_switch(params), switch_collective_basis()
    desc = _descriptor(cfg)
    return build_hex_lattice(desc, params), lattice_collective_basis(desc)


def _cmd_blocks(args) -> int:
    cfg = _load_config(args.config)
    params = _config_params(cfg)
    spec, transform = _network_and_basis(cfg, params)
    h = build_single_excitation_hamiltonian(spec)
    blocks, residual = block_decompose(h, transform)
    shown = "<=1e-12" if residual <= _RESIDUAL_THRESHOLD else f"{residual:.3e}"
    print(f"blocks: {','.join(str(b.dim) for b in blocks)} residual: {shown}")
    if args.out:
        lines = []
        for block in blocks:
            lines.append(f"# block {block.name} dim={block.dim} basis={'|'.join(block.labels)}")
            for row in block.matrix:
                lines.append(",".join(f"{x:.12g}" for x in row))
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    if args.strict and residual > _RESIDUAL_THRESHOLD:
        print(f"strict: residual {residual:.3e} above {_RESIDUAL_THRESHOLD}", file=sys.stderr)
        return 1
    return 0


def _cmd_transfer_time(args) -> int:
    cfg = _load_config(args.config)
    if cfg.get("topology") == "custom":
        raw = cfg.get("network")
        if not isinstance(raw, dict):
            raise ConfigError("custom topology needs a 'network' object")
        spec = NetworkSpec.from_json_dict(raw)
        if args.source is None or args.target is None:
            raise ConfigError("custom topology needs --source and --target mode indices")
        h = build_single_excitation_hamiltonian(spec)
        params = spec.params
        source, target = args.source, args.target
    else:
        params = _config_params(cfg)
        which = args.block if args.block is not None else cfg.get("block", "end")
        h = extract_block(params, which)
        defaults = _TRANSFER_PAIRS[h.dim]
        source = args.source if args.source is not None else defaults[0]
        target = args.target if args.target is not None else defaults[1]
    window = _search_window(args, cfg, params)
    grid = _grid_points(args, cfg, h, window)
    result = find_transfer_time(h, source, target, window=window, grid_points=grid)
    print(
        f"t_star={result.t_star:.12g} fidelity={result.fidelity:.12g} "
        f"phase={result.phase:.12g}"
    )
    if args.strict and result.fidelity < 0.999:
        print(f"strict: peak fidelity {result.fidelity:.6f} below 0.999", file=sys.stderr)
        return 1
    return 0


def _cmd_validate_analytic(args) -> int:
    cfg = _load_config(args.config)
    params = _config_params(cfg)
    samples = int(cfg.get("samples", 101))
    if samples < 2:
        raise ConfigError(f"samples must be >= 2, got {samples}")
    names = cfg.get("blocks", ["end", "mid", "upload", "hop"])
    if not isinstance(names, list) or not names:
        raise ConfigError("'blocks' must be a non-empty list of block names")
    regimes = (("resonant", 0.0, 10.0), ("dispersive", -1000.0, 600.0))
    worst = 0.0
    for which in names:
        for regime, delta, tmax in regimes:
            regime_params = replace(params, delta=delta)
            times = np.linspace(0.0, args.tmax if args.tmax is not None else tmax, samples)
            err = validate_analytic(regime_params, which, times)
            worst = max(worst, err)
            print(f"block={which} regime={regime} max_error={err:.6e}")
    print(f"worst={worst:.6e}")
    if args.strict and worst > _ANALYTIC_THRESHOLD:
        print(f"strict: worst error {worst:.3e} above {_ANALYTIC_THRESHOLD}", file=sys.stderr)
        return 1
    return 0


def _chain_times(args, cfg: dict, params: SystemParams):
    """Returns (t1, t2, auto_comment_or_None)."""
    times = _protocol(cfg).get("times", "auto")
    if times == "auto":
        window = _search_window(args, cfg, params)
        grid = args.grid if args.grid is not None else _protocol(cfg).get("grid")
        r1 = _resolved_time(params, "end", window, grid)
        r2 = _resolved_time(params, "mid", window, grid)
        return r1.t_star, r2.t_star, f"# times t1={r1.t_star:.12g} t2={r2.t_star:.12g}"
    if isinstance(times, (list, tuple)) and len(times) == 2:
        return _positive_time(times[0], "t1"), _positive_time(times[1], "t2"), None
    raise ConfigError(f"chain 'times' must be \"auto\" or [t1, t2], got {times!r}")


def _report(trace: TraceResult, extra: str = "") -> None:
    print(
        f"t_total={trace.total_time:.12g} fidelity={trace.final_population:.12g} "
        f"phase={trace.final_phase:.12g}" + extra
    )


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    _require_topology(cfg, "diamond_chain")
    params = _config_params(cfg)
    n = _chain_size(cfg)
    t1, t2, comment = _chain_times(args, cfg, params)
    spec = build_diamond_chain(n, params)
    schedule = chain_routing_schedule(n, t1, t2)
    trace = run_schedule(spec, schedule, samples_per_window=_samples_per_window(args, cfg))
    _report(trace)
    if comment:
        print(comment.lstrip("# "))
    out = _out_path(args, cfg)
    if out:
        emit_trace_csv(trace, out, extra_comments=(comment,) if comment else ())
    if args.strict and trace.final_population < 0.99:
        print(f"strict: final fidelity {trace.final_population:.6f} below 0.99", file=sys.stderr)
        return 1
    return 0


def _cmd_switch(args) -> int:
    cfg = _load_config(args.config)
    _require_topology(cfg, "switch")
    params = _config_params(cfg)
    proto = _protocol(cfg)
    port = proto.get("port")
    if port not in (1, 2, 3):
        raise ConfigError(f"switch 'port' must be 1, 2, or 3, got {port!r}")
    times = proto.get("times", "auto")
    comment = None
    if times == "auto":
        window = _search_window(args, cfg, params)
        grid = args.grid if args.grid is not None else proto.get("grid")
        r = _resolved_time(params, "upload", window, grid)
        t = r.t_star
        comment = f"# times t={t:.12g}"
    else:
        t = _positive_time(times[0] if isinstance(times, (list, tuple)) else times, "t")
    spec = build_switch(params)
    schedule = switch_schedule(port, t)
    track = [(f"atom[{spec.sites[k].label}]", 2 * k + 1) for k in range(4)]
    trace = run_schedule(
        spec, schedule, samples_per_window=_samples_per_window(args, cfg), track=track
    )
    leakage = sum(
        site_population(trace.final_state, k, "atom") for k in (1, 2, 3) if k != port
    )
    _report(trace, extra=f" leakage={leakage:.6e}")
    if comment:
        print(comment.lstrip("# "))
    out = _out_path(args, cfg)
    if out:
        emit_trace_csv(trace, out, extra_comments=(comment,) if comment else ())
    if args.strict and (trace.final_population < 0.99 or leakage > 1e-6):
        print(
            f"strict: fidelity {trace.final_population:.6f} / leakage {leakage:.3e} "
            "outside 0.99 / 1e-6",
            file=sys.stderr,
        )
        return 1
    return 0


def _cmd_route(args) -> int:
    cfg = _load_config(args.config)
    _require_topology(cfg, "hex_lattice")
    params = _config_params(cfg)
    desc = _descriptor(cfg)
    proto = _protocol(cfg)
    path = proto.get("path")
    if not isinstance(path, list) or len(path) < 2:
        raise ConfigError("hex route needs a 'path' list of at least two vertices")
    times = proto.get("times", "auto")
    comment = None
    if times == "auto":
        window = _search_window(args, cfg, params)
        grid = args.grid if args.grid is not None else proto.get("grid")
        r_up = _resolved_time(params, "upload", window, grid)
        r_hop = _resolved_time(params, "hop", window, grid)
        t_up, t_hop = r_up.t_star, r_hop.t_star
        comment = f"# times t_upload={t_up:.12g} t_hop={t_hop:.12g}"
    elif isinstance(times, (list, tuple)) and len(times) == 2:
        t_up = _positive_time(times[0], "t_upload")
        t_hop = _positive_time(times[1], "t_hop")
    else:
        raise ConfigError(f"hex 'times' must be \"auto\" or [t_upload, t_hop], got {times!r}")
    spec = build_hex_lattice(desc, params)
    schedule = hex_routing_schedule(desc, path, t_up, t_hop)
    trace = run_schedule(spec, schedule, samples_per_window=_samples_per_window(args, cfg))
    _report(trace)
    if comment:
        print(comment.lstrip("# "))
    out = _out_path(args, cfg)
    if out:
        emit_trace_csv(trace, out, extra_comments=(comment,) if comment else ())
    if args.strict and trace.final_population < 0.99:
        print(f"strict: final fidelity {trace.final_population:.6f} below 0.99", file=sys.stderr)
        return 1
    return 0


def _cmd_entangle(args) -> int:
    cfg = _load_config(args.config)
    _require_topology(cfg, "diamond_chain")
    params = _config_params(cfg)
    n = _chain_size(cfg)
    compensate = _protocol(cfg).get("compensate", True)
    if not isinstance(compensate, bool):
        raise ConfigError(f"'compensate' must be a boolean, got {compensate!r}")
    t1, t2, comment = _chain_times(args, cfg, params)
    spec = build_diamond_chain(n, params)
    schedule = chain_routing_schedule(n, t1, t2)
    result = entanglement_transfer(
        spec, schedule, compensate=compensate, samples_per_window=_samples_per_window(args, cfg)
    )
    print(
        f"t_total={result.trace.total_time:.12g} "
        f"bell_fidelity={result.bell_fidelity:.12g} "
        f"compensation_phase={result.compensation_phase:.12g} "
        f"transfer_amplitude={abs(result.amplitude):.12g}"
    )
    if comment:
        print(comment.lstrip("# "))
    out = _out_path(args, cfg)
    if out:
        emit_trace_csv(
            result.trace,
            out,
            fidelity=result.bell_fidelity,
            phase=result.compensation_phase,
            extra_comments=(comment,) if comment else (),
        )
    if args.strict and result.bell_fidelity < 0.99:
        print(f"strict: Bell fidelity {result.bell_fidelity:.6f} below 0.99", file=sys.stderr)
        return 1
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", help="output file (CSV trace, or block matrices for 'blocks')")
    common.add_argument("--tmax", type=float, help="override the search window as (0, tmax)")
    common.add_argument("--grid", type=int, help="scan resolution for transfer-time searches")
    common.add_argument("--samples", type=int, help="samples per evolution window in traces")
    common.add_argument(
        "--strict", action="store_true", help="exit 1 if a numerical threshold is violated"
    )
    parser = argparse.ArgumentParser(
        prog="cavity-route",
        description="Simulate perfect single-excitation routing in cavity-atom networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("blocks", parents=[common], help="block sizes and off-block residual")
    p.set_defaults(handler=_cmd_blocks)

    p = sub.add_parser(
        "transfer-time", parents=[common], help="locate a transfer peak on one block"
    )
    p.add_argument("--block", help="block selector (end, mid, upload, hop, ...)")
    p.add_argument("--source", type=int, help="source basis index")
    p.add_argument("--target", type=int, help="target basis index")
    p.set_defaults(handler=_cmd_transfer_time)

    p = sub.add_parser(
        "validate-analytic",
        parents=[common],
        help="closed-form vs numeric propagator, both regimes",
    )
    p.set_defaults(handler=_cmd_validate_analytic)

    p = sub.add_parser("simulate", parents=[common], help="end-to-end diamond-chain transfer")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("switch", parents=[common], help="steer through the four-port switch")
    p.set_defaults(handler=_cmd_switch)

    p = sub.add_parser("route", parents=[common], help="route along a lattice vertex path")
    p.set_defaults(handler=_cmd_route)

    p = sub.add_parser("entangle", parents=[common], help="entanglement transfer on a chain")
    p.set_defaults(handler=_cmd_entangle)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # domain validation rejected a config-derived value
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except np.linalg.LinAlgError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
