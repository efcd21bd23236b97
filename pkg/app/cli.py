"""
Command line: reconcile / bench / plot / serve.

Exit codes: 0 success, 1 reconciliation failure, 2 usage error, 3 transport error.
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence

from app.application.dto.reconcile_dto import SweepRequestDTO
from app.application.harness import (
    Instance,
    gen_instance,
    run_trial,
    session_params_for,
    sweep,
    universe_for,
)
from app.core.config import Settings, load_settings
from app.core.logging import setup_logging
from app.domain.exceptions import TransportError
from app.domain.protocol import apply_reconciliation
from app.domain.value_objects import ProtocolName, SolverKind, TransportName
from app.infrastructure.results import plot_results
from app.infrastructure.session_runner import connect_and_send, listen_and_receive

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_TRANSPORT = 3


def _protocol_list(value: str) -> list[ProtocolName]:
    try:
        return [ProtocolName(p.strip()) for p in value.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csiblt", description="Set reconciliation with CS-encoded IBLTs"
    )
    parser.add_argument("--config", default=None, help="YAML settings file")
    parser.add_argument("--log-level", default="WARNING", help="DEBUG, INFO, WARNING, ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    rec = sub.add_parser("reconcile", help="Run one reconciliation between two hosts")
    rec.add_argument("--n", type=int, required=True)
    rec.add_argument("--k", type=int, required=True)
    rec.add_argument("--d", type=int, required=True)
    rec.add_argument("--seed", type=int, required=True)
    rec.add_argument(
        "--protocol", required=True, choices=[p.value for p in ProtocolName]
    )
    rec.add_argument(
        "--transport", default=TransportName.INPROC.value, choices=[t.value for t in TransportName]
    )
    rec.add_argument("--solver", default=None, choices=[s.value for s in SolverKind])
    side = rec.add_mutually_exclusive_group()
    side.add_argument("--listen", metavar="ADDR", help="Act as host B on host:port")
    side.add_argument("--connect", metavar="ADDR", help="Act as host A towards host:port")

    bench = sub.add_parser("bench", help="Sweep d and write a CSV of trial records")
    bench.add_argument("--n", type=int, required=True)
    bench.add_argument("--k", type=int, required=True)
    bench.add_argument("--d-min", type=int, required=True)
    bench.add_argument("--d-max", type=int, required=True)
    bench.add_argument("--d-step", type=int, required=True)
    bench.add_argument("--trials", type=int, required=True)
    bench.add_argument("--protocols", type=_protocol_list, required=True)
    bench.add_argument("--out", required=True)
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--allow-long", action="store_true")

    plot = sub.add_parser("plot", help="Render mean cost against d as SVG")
    plot.add_argument("--in", dest="in_path", required=True)
    plot.add_argument("--out", required=True)

    serve = sub.add_parser("serve", help="Start the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _with_solver(settings: Settings, kind: str | None) -> Settings:
    if kind is None:
        return settings
    return settings.model_copy(
        update={"solver": settings.solver.model_copy(update={"kind": SolverKind(kind)})}
    )


def _cmd_reconcile(args: argparse.Namespace, settings: Settings) -> int:
    settings = _with_solver(settings, args.solver)
    universe = universe_for([ProtocolName(args.protocol)], settings)
    instance = gen_instance(args.n, args.d, args.seed, universe)
    if args.listen or args.connect:
        if args.protocol != ProtocolName.CS_IBLT.value or args.transport != TransportName.TCP.value:
            raise ValueError("--listen/--connect need --protocol cs-iblt --transport tcp")
        return _reconcile_one_side(args, settings, instance)

    record = run_trial(instance, args.protocol, args.k, args.transport, settings)
    print(record.model_dump_json())
    return EXIT_OK if record.success else EXIT_FAILED


def _reconcile_one_side(args: argparse.Namespace, settings: Settings, instance: Instance) -> int:
    # both sides derive the same instance and session seeds from --seed
    timeout = settings.session.recv_timeout_s
    if args.connect:
        params = session_params_for(instance, args.k)
        state = connect_and_send(args.connect, instance.s_a, params, timeout)
        print(json.dumps({"rows_sent": state.next_row, "acknowledged": state.acknowledged}))
        return EXIT_OK if state.acknowledged else EXIT_FAILED

    outcome = listen_and_receive(args.listen, instance.s_b, settings.solver.to_config(), timeout)
    success = outcome.success and apply_reconciliation(
        instance.s_b, outcome.delta_a, outcome.delta_b
    ) == instance.s_a
    print(json.dumps({
        "rows_used": outcome.rows_used,
        "scalars_sent": outcome.scalars_sent,
        "delta_a": sorted(outcome.delta_a),
        "delta_b": sorted(outcome.delta_b),
        "abort_reason": outcome.abort_reason.name if outcome.abort_reason is not None else None,
        "success": success,
    }))
    return EXIT_OK if success else EXIT_FAILED


def _cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    request = SweepRequestDTO(
        n=args.n,
        k=args.k,
        d_min=args.d_min,
        d_max=args.d_max,
        d_step=args.d_step,
        trials=args.trials,
        protocols=args.protocols,
        jobs=args.jobs,
        allow_long=args.allow_long,
    )
    records = sweep(request, args.out, settings)
    failures = sum(not r.success for r in records)
    print(f"{len(records)} trials written to {args.out}, {failures} failed")
    return EXIT_OK


def _cmd_plot(args: argparse.Namespace, settings: Settings) -> int:
    plot_results(args.in_path, args.out)
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace, settings: Settings) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port)
    return EXIT_OK


_COMMANDS = {
    "reconcile": _cmd_reconcile,
    "bench": _cmd_bench,
    "plot": _cmd_plot,
    "serve": _cmd_serve,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        settings = load_settings(args.config)
        return _COMMANDS[args.command](args, settings)
    except TransportError as exc:
        logger.error("%s", exc)
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT


if __name__ == "__main__":
    sys.exit(main())
