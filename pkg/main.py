"""
stoqlab - CLI Entry Point
Batch experiment harness: one subcommand per experiment tool, plus the acceptance suite
"""

import argparse
import sys
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

from dotenv import load_dotenv
from loguru import logger

from core.errors import StoqlabError
from core.orchestrator import SuiteOrchestrator
from core.settings import ExperimentConfig, Settings, get_settings
from tools import FAIL, PASS, STATUS_EXIT_CODES, TOOL_REGISTRY
from utils.helpers import build_report, write_csv, write_report
from utils.logger import setup_logger

USAGE_ERROR = 2


class Option(NamedTuple):
    """One subcommand flag: where its value lands in the ExperimentConfig"""
    flag: str
    key: str
    kind: str  # "path", "knob" or "field"
    kwargs: Dict[str, Any]


def path(flag: str, help: str) -> Option:
    return Option(flag, flag.lstrip("-").replace("-", "_"), "path", {"metavar": "JSON", "help": help})


def knob(flag: str, help: str, key: Optional[str] = None, **kwargs: Any) -> Option:
    return Option(flag, key or flag.lstrip("-").replace("-", "_"), "knob", dict(kwargs, help=help))


def flag(name: str, help: str) -> Option:
    return knob(name, help, action="store_true")


def field(name: str, help: str, type: Any) -> Option:
    return Option(name, name.lstrip("-"), "field", {"type": type, "help": help})


THRESHOLDS = [knob("--c", "completeness threshold, e.g. 2/3"), knob("--s", "soundness threshold, e.g. 1/3")]
NP_WITNESS = [
    knob("--witness", "branch distribution", choices=["honest", "uniform", "far", "point", "file"]),
    knob("--labeling", "one label per vertex for honest/far witnesses", nargs="+", type=int),
    knob("--vertex", "vertex of a point witness", type=int),
    knob("--label", "label of a point witness", type=int),
    path("--witness-file", "JSON with a 'vector' over (vertex, label) pairs"),
]

SUBCOMMANDS: Dict[str, Tuple[str, List[Option]]] = {
    "circuit": ("simulate a reversible circuit", [
        path("--circuit", "circuit JSON (or --instance)"),
        path("--second", "circuit applied after the first"),
        knob("--control", "wrap the circuit as controlled on this qubit", type=int),
        knob("--ancilla", "clean ancilla for the controlled form", type=int),
        knob("--inputs", "basis strings to map, qubit 0 first", nargs="+"),
    ]),
    "verify": ("acceptance of a verifier on a witness", [
        path("--verifier", "verifier JSON (or --instance)"),
        path("--witness", "witness state JSON"),
        *THRESHOLDS,
        knob("--close-zeros", "output qubits expected in |0>", nargs="+", type=int),
        knob("--close-pluses", "output qubits expected in |+>", nargs="+", type=int),
    ]),
    "sepval": ("separable value hsep(M)", [
        path("--matrix", "partitioned matrix JSON"),
        flag("--remark", "use M = |00><11| + |11><00|"),
        knob("--shift-a", "check hsep(aM + bI) = a hsep(M) + b", type=float),
        knob("--shift-b", "shift offset b", type=float),
    ]),
    "mult-check": ("multiplicativity of hsep under tensor products", [
        path("--matrix", "first partitioned matrix JSON"),
        path("--matrix2", "second matrix; the first by default"),
        flag("--remark", "use the non-multiplicative example"),
    ]),
    "product-test": ("product test acceptance", [
        path("--rho", "first witness register"),
        path("--sigma", "second witness register; rho by default"),
        knob("--k", "provers", type=int),
        knob("--ell", "qubits per prover", type=int),
        flag("--eta", "check P_prod(rho, rho) <= 1 - eta/3"),
    ]),
    "symmetrize": ("symmetrization constructions", [
        knob("--kind", "construction", choices=["length-efficient", "projector", "sym-to-stoq"]),
        path("--verifier", "verifier JSON"),
        path("--factors", "JSON list of per-prover states"),
        *THRESHOLDS,
        knob("--k", "provers", type=int),
        knob("--ell", "qubits per prover", type=int),
        knob("--b", "dyadic precision bits", type=int),
        knob("--bundles", "label bundles override", type=int),
    ]),
    "compress": ("k-prover to 2-prover compression", [
        path("--verifier", "verifier JSON"),
        path("--rho", "first witness register"),
        path("--sigma", "second witness register; rho by default"),
        *THRESHOLDS,
        knob("--lambda", "mixing weight override, e.g. 1/4", key="lambda"),
    ]),
    "repeat": ("weak or strong conjunction", [
        knob("--kind", "conjunction", choices=["weak", "strong"]),
        path("--verifier", "verifier JSON"),
        path("--witness", "single-copy witness JSON"),
        knob("--copies", "number of copies", type=int),
        *THRESHOLDS,
    ]),
    "np4": ("K-prover constraint-graph protocol", [
        *NP_WITNESS,
        field("--K", "provers; C sqrt(n) by default", int),
        field("--delta", "uniformity distance", float),
        field("--trials", "Monte Carlo branches", int),
    ]),
    "np5": ("two-prover constraint-graph protocol", [
        *NP_WITNESS,
        flag("--circuit", "cross-check against the gate-level construction"),
        flag("--minimize", "certify the minimum rejection on a grid"),
    ]),
    "birthday": ("generalized birthday paradox", [
        field("--K", "samples", int),
        knob("--n", "outcome space size", type=int),
        path("--mu", "JSON with 'mu' and optional 'bad_pairs', 'omega0'"),
        field("--trials", "Monte Carlo trials", int),
    ]),
    "rect-closure": ("rectangular closure test", [
        field("--gamma", "rectangle gap", float),
        field("--rounds", "round count override", int),
        flag("--recursive", "use the recursive implementation"),
        flag("--rectangles", "also report the exact rectangle maximum"),
        flag("--certify", "bound hsep of the acceptance matrix against 1 - gamma"),
    ]),
    "sos-round": ("moment-oracle rounding", [
        path("--oracle", "mixture oracle JSON"),
        path("--matrix", "non-negative tensor matrix JSON"),
        field("--epsilon", "conditioning target", float),
    ]),
    "cleancc": ("clean connected component verifier", [
        flag("--simulate", "cross-check by circuit simulation (n <= 3)"),
        flag("--sweep", "exhaustive no-instance sweep"),
    ]),
}


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stoqlab", description="Stoquastic Merlin-Arthur experiment harness")
    parser.add_argument("--config", help="alternate config.yaml")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="seed; mandatory for Monte Carlo subcommands")
    common.add_argument("--mode", choices=["rational", "float"], default=settings.arithmetic.mode)
    common.add_argument("--out", help="JSON report path; stdout by default")
    common.add_argument("--csv", help="flat CSV projection of the report")
    common.add_argument("--workers", type=int, default=settings.simulation.workers,
                        help="worker processes (STOQLAB_WORKERS)")

    for name, (help, options) in SUBCOMMANDS.items():
        cmd = sub.add_parser(name, help=help, parents=[common])
        cmd.add_argument("--instance", help="instance JSON")
        for option in options:
            cmd.add_argument(option.flag, dest=f"opt_{option.key}", **option.kwargs)

    suite = sub.add_parser("suite", help="run the acceptance-criteria battery", parents=[common])
    suite.add_argument("--only", action="append", default=[],
                       help="criterion name(s), comma separated or repeated")
    return parser


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """
    Collect the parsed flags into a validated ExperimentConfig

    Raises:
        InstanceError: a field outside its range or a missing seed
    """
    paths: Dict[str, str] = {}
    knobs: Dict[str, Any] = {}
    fields: Dict[str, Any] = {}
    for option in SUBCOMMANDS[args.subcommand][1]:
        value = getattr(args, f"opt_{option.key}")
        if value is None or value is False:
            continue
        target = {"path": paths, "knob": knobs, "field": fields}[option.kind]
        target[option.key] = value
    return ExperimentConfig.create(
        subcommand=args.subcommand, instance=args.instance, paths=paths, knobs=knobs,
        seed=args.seed, workers=args.workers, mode=args.mode, out=args.out, csv=args.csv, **fields
    )


def diagnose(command: str, message: str) -> int:
    """One diagnostic line on stderr; no report is written"""
    print(f"stoqlab {command}: error: {message}", file=sys.stderr)
    return USAGE_ERROR


def emit(command: str, status: str, result: Dict[str, Any], out: Optional[str], csv: Optional[str]) -> int:
    report = build_report(command, status, result)
    try:
        write_report(report, out)
        if csv:
            write_csv(report, csv)
    except OSError as e:
        return diagnose(command, f"cannot write report: {e}")
    return STATUS_EXIT_CODES[status]


def run_experiment(args: argparse.Namespace, settings: Settings) -> int:
    config = build_config(args)
    tool = TOOL_REGISTRY[args.subcommand](settings=settings)
    response = tool.execute(config)
    if not response["success"]:
        return diagnose(args.subcommand, f"{response['error_type']}: {response['error']}")
    return emit(args.subcommand, response["metadata"]["status"], response["result"], config.out, config.csv)


def run_suite(args: argparse.Namespace, settings: Settings) -> int:
    if args.workers < 1:
        return diagnose("suite", f"--workers must be positive, got {args.workers}")
    only = [name.strip() for item in args.only for name in item.split(",") if name.strip()]
    outcome = SuiteOrchestrator(settings).run(only=only, seed=args.seed, workers=args.workers, mode=args.mode)
    if not outcome["success"]:
        return diagnose("suite", "; ".join(outcome["errors"]) or "suite did not run")
    status = PASS if outcome["all_passed"] else FAIL
    result = {"rows": outcome["records"], "summary": outcome["summary"]}
    return emit("suite", status, result, args.out, args.csv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand

    Returns:
        0 on ACCEPT/SUCCESS/PASS, 1 on REJECT/VIOLATION/FAIL, 2 on usage or instance errors
    """
    load_dotenv()
    argv = list(sys.argv[1:] if argv is None else argv)
    config_path = None
    if "--config" in argv[:-1]:
        config_path = argv[argv.index("--config") + 1]
    try:
        settings = get_settings(config_path)
    except StoqlabError as e:
        return diagnose("config", str(e))
    setup_logger(settings.logging.level, settings.logging.file)

    parser = build_parser(settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE_ERROR if e.code else 0

    try:
        if args.subcommand == "suite":
            return run_suite(args, settings)
        return run_experiment(args, settings)
    except StoqlabError as e:
        logger.error(f"[CLI] {type(e).__name__}: {e}")
        return diagnose(args.subcommand, str(e))


if __name__ == "__main__":
    sys.exit(main())
