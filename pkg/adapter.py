"""
PhoneAdapter command line
Runs scenarios against the micro-controller ensemble and inspects the rule tables
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, TextIO

from afsm import AFSMDef, RuleFileError, detect_conflicts, diff_rules, format_rules, load_rules
from config import ADAPTER_LOG_FILE, DEBUG_ADAPTER
from microcontrollers import CMVariant, all_health_states, config_map, context_rule, adaptation_rule
from scenario import (
    EXIT_CONFLICTS, EXIT_FAULT, EXIT_OK, EXIT_SCENARIO_ERROR,
    RunOptions, ScenarioParseError, load_scenario, run_scenario,
)

logger = logging.getLogger("adapter.cli")

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def setup_logging() -> None:
    """Logs go to stderr so the trace can use stdout"""
    logging.basicConfig(
        level=logging.DEBUG if DEBUG_ADAPTER else logging.INFO,
        format=LOG_FORMAT,
        datefmt='%H:%M:%S',
        stream=sys.stderr,
    )
    if ADAPTER_LOG_FILE:
        file_handler = logging.FileHandler(ADAPTER_LOG_FILE, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logging.getLogger().addHandler(file_handler)


# ============== COMMANDS ==============

def run(args: argparse.Namespace, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    try:
        scenario = load_scenario(args.scenario)
    except (OSError, ScenarioParseError) as e:
        logger.error(f"[CLI] {args.scenario}: {e}")
        return EXIT_SCENARIO_ERROR

    result = run_scenario(scenario, RunOptions(ticks=args.ticks, static=args.static, recreate=args.recreate))
    if args.trace:
        try:
            Path(args.trace).write_text(result.text, encoding="utf-8")
        except OSError as e:
            logger.error(f"[CLI] Cannot write trace to {args.trace}: {e}")
            return EXIT_SCENARIO_ERROR
        logger.info(f"[CLI] Trace written to {args.trace}")
    else:
        out.write(result.text)
    return result.exit_code


def validate_rules(path: str, out: Optional[TextIO] = None) -> int:
    """Diff a rule-table transcription against the embedded table it names"""
    out = out or sys.stdout
    try:
        rule_file = load_rules(path)
    except (OSError, RuleFileError) as e:
        out.write(f"{path}: {e}\n")
        return EXIT_SCENARIO_ERROR

    reference = rule_file.reference
    problems = diff_rules(rule_file.rules, reference)
    for problem in problems:
        out.write(problem + "\n")

    found = {r.id: r for r in rule_file.rules}
    matching = sum(1 for r in reference.rules if found.get(r.id) == r)
    out.write(f"{matching}/{len(reference.rules)} rules match {reference.name}\n")
    return EXIT_OK if not problems else EXIT_SCENARIO_ERROR


def check_conflicts(m: AFSMDef, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    conflicts = detect_conflicts(m)
    for conflict in conflicts:
        out.write(f"{conflict}\n")
    out.write(f"{len(conflicts)} conflict(s) in {m.name}\n")
    return EXIT_CONFLICTS if conflicts else EXIT_OK


def list_rules(variant: CMVariant, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    out.write(format_rules(variant.afsm))
    return EXIT_OK


def print_config_map(out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    table = config_map()
    out.write(f"{'gps':<6}{'bt':<6}{'ring':<6}{'vib':<6}{'rules':<7}{'ContextManager':<20}AdaptationManager\n")
    for health in all_health_states():
        config = table[health]
        flags = "".join(f"{'ok' if flag else 'FAIL':<6}"
                        for flag in (health.gps_ok, health.bt_ok, health.ringtone_ok, health.vibration_ok))
        rules = context_rule(health).id + "," + adaptation_rule(health).id
        out.write(f"{flags}{rules:<7}{config.active_cm.value:<20}{config.active_am.value}\n")
    return EXIT_OK


# ============== ENTRY POINT ==============

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adapter", description="PhoneAdapter micro-controller runtime")
    commands = parser.add_subparsers(dest="command", required=True)
    variants = [v.value for v in CMVariant]

    run_cmd = commands.add_parser("run", help="run a scenario and print its trace")
    run_cmd.add_argument("scenario", help="scenario file")
    run_cmd.add_argument("--ticks", type=int, default=None, help="override the scenario's tick count")
    run_cmd.add_argument("--trace", default=None, help="write the trace here instead of stdout")
    run_cmd.add_argument("--static", action="store_true", help="run without the MetaController")
    run_cmd.add_argument("--recreate", action="store_true",
                         help="recreate the active ContextManager and AdaptationManager every tick")

    validate_cmd = commands.add_parser("validate", help="diff a rule-table file against the embedded tables")
    validate_cmd.add_argument("tables", help="rule-table file")

    conflicts_cmd = commands.add_parser("check-conflicts", help="report rules enabled together")
    conflicts_cmd.add_argument("variant", choices=variants)

    list_cmd = commands.add_parser("list-rules", help="print a variant's rules in table-file format")
    list_cmd.add_argument("variant", choices=variants)

    commands.add_parser("config-map", help="print the controller configuration for every health state")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "run":
        if args.ticks is not None and args.ticks < 1:
            logger.error("[CLI] --ticks must be >= 1")
            return EXIT_SCENARIO_ERROR
        return run(args)
    if args.command == "validate":
        return validate_rules(args.tables)
    if args.command == "check-conflicts":
        return check_conflicts(CMVariant(args.variant).afsm)
    if args.command == "list-rules":
        return list_rules(CMVariant(args.variant))
    if args.command == "config-map":
        return print_config_map()
    return EXIT_FAULT


if __name__ == "__main__":
    setup_logging()
    sys.exit(main())
