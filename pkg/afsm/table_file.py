"""
Rule-table files

One rule per line, fields separated by ';':

    id; name; from-states; to; predicate; volume; vibration

from-states is a comma-separated list. '#' starts a comment. An optional
'afsm <name>' line names the embedded table the file transcribes.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Union

from .model import AFSMDef, ContextState, Output, Rule
from .predicates import AfsmError, parse_predicate
from .tables import EMBEDDED_TABLES, TABLE_ALL_SENSORS


class RuleFileError(AfsmError, ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


@dataclass
class RuleFile:
    rules: List[Rule]
    table: Optional[str] = None

    @property
    def reference(self) -> AFSMDef:
        """The embedded table this file should match"""
        return EMBEDDED_TABLES[self.table] if self.table else TABLE_ALL_SENSORS


def parse_rules(text: str) -> RuleFile:
    parsed = RuleFile(rules=[])
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("afsm "):
            table = line.split(None, 1)[1].strip()
            if table not in EMBEDDED_TABLES:
                raise RuleFileError(number, f"unknown table {table!r}")
            parsed.table = table
            continue

        fields = [f.strip() for f in line.split(";")]
        if len(fields) != 7:
            raise RuleFileError(number, f"expected 7 fields, got {len(fields)}")
        rule_id, name, sources, target, predicate, volume, vibration = fields
        try:
            parsed.rules.append(Rule(
                id=rule_id,
                name=name,
                from_states=frozenset(ContextState(s.strip()) for s in sources.split(",")),
                to=ContextState(target),
                predicate=parse_predicate(predicate),
                output=Output(int(volume), vibration),
            ))
        except (AfsmError, ValueError) as e:
            raise RuleFileError(number, str(e)) from None
    return parsed


def load_rules(path: Union[str, Path]) -> RuleFile:
    return parse_rules(Path(path).read_text(encoding="utf-8"))


def format_rule(rule: Rule) -> str:
    sources = ", ".join(s.value for s in ContextState if s in rule.from_states)
    return "; ".join([
        rule.id, rule.name, sources, rule.to.value, str(rule.predicate),
        str(rule.output.volume), rule.output.vibration.value,
    ])


def format_rules(m: AFSMDef, header: bool = True) -> str:
    lines = [f"afsm {m.name}"] if header else []
    lines.extend(format_rule(r) for r in m.rules)
    return "\n".join(lines) + "\n"


_FIELDS = ("name", "from_states", "to", "predicate", "output")


def diff_rules(rules: Iterable[Rule], reference: AFSMDef) -> List[str]:
    """Field-by-field differences between transcribed rules and a reference table"""
    found = {r.id: r for r in rules}
    problems = []
    for expected in reference.rules:
        actual = found.pop(expected.id, None)
        if actual is None:
            problems.append(f"rule {expected.id} ({expected.name}): missing")
            continue
        for name in _FIELDS:
            want, got = getattr(expected, name), getattr(actual, name)
            if want != got:
                problems.append(f"rule {expected.id}: {name} differs: expected {_show(want)}, got {_show(got)}")
    for extra in found.values():
        problems.append(f"rule {extra.id} ({extra.name}): not in {reference.name}")
    return problems


def _show(value) -> str:
    if isinstance(value, frozenset):
        return "{" + ", ".join(s.value for s in ContextState if s in value) + "}"
    return str(value)
