"""
Contextual rule predicates
Atoms over GPS, Bluetooth and calendar readings, boolean connectives, and
references to other rules' predicates
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Iterator, List, Optional, Tuple, Union

from phone_sim import Location, Sensor, SensorSnapshot


class AfsmError(Exception):
    """Base class for A-FSM errors"""


class UnresolvedRuleRef(AfsmError, LookupError):
    pass


class CyclicRuleRef(AfsmError, ValueError):
    pass


class PredicateSyntaxError(AfsmError, ValueError):
    def __init__(self, text: str, position: int, reason: str):
        super().__init__(f"{reason} at column {position + 1}: {text!r}")
        self.position = position


class TimeRef(str, Enum):
    MEETING_START = "meeting_start"
    MEETING_END = "meeting_end"


# ============== ATOMS ==============

@dataclass(frozen=True)
class GpsIsValid:
    sensor = Sensor.GPS

    def evaluate(self, s: SensorSnapshot) -> bool:
        return s.gps.valid

    def __str__(self) -> str:
        return "GPS.isValid()"


@dataclass(frozen=True)
class GpsLocationIs:
    place: Location
    sensor = Sensor.GPS

    def evaluate(self, s: SensorSnapshot) -> bool:
        return s.gps.location == self.place

    def __str__(self) -> str:
        return f"GPS.location()={self.place.value}"


@dataclass(frozen=True)
class GpsSpeedGt:
    threshold: float
    sensor = Sensor.GPS

    def evaluate(self, s: SensorSnapshot) -> bool:
        return s.gps.speed > self.threshold

    def __str__(self) -> str:
        return f"GPS.speed()>{_number(self.threshold)}"


@dataclass(frozen=True)
class BtConnected:
    device: str
    sensor = Sensor.BLUETOOTH

    def evaluate(self, s: SensorSnapshot) -> bool:
        return self.device in s.bluetooth

    def __str__(self) -> str:
        return f"BT={self.device}"


@dataclass(frozen=True)
class BtCountGte:
    n: int
    sensor = Sensor.BLUETOOTH

    def evaluate(self, s: SensorSnapshot) -> bool:
        return s.bt_count >= self.n

    def __str__(self) -> str:
        return f"BT.count()>={self.n}"


@dataclass(frozen=True)
class TimeGte:
    ref: TimeRef
    sensor = Sensor.CALENDAR

    def evaluate(self, s: SensorSnapshot) -> bool:
        bound = s.meeting_start if self.ref == TimeRef.MEETING_START else s.meeting_end
        return s.time >= bound

    def __str__(self) -> str:
        return f"Time>={self.ref.value}"


Atom = Union[GpsIsValid, GpsLocationIs, GpsSpeedGt, BtConnected, BtCountGte, TimeGte]
ATOM_TYPES = (GpsIsValid, GpsLocationIs, GpsSpeedGt, BtConnected, BtCountGte, TimeGte)


# ============== CONNECTIVES ==============

@dataclass(frozen=True)
class Not:
    operand: "Predicate"

    def evaluate(self, s: SensorSnapshot) -> bool:
        return not self.operand.evaluate(s)

    def __str__(self) -> str:
        if isinstance(self.operand, (And, Or)):
            return f"!({self.operand})"
        return f"!{self.operand}"


@dataclass(frozen=True)
class And:
    operands: Tuple["Predicate", ...]

    def evaluate(self, s: SensorSnapshot) -> bool:
        return all(p.evaluate(s) for p in self.operands)

    def __str__(self) -> str:
        return " && ".join(f"({p})" if isinstance(p, Or) else str(p) for p in self.operands)


@dataclass(frozen=True)
class Or:
    operands: Tuple["Predicate", ...]

    def evaluate(self, s: SensorSnapshot) -> bool:
        return any(p.evaluate(s) for p in self.operands)

    def __str__(self) -> str:
        return " || ".join(f"({p})" if isinstance(p, And) else str(p) for p in self.operands)


@dataclass(frozen=True)
class RuleNegation:
    """Negation of another rule's full predicate, written !RuleName"""
    rule_name: str

    def evaluate(self, s: SensorSnapshot) -> bool:
        raise UnresolvedRuleRef(f"!{self.rule_name} must be inlined before evaluation")

    def __str__(self) -> str:
        return f"!{self.rule_name}"


Predicate = Union[Atom, Not, And, Or, RuleNegation]


def eval_predicate(p: Predicate, s: SensorSnapshot) -> bool:
    """Evaluate an inlined predicate against a snapshot"""
    return p.evaluate(s)


def atoms(p: Predicate) -> Iterator[Atom]:
    if isinstance(p, ATOM_TYPES):
        yield p
    elif isinstance(p, Not):
        yield from atoms(p.operand)
    elif isinstance(p, (And, Or)):
        for operand in p.operands:
            yield from atoms(operand)


def sensors_of(p: Predicate) -> FrozenSet[Sensor]:
    """Sensors an (inlined) predicate reads"""
    return frozenset(a.sensor for a in atoms(p))


def _number(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else str(value)


# ============== PARSER ==============

_TOKEN = re.compile(r"\s*(&&|\|\||>=|\(\)|[!()>=]|[A-Za-z_][A-Za-z0-9_.]*|\d+(?:\.\d+)?)")


def _tokenize(text: str) -> List[Tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN.match(text, pos)
        if not match:
            raise PredicateSyntaxError(text, pos, "unexpected character")
        tokens.append((match.group(1), match.start(1)))
        pos = match.end()
    return tokens


class _Parser:
    """
    Recursive descent over the tables' predicate notation

        expr    := and ('||' and)*
        and     := unary ('&&' unary)*
        unary   := '!' unary | '!' RuleName | '(' expr ')' | atom
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def parse(self) -> Predicate:
        if not self.tokens:
            raise PredicateSyntaxError(self.text, 0, "empty predicate")
        p = self._expr()
        if self.i != len(self.tokens):
            raise PredicateSyntaxError(self.text, self._pos(), "unexpected token")
        return p

    def _peek(self) -> Optional[str]:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def _pos(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def _take(self, expected: Optional[str] = None) -> str:
        token = self._peek()
        if token is None or (expected is not None and token != expected):
            want = expected or "a token"
            raise PredicateSyntaxError(self.text, self._pos(), f"expected {want}")
        self.i += 1
        return token

    def _expr(self) -> Predicate:
        operands = [self._and()]
        while self._peek() == "||":
            self._take()
            operands.append(self._and())
        return operands[0] if len(operands) == 1 else Or(tuple(operands))

    def _and(self) -> Predicate:
        operands = [self._unary()]
        while self._peek() == "&&":
            self._take()
            operands.append(self._unary())
        return operands[0] if len(operands) == 1 else And(tuple(operands))

    def _unary(self) -> Predicate:
        token = self._peek()
        if token == "!":
            self._take()
            following = self._peek()
            if following is not None and following[0].isalpha() and following not in _ATOM_NAMES:
                self._take()
                return RuleNegation(following)
            return Not(self._unary())
        if token == "(":
            self._take()
            p = self._expr()
            self._take(")")
            return p
        return self._atom()

    def _atom(self) -> Predicate:
        pos = self._pos()
        name = self._take()
        if name not in _ATOM_NAMES:
            raise PredicateSyntaxError(self.text, pos, f"unknown atom {name!r}")
        if self._peek() == "()":
            self._take()

        if name == "GPS.isValid":
            return GpsIsValid()
        if name == "GPS.location":
            self._take("=")
            return GpsLocationIs(Location(self._word()))
        if name == "GPS.speed":
            self._take(">")
            return GpsSpeedGt(self._num())
        if name == "BT":
            self._take("=")
            return BtConnected(self._word())
        if name == "BT.count":
            self._take(">=")
            return BtCountGte(int(self._num()))
        self._take(">=")
        return TimeGte(TimeRef(self._word()))

    def _word(self) -> str:
        pos = self._pos()
        word = self._take()
        if not word[0].isalpha() and word[0] != "_":
            raise PredicateSyntaxError(self.text, pos, "expected a name")
        return word

    def _num(self):
        pos = self._pos()
        token = self._take()
        try:
            value = float(token)
        except ValueError:
            raise PredicateSyntaxError(self.text, pos, "expected a number") from None
        return int(value) if value.is_integer() else value


_ATOM_NAMES = frozenset({"GPS.isValid", "GPS.location", "GPS.speed", "BT", "BT.count", "Time"})


def parse_predicate(text: str) -> Predicate:
    """Parse the tables' predicate notation, e.g. 'BT=home_pc || (GPS.isValid() && GPS.location()=home)'"""
    try:
        return _Parser(text).parse()
    except ValueError as e:
        if isinstance(e, PredicateSyntaxError):
            raise
        # Unknown location or time reference
        raise PredicateSyntaxError(text, 0, str(e)) from None
