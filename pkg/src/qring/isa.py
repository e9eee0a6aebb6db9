"""The device instruction language (.sdq files).

Six primitives, one operand each:

    OPEN t      open the optical switches at time t
    CLOS t      close the switches at time t
    ROTX θ      laser pulse on the atom (teleported-angle convention)
    ROTY θ      laser pulse on the atom, Ry(θ)
    MEAS m      measure the atom, store the bit in register m
    INIT Ψ      initialize the atom to |g0>, |g1> or |+>

plus line-oriented macro definitions (``define NAME p1 p2:``) and
conditional blocks (``if m1 != m2:``) with indentation-significant bodies
(tabs or 4-space units, not mixed arbitrarily).  ``#`` starts a comment.
Angle and time operands are arithmetic expressions over numbers, π, Δt, N,
macro parameters and measurement registers, with ``+ - * / ^`` and
parentheses; a number glued to π (``3π/4``) multiplies.

Macro expansion is purely syntactic: register expressions and conditionals
stay symbolic for the executor.  ``SCTR q`` expands to its four switch
events placed on a running clock that advances one ring period per
scattering.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

OPCODES = ("OPEN", "CLOS", "ROTX", "ROTY", "MEAS", "INIT")

PI_NAMES = ("π", "pi")
DT_NAMES = ("Δt", "dt")
RING_BINS_NAME = "N"

FILE_EXTENSION = ".sdq"


class SdqError(ValueError):
    """Parse or expansion error with source position."""

    def __init__(self, message: str, line: int | None = None,
                 col: int | None = None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f"line {line}"
            if col is not None:
                where += f", col {col}"
            where = f" ({where})"
        super().__init__(message + where)


# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float

    def __str__(self):
        if self.value == int(self.value) and abs(self.value) < 1e15:
            return str(int(self.value))
        return f"{self.value:.12g}"


@dataclass(frozen=True)
class Const:
    name: str  # 'π' | 'Δt' | 'N'

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Name:
    ident: str  # register or macro parameter

    def __str__(self):
        return self.ident


@dataclass(frozen=True)
class Neg:
    arg: "Expr"

    def __str__(self):
        return f"-{_paren(self.arg, 25)}"


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / ^
    lhs: "Expr"
    rhs: "Expr"

    def __str__(self):
        prec = _PREC[self.op]
        left = _paren(self.lhs, prec)
        right = _paren(self.rhs, prec + (0 if self.op == "^" else 1))
        return f"{left}{self.op}{right}"


Expr = Num | Const | Name | Neg | BinOp

_PREC = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}


def _prec_of(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 25
    return 100


def _paren(e: Expr, need: int) -> str:
    s = str(e)
    return f"({s})" if _prec_of(e) < need else s


def expr_registers(e: Expr) -> set[str]:
    """Free identifiers of an expression (registers after expansion)."""
    if isinstance(e, Name):
        return {e.ident}
    if isinstance(e, Neg):
        return expr_registers(e.arg)
    if isinstance(e, BinOp):
        return expr_registers(e.lhs) | expr_registers(e.rhs)
    return set()


def eval_expr(e: Expr, env: dict[str, float]) -> float:
    """Evaluate with bindings for registers/parameters and device constants."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        if e.name in PI_NAMES:
            return math.pi
        if e.name in env:
            return env[e.name]
        raise SdqError(f"device constant {e.name!r} not bound")
    if isinstance(e, Name):
        if e.ident not in env:
            raise SdqError(f"unbound identifier {e.ident!r}")
        return env[e.ident]
    if isinstance(e, Neg):
        return -eval_expr(e.arg, env)
    if isinstance(e, BinOp):
        a, b = eval_expr(e.lhs, env), eval_expr(e.rhs, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return a / b
        if e.op == "^":
            return a ** b
    raise SdqError(f"cannot evaluate {e!r}")


def substitute(e: Expr, bindings: dict[str, Expr]) -> Expr:
    """Replace named identifiers by expressions (macro argument binding)."""
    if isinstance(e, Name) and e.ident in bindings:
        return bindings[e.ident]
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, bindings))
    if isinstance(e, BinOp):
        return BinOp(e.op, substitute(e.lhs, bindings),
                     substitute(e.rhs, bindings))
    return e


# ---------------------------------------------------------------------------
# statements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AtomLit:
    which: str  # 'g0' | 'g1' | 'plus'

    def __str__(self):
        return {"g0": "|g0>", "g1": "|g1>", "plus": "|+>"}[self.which]


@dataclass(frozen=True)
class Instr:
    opcode: str
    operand: Expr | AtomLit
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Expr, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    lhs: Expr
    op: str  # '==' | '!='
    rhs: Expr
    body: tuple["Stmt", ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Comment:
    text: str
    line: int = field(default=0, compare=False)


Stmt = Instr | Call | If | Comment


@dataclass(frozen=True)
class MacroDef:
    name: str
    params: tuple[str, ...]
    body: tuple[Stmt, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Program:
    macros: dict[str, MacroDef]
    body: tuple[Stmt, ...]

    def __eq__(self, other):
        if not isinstance(other, Program):
            return NotImplemented
        return self.macros == other.macros and self.body == other.body


@dataclass(frozen=True)
class DeviceConfig:
    """Physical timing parameters of the storage ring."""

    n_photons: int
    dt: float = 1.0            # time-bin spacing Δt
    n_bins: int | None = None  # ring holds n_bins time bins
    loss_per_cycle: float = 0.0

    def __post_init__(self):
        if self.n_bins is None:
            # a 1-bin ring is degenerate (the photon never leaves the switch)
            object.__setattr__(self, "n_bins", max(self.n_photons, 2))
        if self.n_bins < self.n_photons:
            raise ValueError(
                f"ring has {self.n_bins} bins < {self.n_photons} photons")
        if self.dt <= 0:
            raise ValueError("time-bin spacing must be positive")
        if not 0.0 <= self.loss_per_cycle < 1.0:
            raise ValueError("loss per cycle must lie in [0, 1)")

    @property
    def ring_period(self) -> float:
        return self.n_bins * self.dt


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<atom>\|(?:g0|g1|\+)>)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[^\W\d]\w*)
  | (?P<cmp>==|!=)
  | (?P<op>[-+*/^()])
  | (?P<colon>:)
  | (?P<ws>[ \t]+)
    """,
    re.VERBOSE | re.UNICODE,
)


def _lex(text: str, line_no: int):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SdqError(f"unexpected character {text[pos]!r}",
                           line_no, pos + 1)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    return tokens


class _ExprParser:
    """Recursive-descent expression parser over one line's token list."""

    def __init__(self, tokens, line_no):
        self.toks = tokens
        self.i = 0
        self.line = line_no

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, "", 0)

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def done(self) -> bool:
        return self.i >= len(self.toks)

    def parse_expr(self) -> Expr:
        return self._sum()

    def parse_arg(self) -> Expr:
        # macro arguments bind tightly: a top-level binary +/- would be
        # ambiguous with the argument separator (space), so sums must be
        # parenthesized; unary minus and * / ^ are fine
        return self._term()

    def _sum(self) -> Expr:
        e = self._term()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            e = BinOp(op, e, self._term())
        return e

    def _term(self) -> Expr:
        e = self._unary()
        while self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            e = BinOp(op, e, self._unary())
        return e

    def _unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.next()
            return Neg(self._unary())
        if self.peek()[1] == "+":
            self.next()
            return self._unary()
        return self._power()

    def _power(self) -> Expr:
        base = self._atom()
        if self.peek()[1] == "^":
            self.next()
            return BinOp("^", base, self._unary())  # right-associative
        return base

    def _atom(self) -> Expr:
        kind, val, col = self.next()
        if kind == "num":
            num = Num(float(val))
            nkind, nval, _ = self.peek()
            # implicit multiplication: 3π, 2Δt
            if nkind == "ident" and (nval in PI_NAMES or nval in DT_NAMES
                                     or nval == RING_BINS_NAME):
                self.next()
                return BinOp("*", num, Const(_canon_const(nval)))
            return num
        if kind == "ident":
            if val in PI_NAMES or val in DT_NAMES or val == RING_BINS_NAME:
                return Const(_canon_const(val))
            return Name(val)
        if val == "(":
            e = self.parse_expr()
            k2, v2, c2 = self.next()
            if v2 != ")":
                raise SdqError("expected ')'", self.line, c2)
            return e
        raise SdqError(f"unexpected token {val!r} in expression",
                       self.line, col)


def _canon_const(name: str) -> str:
    if name in PI_NAMES:
        return "π"
    if name in DT_NAMES:
        return "Δt"
    return name


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _indent_of(raw: str, line_no: int) -> tuple[int, str]:
    """Indentation depth counting a tab or 4 spaces as one level."""
    depth = 0
    i = 0
    while i < len(raw):
        if raw[i] == "\t":
            depth += 1
            i += 1
        elif raw.startswith("    ", i):
            depth += 1
            i += 4
        elif raw[i] == " ":
            raise SdqError("indentation must be tabs or 4-space units",
                           line_no, i + 1)
        else:
            break
    return depth, raw[i:]


def parse(text: str) -> Program:
    """Parse .sdq source into a Program."""
    body: list = []
    macro_specs: list[tuple[str, tuple[str, ...], list, int]] = []
    stack: list[tuple[int, list]] = [(0, body)]

    for ln, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        depth, content = _indent_of(raw, ln)
        if content.lstrip().startswith("#"):
            while len(stack) > 1 and depth < stack[-1][0]:
                stack.pop()
            stack[-1][1].append(Comment(content.lstrip()[1:].strip(), ln))
            continue
        if "#" in content:
            content = content[:content.index("#")]
        content = content.rstrip()
        if not content:
            continue

        while len(stack) > 1 and depth < stack[-1][0]:
            stack.pop()
        if depth != stack[-1][0]:
            raise SdqError(
                f"unexpected indentation depth {depth} "
                f"(expected {stack[-1][0]})", ln, 1)

        tokens = _lex(content, ln)
        kind0, val0, col0 = tokens[0]

        if val0 == "define":
            if depth != 0:
                raise SdqError("nested macro definitions are not allowed", ln)
            if tokens[-1][1] != ":":
                raise SdqError("macro definition must end with ':'", ln)
            parts = tokens[1:-1]
            if not parts or parts[0][0] != "ident":
                raise SdqError("macro definition needs a name", ln)
            mname = parts[0][1]
            params = []
            for k, v, c in parts[1:]:
                if k != "ident":
                    raise SdqError(f"bad macro parameter {v!r}", ln, c)
                params.append(v)
            if any(m[0] == mname for m in macro_specs):
                raise SdqError(f"macro {mname!r} redefined", ln)
            mbody: list = []
            macro_specs.append((mname, tuple(params), mbody, ln))
            stack = [(0, body), (depth + 1, mbody)]
            continue

        if val0 == "if":
            if tokens[-1][1] != ":":
                raise SdqError("conditional must end with ':'", ln)
            p = _ExprParser(tokens[1:-1], ln)
            lhs = p.parse_expr()
            ck, cv, cc = p.next()
            if ck != "cmp":
                raise SdqError("conditional needs '==' or '!='", ln, cc)
            rhs = p.parse_expr()
            if not p.done():
                raise SdqError("trailing tokens after conditional", ln)
            node_body: list = []
            stack[-1][1].append(["__if__", If(lhs, cv, rhs, (), ln),
                                 node_body])
            stack.append((depth + 1, node_body))
            continue

        if kind0 == "ident" and val0 in OPCODES:
            p = _ExprParser(tokens[1:], ln)
            if p.done():
                raise SdqError(f"{val0} requires exactly one operand", ln)
            if val0 == "INIT":
                k, v, c = p.next()
                if k != "atom":
                    raise SdqError(f"INIT operand must be |g0>, |g1> or |+>,"
                                   f" got {v!r}", ln, c)
                which = {"|g0>": "g0", "|g1>": "g1", "|+>": "plus"}[v]
                operand: Expr | AtomLit = AtomLit(which)
            elif val0 == "MEAS":
                k, v, c = p.next()
                if k != "ident":
                    raise SdqError("MEAS operand must be a register name",
                                   ln, c)
                operand = Name(v)
            else:
                operand = p.parse_expr()
            if not p.done():
                raise SdqError(f"{val0} takes exactly one operand "
                               f"(trailing tokens)", ln)
            stack[-1][1].append(Instr(val0, operand, ln))
            continue

        if kind0 == "ident":
            p = _ExprParser(tokens[1:], ln)
            args = []
            while not p.done():
                args.append(p.parse_arg())
            stack[-1][1].append(Call(val0, tuple(args), ln))
            continue

        raise SdqError(f"cannot parse statement starting with {val0!r}",
                       ln, col0)

    def seal(stmts: list) -> tuple[Stmt, ...]:
        out = []
        for s in stmts:
            if isinstance(s, list) and s and s[0] == "__if__":
                out.append(replace(s[1], body=seal(s[2])))
            else:
                out.append(s)
        return tuple(out)

    macros = {
        name: MacroDef(name, params, seal(mbody), ln)
        for name, params, mbody, ln in macro_specs
    }
    return Program(macros=macros, body=seal(body))


# ---------------------------------------------------------------------------
# pretty printer
# ---------------------------------------------------------------------------

def pretty(p: Program) -> str:
    """Emit canonical .sdq text: one statement per line, single spaces."""
    out: list[str] = []

    def emit(stmts, depth):
        pad = "\t" * depth
        for s in stmts:
            if isinstance(s, Comment):
                out.append(f"{pad}# {s.text}" if s.text else f"{pad}#")
            elif isinstance(s, Instr):
                out.append(f"{pad}{s.opcode} {s.operand}")
            elif isinstance(s, Call):
                args = " ".join(str(a) for a in s.args)
                out.append(f"{pad}{s.name} {args}".rstrip())
            elif isinstance(s, If):
                out.append(f"{pad}if {s.lhs} {s.op} {s.rhs}:")
                emit(s.body, depth + 1)
            else:
                raise TypeError(f"cannot print {s!r}")

    for m in p.macros.values():
        header = f"define {m.name} {' '.join(m.params)}".rstrip()
        out.append(header + ":")
        emit(m.body, 1)
        out.append("")
    emit(p.body, 0)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# macro expansion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class XInstr:
    """Expanded instruction.

    OPEN/CLOS carry a concrete absolute ``time`` plus scatter-group
    provenance (group id + time bin); ROTX/ROTY keep symbolic operands.
    A synthetic SCTR marker follows each scattering group's switch events
    so executors need not re-derive scatter boundaries from the schedule.
    """

    opcode: str
    operand: Expr | AtomLit | None = None
    time: float | None = None
    group: int | None = None
    bin: int | None = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class XCond:
    lhs: Expr
    op: str
    rhs: Expr
    body: tuple["XNode", ...]
    line: int = field(default=0, compare=False)


XNode = XInstr | XCond


class _Expander:
    def __init__(self, program: Program, cfg: DeviceConfig):
        self.program = program
        self.cfg = cfg
        self.clock = 0.0
        self.group_counter = 0

    def expand(self) -> list[XNode]:
        return self._stmts(self.program.body, {}, frozenset())

    def _stmts(self, stmts, bindings, active) -> list[XNode]:
        out: list[XNode] = []
        for s in stmts:
            if isinstance(s, Comment):
                continue
            if isinstance(s, Instr):
                out.extend(self._instr(s, bindings))
            elif isinstance(s, If):
                lhs = substitute(s.lhs, bindings)
                rhs = substitute(s.rhs, bindings)
                body = self._stmts(s.body, bindings, active)
                out.append(XCond(lhs, s.op, rhs, tuple(body), s.line))
            elif isinstance(s, Call):
                out.extend(self._call(s, bindings, active))
            else:
                raise SdqError(f"cannot expand {s!r}")
        return out

    def _instr(self, s: Instr, bindings) -> list[XNode]:
        if s.opcode in ("OPEN", "CLOS"):
            expr = substitute(s.operand, bindings)
            env = {"Δt": self.cfg.dt, "N": float(self.cfg.n_bins)}
            try:
                t = eval_expr(expr, env)
            except SdqError as e:
                raise SdqError(
                    f"switch time must be concrete after expansion: {e}",
                    s.line) from e
            return [XInstr(s.opcode, None, time=self.clock + t, line=s.line)]
        if s.opcode in ("ROTX", "ROTY"):
            return [XInstr(s.opcode, substitute(s.operand, bindings),
                           line=s.line)]
        if s.opcode == "MEAS":
            op = s.operand
            if isinstance(op, Name) and op.ident in bindings:
                bound = bindings[op.ident]
                if not isinstance(bound, Name):
                    raise SdqError("MEAS target must be a register name",
                                   s.line)
                op = bound
            return [XInstr("MEAS", op, line=s.line)]
        return [XInstr(s.opcode, s.operand, line=s.line)]

    def _call(self, s: Call, bindings, active) -> list[XNode]:
        name = s.name
        if name in active:
            raise SdqError(f"recursive macro invocation of {name!r}", s.line)
        macro = self.program.macros.get(name)
        if macro is None:
            raise SdqError(f"unknown macro {name!r}", s.line)
        if len(s.args) != len(macro.params):
            raise SdqError(
                f"macro {name} takes {len(macro.params)} arguments, "
                f"got {len(s.args)}", s.line)
        new_bindings: dict[str, Expr] = {}
        for p, a in zip(macro.params, s.args):
            a = substitute(a, bindings)
            new_bindings[p] = a
            try:
                qv = self._resolve_qubit(a)
            except SdqError:
                qv = None
            if qv is not None:
                # bind t_p = time bin of the qubit argument
                new_bindings[f"t_{p}"] = Num(qv * self.cfg.dt)
        if name == "SCTR":
            qbin = self._resolve_qubit(substitute(s.args[0], bindings))
            nodes = self._stmts(macro.body, new_bindings, active | {name})
            gid = self.group_counter
            self.group_counter += 1
            tagged = []
            for nd in nodes:
                if isinstance(nd, XInstr) and nd.opcode in ("OPEN", "CLOS"):
                    tagged.append(replace(nd, group=gid, bin=qbin))
                else:
                    tagged.append(nd)
            tagged.append(XInstr("SCTR", Num(float(qbin)), group=gid,
                                 bin=qbin, line=s.line))
            # one period through the unit plus one circulating in the ring,
            # so the reinjection window never collides with the next
            # extraction window
            self.clock += 2 * self.cfg.ring_period
            return tagged
        return self._stmts(macro.body, new_bindings, active | {name})

    def _resolve_qubit(self, e: Expr) -> int:
        """Photon index of a qubit argument: qK token -> K-1, number -> bin."""
        if isinstance(e, Name):
            m = re.fullmatch(r"q(\d+)", e.ident)
            if m:
                return int(m.group(1)) - 1
            raise SdqError(f"cannot resolve qubit argument {e.ident!r}")
        try:
            v = eval_expr(e, {"Δt": self.cfg.dt, "N": float(self.cfg.n_bins)})
        except SdqError:
            raise SdqError(f"cannot resolve qubit argument {e}")
        if abs(v - round(v)) > 1e-9:
            raise SdqError(f"qubit argument {e} is not an integer")
        return int(round(v))


def expand(p: Program, cfg: DeviceConfig) -> list[XNode]:
    """Inline macros: switch times become concrete, expressions stay symbolic."""
    nodes = _Expander(p, cfg).expand()
    check_register_flow(nodes)
    return nodes


def count_cycles(nodes: list[XNode]) -> int:
    """Ring cycles in the expanded schedule (conditional blocks included)."""
    total = 0
    for nd in nodes:
        if isinstance(nd, XCond):
            total += count_cycles(list(nd.body))
        elif nd.opcode == "SCTR":
            total += 1
    return total


def check_register_flow(nodes: list[XNode]) -> None:
    """Every register must be written by MEAS before any read."""
    written: set[str] = set()

    def walk(ns):
        for nd in ns:
            if isinstance(nd, XCond):
                for r in expr_registers(nd.lhs) | expr_registers(nd.rhs):
                    if r not in written:
                        raise SdqError(
                            f"register {r!r} read before write", nd.line)
                walk(nd.body)
            elif nd.opcode in ("ROTX", "ROTY"):
                for r in expr_registers(nd.operand):
                    if r not in written:
                        raise SdqError(
                            f"register {r!r} read before write", nd.line)
            elif nd.opcode == "MEAS":
                written.add(nd.operand.ident)

    walk(nodes)


# ---------------------------------------------------------------------------
# switch-timing validation
# ---------------------------------------------------------------------------

def _collect_switch_events(nodes: list[XNode]):
    events = []

    def walk(ns):
        for nd in ns:
            if isinstance(nd, XCond):
                walk(nd.body)
            elif nd.opcode in ("OPEN", "CLOS"):
                events.append(nd)

    walk(nodes)
    return events


def validate_timing(nodes: list[XNode], cfg: DeviceConfig) -> list[str]:
    """Check the expanded switch schedule; returns violations (empty = ok).

    (a) OPEN/CLOS must alternate and pair up in time order;
    (b) each open window must cover exactly one photon time bin;
    (c) no two different photons may occupy the scattering unit at once
        (a round-trip window must not overlap another photon's extraction).
    """
    violations: list[str] = []
    # abutting windows are legal: a CLOS and an OPEN at the same instant
    # order as close-then-open
    events = sorted(_collect_switch_events(nodes),
                    key=lambda e: (e.time, 0 if e.opcode == "CLOS" else 1))
    state = "CLOSED"
    prev = None
    windows = []  # (open_t, close_t, bin, group)
    open_t = None
    open_nd = None
    for ev in events:
        if prev is not None and abs(ev.time - prev.time) < 1e-12 \
                and ev.opcode == prev.opcode:
            violations.append(
                f"duplicate {ev.opcode} at t={ev.time:g}: "
                "unbalanced switch events")
        if ev.opcode == "OPEN":
            if state == "OPEN":
                violations.append(
                    f"two OPEN with no CLOS between (t={ev.time:g}): "
                    "unbalanced switch events")
            state = "OPEN"
            open_t, open_nd = ev.time, ev
        else:
            if state == "CLOSED":
                violations.append(
                    f"CLOS without matching OPEN (t={ev.time:g}): "
                    "unbalanced switch events")
            else:
                windows.append((open_t, ev.time, open_nd.bin, open_nd.group))
            state = "CLOSED"
        prev = ev
    if state == "OPEN":
        violations.append("program ends with switches open")

    dt = cfg.dt
    for (o, c, b, g) in windows:
        lo = math.ceil((o - 1e-9) / dt)
        hi = math.floor((c + 1e-9) / dt)
        covered = max(0, hi - lo + 1)
        if covered != 1:
            violations.append(
                f"window [{o:g}, {c:g}] covers {covered} time-bin centers "
                "(expected exactly 1)")

    # photon-inside intervals: extraction close .. reinjection open
    period = cfg.ring_period
    by_group: dict[int, list] = {}
    loose = []
    for w in windows:
        if w[3] is None:
            loose.append(w)
        else:
            by_group.setdefault(w[3], []).append(w)
    intervals = []
    for g, ws in sorted(by_group.items()):
        ws.sort()
        if len(ws) != 2:
            violations.append(
                f"scatter group {g} has {len(ws)} switch windows "
                "(expected extraction + reinjection)")
            continue
        (o1, c1, b1, _), (o2, c2, b2, _) = ws
        if abs(o2 - o1 - period) > 1e-9:
            violations.append(
                f"reinjection window of bin {b1} starts {o2 - o1:g} after "
                f"extraction (expected ring period {period:g})")
        intervals.append((c1, o2, b1))
    loose.sort()
    used = [False] * len(loose)
    for i, (o1, c1, b1, _) in enumerate(loose):
        if used[i]:
            continue
        for j in range(i + 1, len(loose)):
            if used[j]:
                continue
            o2, c2, b2, _ = loose[j]
            bin1 = round(o1 / dt + 0.5)
            bin2 = round(o2 / dt + 0.5)
            if abs(o2 - o1 - period) < 1e-9:
                used[i] = used[j] = True
                intervals.append((c1, o2, bin1))
                break
    intervals.sort()
    for (s1, e1, b1), (s2, e2, b2) in zip(intervals, intervals[1:]):
        if s2 < e1 - 1e-12 and b1 != b2:
            violations.append(
                f"photon (bin {b2}) routed into the scattering unit while "
                f"photon (bin {b1}) is still inside "
                f"([{s1:g},{e1:g}] vs [{s2:g},{e2:g}])")
    return violations
