"""Line-oriented model-file format: parser, evaluator, canonical printing.

Forms are sums of terms ``coeff * e_i^e_j`` with Gaussian-rational
polynomial coefficients over declared parameters; ``i`` is the imaginary
unit, ``pi`` is reserved and never numeric, ``^`` is the wedge (and integer
power on scalars).  Every error carries a source location.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .cartan import Connection, EqForm, TorusAction
from .forms import Form, exp_two_form, wedge
from .gcmaps import GCMap, complex_structure, symplectic_map
from .models import Model
from .scalars import ONE, Q, Scalar

Value = Union[Scalar, Form, EqForm]

EQFORM_TRUNC = 12


class ParseError(Exception):
    """Lexical, syntactic or undeclared-symbol failure with a location."""

    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__("line %d, col %d: %s" % (line, col, message))
        self.line = line
        self.col = col
        self.reason = message


class ModelFileError(Exception):
    """Validation failure while assembling the parsed objects."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, NAME, OP
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|([-+*/^(),=]))")


def tokenize(text: str, line: int) -> List[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ParseError("unexpected character %r" % rest[0], line, pos + 1)
        num, name, op = m.groups()
        col = m.start(1 if num else 2 if name else 3) + 1
        if num:
            out.append(Token("NUM", num, line, col))
        elif name:
            out.append(Token("NAME", name, line, col))
        else:
            out.append(Token("OP", op, line, col))
        pos = m.end()
    return out


# -- expression AST ----------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    kind: str  # num, name, call, unary, binary
    token: Token
    value: str = ""
    children: tuple = ()


class ExprParser:
    def __init__(self, tokens: List[Token], line: int):
        self.tokens = tokens
        self.pos = 0
        self.line = line

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression", self.line, 999)
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> Token:
        tok = self.next()
        if tok.kind != "OP" or tok.text != op:
            raise ParseError("expected %r, found %r" % (op, tok.text), tok.line, tok.col)
        return tok

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError("trailing input %r" % tok.text, tok.line, tok.col)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            tok = self.peek()
            if tok and tok.kind == "OP" and tok.text in "+-":
                self.next()
                rhs = self.term()
                node = Node("binary", tok, tok.text, (node, rhs))
            else:
                return node

    def term(self) -> Node:
        node = self.unary()
        while True:
            tok = self.peek()
            if tok and tok.kind == "OP" and tok.text in "*/":
                self.next()
                rhs = self.unary()
                node = Node("binary", tok, tok.text, (node, rhs))
            else:
                return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok and tok.kind == "OP" and tok.text in "+-":
            self.next()
            return Node("unary", tok, tok.text, (self.unary(),))
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        while True:
            tok = self.peek()
            if tok and tok.kind == "OP" and tok.text == "^":
                self.next()
                neg = self.peek()
                if neg and neg.kind == "OP" and neg.text == "-":
                    self.next()
                    base = self.atom()
                    rhs = Node("unary", neg, "-", (base,))
                else:
                    rhs = self.atom()
                node = Node("binary", tok, "^", (node, rhs))
            else:
                return node

    def atom(self) -> Node:
        tok = self.next()
        if tok.kind == "NUM":
            return Node("num", tok, tok.text)
        if tok.kind == "NAME":
            nxt = self.peek()
            if nxt and nxt.kind == "OP" and nxt.text == "(":
                self.next()
                args = []
                if not (self.peek() and self.peek().kind == "OP" and self.peek().text == ")"):
                    args.append(self.expr())
                    while self.peek() and self.peek().kind == "OP" and self.peek().text == ",":
                        self.next()
                        args.append(self.expr())
                self.expect_op(")")
                return Node("call", tok, tok.text, tuple(args))
            return Node("name", tok, tok.text)
        if tok.kind == "OP" and tok.text == "(":
            node = self.expr()
            self.expect_op(")")
            return Node("paren", tok, "", (node,))
        raise ParseError("unexpected token %r" % tok.text, tok.line, tok.col)


_XVAR_RE = re.compile(r"^x(\d+)$")


class Evaluator:
    """Evaluate expression trees to Scalar, Form or EqForm values."""

    def __init__(
        self,
        n_generators: int,
        generator_names: Sequence[str],
        params: Sequence[str],
        values: Dict[str, Value],
        k_context: Optional[int] = None,
    ):
        self.n = n_generators
        self.gen_index = {nm: i + 1 for i, nm in enumerate(generator_names)}
        self.params = set(params)
        self.values = values
        self.k_context = k_context

    def eval(self, node: Node) -> Value:
        method = getattr(self, "_eval_" + node.kind)
        return method(node)

    def _eval_num(self, node: Node) -> Value:
        return Scalar.rational(int(node.value))

    def _eval_paren(self, node: Node) -> Value:
        return self.eval(node.children[0])

    def _eval_name(self, node: Node) -> Value:
        name = node.value
        if name == "i":
            return Scalar.imaginary(1)
        if name == "pi":
            return Scalar.pi()
        if name in self.gen_index:
            return Form.generator(self.n, self.gen_index[name])
        if name in self.params:
            return Scalar.parameter(name)
        if name in self.values:
            return self.values[name]
        m = _XVAR_RE.match(name)
        if m and self.k_context:
            j = int(m.group(1))
            if not 1 <= j <= self.k_context:
                raise ParseError(
                    "polynomial variable %s exceeds the torus rank %d"
                    % (name, self.k_context),
                    node.token.line, node.token.col,
                )
            expo = tuple(1 if idx == j - 1 else 0 for idx in range(self.k_context))
            return EqForm(
                self.k_context, self.n, EQFORM_TRUNC, {expo: Form.unit(self.n)}
            )
        raise ParseError("undeclared symbol %r" % name, node.token.line, node.token.col)

    def _eval_unary(self, node: Node) -> Value:
        val = self.eval(node.children[0])
        if node.value == "-":
            return -val
        return val

    def _eval_call(self, node: Node) -> Value:
        name = node.value
        args = [self.eval(c) for c in node.children]
        tok = node.token
        if name == "exp":
            if len(args) != 1 or not isinstance(args[0], Form):
                raise ParseError(
                    "exp takes one 2-form argument", tok.line, tok.col
                )
            try:
                return exp_two_form(args[0])
            except ValueError as e:
                raise ParseError(str(e), tok.line, tok.col)
        if name == "conj":
            if len(args) != 1 or isinstance(args[0], EqForm):
                raise ParseError(
                    "conj takes one scalar or form argument", tok.line, tok.col
                )
            return args[0].conjugate()
        raise ParseError("unknown function %r" % name, tok.line, tok.col)

    def _eval_binary(self, node: Node) -> Value:
        op = node.value
        tok = node.token
        left = self.eval(node.children[0])
        if op == "^":
            literal = _int_literal(node.children[1])
            if literal is not None:
                try:
                    return self._power(left, literal)
                except (ValueError, ZeroDivisionError) as e:
                    raise ParseError(str(e), tok.line, tok.col)
        right = self.eval(node.children[1])
        try:
            if op == "+":
                return self._add(left, right)
            if op == "-":
                return self._add(left, -right)
            if op in ("*", "^"):
                return self._mul(left, right)
            if op == "/":
                return self._div(left, right)
        except (ValueError, ZeroDivisionError) as e:
            raise ParseError(str(e), tok.line, tok.col)
        raise ParseError("unknown operator %r" % op, tok.line, tok.col)

    def _promote_pair(self, a: Value, b: Value):
        order = {Scalar: 0, Form: 1, EqForm: 2}
        ka, kb = order[type(a)], order[type(b)]
        while ka < kb:
            a = self._promote(a)
            ka += 1
        while kb < ka:
            b = self._promote(b)
            kb += 1
        return a, b

    def _promote(self, v: Value) -> Value:
        if isinstance(v, Scalar):
            return Form.unit(self.n, v)
        if isinstance(v, Form):
            if not self.k_context:
                raise ValueError("polynomial variables are not allowed here")
            return EqForm.of_form(v, self.k_context, EQFORM_TRUNC)
        raise ValueError("cannot promote further")

    def _add(self, a: Value, b: Value) -> Value:
        a, b = self._promote_pair(a, b)
        return a + b

    def _mul(self, a: Value, b: Value) -> Value:
        if isinstance(a, Scalar) and isinstance(b, Scalar):
            return a * b
        if isinstance(a, Scalar):
            return b.scale(a)
        if isinstance(b, Scalar):
            return a.scale(b)
        a, b = self._promote_pair(a, b)
        if isinstance(a, Form):
            return wedge(a, b)
        from .cartan import wedge_eq

        return wedge_eq(a, b)

    def _div(self, a: Value, b: Value) -> Value:
        if not isinstance(b, Scalar):
            raise ValueError("division by a non-scalar")
        if isinstance(a, Scalar):
            return a / b
        inv = ONE / b
        return a.scale(inv)

    def _power(self, base: Value, exponent: int) -> Value:
        """Integer-literal exponents: numeric power on scalars, iterated
        wedge on forms (so e.g. x1^2 round-trips)."""
        if isinstance(base, Scalar):
            if exponent >= 0:
                return base ** exponent
            return ONE / (base ** (-exponent))
        if exponent < 0:
            raise ValueError("negative power of a form")
        out: Value = Scalar.rational(1)
        for _ in range(exponent):
            out = self._mul(out, base)
        return out


def _int_literal(node: Node) -> Optional[int]:
    if node.kind == "num":
        return int(node.value)
    if node.kind == "unary":
        inner = _int_literal(node.children[0])
        if inner is None:
            return None
        return -inner if node.value == "-" else inner
    if node.kind == "paren":
        return _int_literal(node.children[0])
    return None


# -- file structure -----------------------------------------------------------------


@dataclass(frozen=True)
class DHSpec:
    name: str
    base: Form
    twist: Form
    param: str
    n: int
    k: int
    orientation: int = 1
    constant_type: Optional[int] = None
    line: int = 0


@dataclass
class ModelFile:
    name: str
    model: Model
    params: Tuple[str, ...]
    values: Dict[str, Value]
    structures: Dict[str, GCMap]
    actions: Dict[str, TorusAction]
    connections: Dict[str, Connection]
    dh_specs: Dict[str, DHSpec]
    samples: Dict[str, List[Fraction]]


@dataclass
class _RawAction:
    name: str
    line: int
    xi: Dict[int, List[Fraction]] = field(default_factory=dict)
    mu: Dict[int, Node] = field(default_factory=dict)
    alpha: Dict[int, Node] = field(default_factory=dict)
    mu_lines: Dict[int, int] = field(default_factory=dict)


def _logical_lines(text: str):
    for idx, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if line.strip():
            yield idx, line


def parse_model(text: str) -> ModelFile:
    """Parse and validate a model file; raises ParseError / ModelFileError."""
    lines = list(_logical_lines(text))
    pos = 0
    name = None
    gen_names: List[str] = []
    params: List[str] = []
    d_exprs: Dict[int, Tuple[Node, int]] = {}
    h_expr: Optional[Tuple[Node, int]] = None
    vol_expr: Optional[Tuple[Node, int]] = None
    orientation = 1
    lets: List[Tuple[str, Node, Optional[str], int]] = []  # name, ast, action ctx, line
    structures_raw: List[tuple] = []
    actions_raw: Dict[str, _RawAction] = {}
    connections_raw: List[tuple] = []
    dh_raw: List[tuple] = []
    samples: Dict[str, List[Fraction]] = {}

    def fail(msg: str, line: int, col: int = 1):
        raise ParseError(msg, line, col)

    while pos < len(lines):
        lineno, line = lines[pos]
        pos += 1
        toks = tokenize(line, lineno)
        head = toks[0]
        if head.kind != "NAME":
            fail("statement must start with a keyword", lineno, head.col)
        key = head.text

        if key == "model":
            if len(toks) != 2 or toks[1].kind != "NAME":
                fail("usage: model <name>", lineno)
            name = toks[1].text
        elif key == "generators":
            for t in toks[1:]:
                if t.kind != "NAME":
                    fail("generator names must be identifiers", lineno, t.col)
                if t.text in gen_names:
                    fail("repeated generator %r" % t.text, lineno, t.col)
                gen_names.append(t.text)
        elif key == "params":
            for t in toks[1:]:
                if t.kind != "NAME":
                    fail("parameter names must be identifiers", lineno, t.col)
                if t.text in ("i", "pi") or t.text in gen_names:
                    fail("reserved or conflicting parameter %r" % t.text, lineno, t.col)
                params.append(t.text)
        elif key == "d":
            if len(toks) < 4 or toks[1].kind != "NAME" or toks[2].text != "=":
                fail("usage: d <generator> = <form>", lineno)
            gname = toks[1].text
            if gname not in gen_names:
                fail("undeclared generator %r" % gname, lineno, toks[1].col)
            ast = ExprParser(toks[3:], lineno).parse()
            d_exprs[gen_names.index(gname) + 1] = (ast, lineno)
        elif key == "H":
            if len(toks) < 3 or toks[1].text != "=":
                fail("usage: H = <form>", lineno)
            h_expr = (ExprParser(toks[2:], lineno).parse(), lineno)
        elif key == "volume":
            if len(toks) < 3 or toks[1].text != "=":
                fail("usage: volume = <scalar>", lineno)
            vol_expr = (ExprParser(toks[2:], lineno).parse(), lineno)
        elif key == "orientation":
            if len(toks) < 3 or toks[1].text != "=":
                fail("usage: orientation = +1 | -1", lineno)
            val = "".join(t.text for t in toks[2:])
            if val not in ("+1", "-1", "1"):
                fail("orientation must be +1 or -1", lineno, toks[2].col)
            orientation = -1 if val == "-1" else 1
        elif key == "let":
            if len(toks) < 4 or toks[1].kind != "NAME" or toks[2].text != "=":
                fail("usage: let <name> = <expr>", lineno)
            lets.append((toks[1].text, ExprParser(toks[3:], lineno).parse(), None, lineno))
        elif key == "eqform":
            # eqform NAME for ACTION = EXPR
            if (
                len(toks) < 6
                or toks[1].kind != "NAME"
                or toks[2].text != "for"
                or toks[3].kind != "NAME"
                or toks[4].text != "="
            ):
                fail("usage: eqform <name> for <action> = <expr>", lineno)
            lets.append(
                (toks[1].text, ExprParser(toks[5:], lineno).parse(), toks[3].text, lineno)
            )
        elif key == "structure":
            if len(toks) >= 3 and toks[2].kind == "NAME" and toks[2].text == "matrix":
                rows: List[List[Fraction]] = []
                while pos < len(lines):
                    l2, body = lines[pos]
                    pos += 1
                    if body.strip() == "end":
                        break
                    rows.append(_rational_row(body, l2))
                else:
                    fail("matrix block missing 'end'", lineno)
                structures_raw.append(("matrix", toks[1].text, rows, lineno))
            elif len(toks) >= 4 and toks[2].text == "symplectic":
                ast = ExprParser(toks[3:], lineno).parse()
                structures_raw.append(("symplectic", toks[1].text, ast, lineno))
            elif len(toks) == 3 and toks[2].text == "complex":
                if len(gen_names) % 2:
                    fail("complex structure needs an even generator count", lineno)
                structures_raw.append(("complex", toks[1].text, None, lineno))
            else:
                fail(
                    "usage: structure <name> symplectic <2-form> | "
                    "structure <name> complex | structure <name> matrix ... end",
                    lineno,
                )
        elif key == "action":
            if len(toks) != 2 or toks[1].kind != "NAME":
                fail("usage: action <name>", lineno)
            raw = _RawAction(name=toks[1].text, line=lineno)
            while pos < len(lines):
                l2, body = lines[pos]
                pos += 1
                if body.strip() == "end":
                    break
                btoks = tokenize(body, l2)
                if len(btoks) < 3 or btoks[0].kind != "NAME":
                    fail("expected xi/mu/alpha assignment or 'end'", l2)
                what = btoks[0].text
                if what == "xi":
                    if btoks[1].kind != "NUM" or btoks[2].text != "=":
                        fail("usage: xi <j> = <rationals>", l2)
                    j = int(btoks[1].text)
                    raw.xi[j] = _rational_row(
                        body.split("=", 1)[1], l2
                    )
                elif what in ("mu", "alpha"):
                    if btoks[1].kind != "NUM" or btoks[2].text != "=":
                        fail("usage: %s <j> = <form>" % what, l2)
                    j = int(btoks[1].text)
                    ast = ExprParser(btoks[3:], l2).parse()
                    if what == "mu":
                        raw.mu[j] = ast
                        raw.mu_lines[j] = l2
                    else:
                        raw.alpha[j] = ast
                else:
                    fail("unknown action field %r" % what, l2, btoks[0].col)
            else:
                fail("action block missing 'end'", lineno)
            if raw.name in actions_raw:
                fail("repeated action %r" % raw.name, lineno)
            actions_raw[raw.name] = raw
        elif key == "connection":
            if (
                len(toks) != 4
                or toks[1].kind != "NAME"
                or toks[2].text != "for"
                or toks[3].kind != "NAME"
            ):
                fail("usage: connection <name> for <action>", lineno)
            thetas: Dict[int, Node] = {}
            while pos < len(lines):
                l2, body = lines[pos]
                pos += 1
                if body.strip() == "end":
                    break
                btoks = tokenize(body, l2)
                if (
                    len(btoks) < 4
                    or btoks[0].text != "theta"
                    or btoks[1].kind != "NUM"
                    or btoks[2].text != "="
                ):
                    fail("usage: theta <j> = <1-form>", l2)
                thetas[int(btoks[1].text)] = ExprParser(btoks[3:], l2).parse()
            else:
                fail("connection block missing 'end'", lineno)
            connections_raw.append((toks[1].text, toks[3].text, thetas, lineno))
        elif key == "dh":
            if len(toks) != 2 or toks[1].kind != "NAME":
                fail("usage: dh <name>", lineno)
            fields: Dict[str, Tuple[Node, int]] = {}
            while pos < len(lines):
                l2, body = lines[pos]
                pos += 1
                if body.strip() == "end":
                    break
                btoks = tokenize(body, l2)
                if len(btoks) < 3 or btoks[0].kind != "NAME" or btoks[1].text != "=":
                    fail("usage: <field> = <value>", l2)
                fields[btoks[0].text] = (ExprParser(btoks[2:], l2).parse(), l2)
            else:
                fail("dh block missing 'end'", lineno)
            dh_raw.append((toks[1].text, fields, lineno))
        elif key == "samples":
            if len(toks) < 4 or toks[1].kind != "NAME" or toks[2].text != "=":
                fail("usage: samples <param> = <rationals>", lineno)
            samples[toks[1].text] = _rational_list(toks[3:], lineno)
        else:
            fail("unknown statement %r" % key, lineno, head.col)

    if name is None:
        raise ParseError("missing 'model <name>' header", 1)

    n = len(gen_names)
    values: Dict[str, Value] = {}

    def evaluator(k_context: Optional[int] = None) -> Evaluator:
        return Evaluator(n, gen_names, params, values, k_context)

    def eval_form(ast: Node, line: int, what: str) -> Form:
        val = evaluator().eval(ast)
        if isinstance(val, Scalar):
            val = Form.unit(n, val)
        if not isinstance(val, Form):
            raise ParseError("%s must be a form" % what, line)
        return val

    # let/eqform definitions in order, so later lines may use earlier names
    for let_name, ast, action_ctx, line in lets:
        if let_name in values or let_name in gen_names or let_name in params:
            raise ParseError("name %r already in use" % let_name, line)
        if action_ctx is None:
            values[let_name] = evaluator().eval(ast)
        else:
            if action_ctx not in actions_raw:
                raise ParseError("undeclared action %r" % action_ctx, line)
            k = len(actions_raw[action_ctx].xi)
            val = evaluator(k_context=k).eval(ast)
            if isinstance(val, Scalar):
                val = Form.unit(n, val)
            if isinstance(val, Form):
                val = EqForm.of_form(val, k, EQFORM_TRUNC)
            values[let_name] = val

    try:
        d_table = [Form.zero(n)] * n
        for gi, (ast, line) in d_exprs.items():
            d_table[gi - 1] = eval_form(ast, line, "generator differential")
        h_form = eval_form(h_expr[0], h_expr[1], "twisting form") if h_expr else None
        volume = ONE
        if vol_expr is not None:
            v = evaluator().eval(vol_expr[0])
            if not isinstance(v, Scalar):
                raise ParseError("volume must be a scalar", vol_expr[1])
            volume = v
        model = Model(n, d_table, h_form, volume, orientation, gen_names)
    except ValueError as e:
        raise ModelFileError(str(e))

    structures: Dict[str, GCMap] = {}
    for kind, sname, payload, line in structures_raw:
        try:
            if kind == "matrix":
                rows = [[Q(x) for x in row] for row in payload]
                structures[sname] = GCMap(n, rows)
            elif kind == "symplectic":
                omega = eval_form(payload, line, "symplectic form")
                structures[sname] = symplectic_map(omega)
            else:
                structures[sname] = complex_structure(n // 2)
        except ValueError as e:
            raise ModelFileError(str(e), line)

    actions: Dict[str, TorusAction] = {}
    for raw in actions_raw.values():
        k = len(raw.xi)
        if sorted(raw.xi) != list(range(1, k + 1)):
            raise ModelFileError(
                "action %r must define xi 1..k contiguously" % raw.name, raw.line
            )
        xi = []
        for j in range(1, k + 1):
            row = raw.xi[j]
            if len(row) != n:
                raise ModelFileError(
                    "xi %d needs %d coordinates" % (j, n), raw.line
                )
            xi.append([Scalar.rational(x) for x in row])
        mu = alpha = None
        if raw.mu or raw.alpha:
            mu = [
                eval_form(raw.mu[j], raw.line, "mu") if j in raw.mu else Form.zero(n)
                for j in range(1, k + 1)
            ]
            alpha = [
                eval_form(raw.alpha[j], raw.line, "alpha")
                if j in raw.alpha
                else Form.zero(n)
                for j in range(1, k + 1)
            ]
        try:
            actions[raw.name] = TorusAction(model, xi, mu, alpha)
        except ValueError as e:
            raise ModelFileError(str(e), raw.line)

    connections: Dict[str, Connection] = {}
    for cname, aname, thetas, line in connections_raw:
        if aname not in actions:
            raise ModelFileError("undeclared action %r" % aname, line)
        act = actions[aname]
        if sorted(thetas) != list(range(1, act.k + 1)):
            raise ModelFileError("connection must define theta 1..k", line)
        forms = [eval_form(thetas[j], line, "theta") for j in range(1, act.k + 1)]
        try:
            connections[cname] = Connection(act, forms)
        except ValueError as e:
            raise ModelFileError(str(e), line)

    dh_specs: Dict[str, DHSpec] = {}
    for dname, fields, line in dh_raw:
        def take(key: str, required: bool = True):
            if key not in fields:
                if required:
                    raise ModelFileError("dh block %r misses %r" % (dname, key), line)
                return None
            return fields[key]

        base_ast = take("base")
        twist_ast = take("twist")
        param_ast = take("param")
        n_ast = take("n")
        k_ast = take("k")
        base = eval_form(base_ast[0], base_ast[1], "base")
        twist = eval_form(twist_ast[0], twist_ast[1], "twist")
        if param_ast[0].kind != "name":
            raise ModelFileError("dh param must be a parameter name", param_ast[1])
        param = param_ast[0].value
        if param not in params:
            raise ModelFileError("undeclared parameter %r" % param, param_ast[1])
        nval = _int_literal(n_ast[0])
        kval = _int_literal(k_ast[0])
        if nval is None or kval is None:
            raise ModelFileError("dh n and k must be integer literals", line)
        orient = 1
        o_ast = take("orientation", required=False)
        if o_ast is not None:
            oval = _int_literal(o_ast[0])
            if oval not in (1, -1):
                raise ModelFileError("dh orientation must be +1 or -1", o_ast[1])
            orient = oval
        ctype = None
        t_ast = take("type", required=False)
        if t_ast is not None:
            ctype = _int_literal(t_ast[0])
            if ctype is None or ctype < 0:
                raise ModelFileError("dh type must be a nonnegative integer", t_ast[1])
        dh_specs[dname] = DHSpec(
            name=dname, base=base, twist=twist, param=param,
            n=nval, k=kval, orientation=orient, constant_type=ctype, line=line,
        )

    for pname in samples:
        if pname not in params:
            raise ModelFileError("samples for undeclared parameter %r" % pname)

    return ModelFile(
        name=name,
        model=model,
        params=tuple(params),
        values=values,
        structures=structures,
        actions=actions,
        connections=connections,
        dh_specs=dh_specs,
        samples=samples,
    )


def _rational_row(text: str, line: int) -> List[Fraction]:
    toks = tokenize(text, line)
    return _rational_list(toks, line)


def _rational_list(toks: List[Token], line: int) -> List[Fraction]:
    out: List[Fraction] = []
    pos = 0
    while pos < len(toks):
        tok = toks[pos]
        if tok.kind == "OP" and tok.text == ",":
            pos += 1
            continue
        sign = 1
        if tok.kind == "OP" and tok.text in "+-":
            sign = -1 if tok.text == "-" else 1
            pos += 1
            if pos >= len(toks):
                raise ParseError("dangling sign", line, tok.col)
            tok = toks[pos]
        if tok.kind != "NUM":
            raise ParseError("expected a rational number", line, tok.col)
        num = int(tok.text)
        pos += 1
        den = 1
        if pos < len(toks) and toks[pos].kind == "OP" and toks[pos].text == "/":
            pos += 1
            if pos >= len(toks) or toks[pos].kind != "NUM":
                raise ParseError("expected a denominator", line, toks[pos - 1].col)
            den = int(toks[pos].text)
            pos += 1
        out.append(Fraction(sign * num, den))
    return out


def parse_form_text(text: str, model: Model, params: Sequence[str] = ()) -> Form:
    """Parse a standalone form expression against a model's frame."""
    toks = tokenize(text, 1)
    ast = ExprParser(toks, 1).parse()
    val = Evaluator(model.n, model.names, params, {}).eval(ast)
    if isinstance(val, Scalar):
        val = Form.unit(model.n, val)
    if not isinstance(val, Form):
        raise ParseError("expected a form", 1)
    return val


def parse_scalar_text(text: str, params: Sequence[str] = ()) -> Scalar:
    """Parse a standalone scalar expression (round-trips the printer)."""
    toks = tokenize(text, 1)
    ast = ExprParser(toks, 1).parse()
    val = Evaluator(0, [], params, {}).eval(ast)
    if isinstance(val, Form):
        if set(val.terms) <= {0}:
            return val.terms.get(0, Scalar())
        raise ParseError("expected a scalar", 1)
    if not isinstance(val, Scalar):
        raise ParseError("expected a scalar", 1)
    return val
