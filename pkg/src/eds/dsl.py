r"""The ``.eds`` model-file dialect: parser, model builder and printer.

Grammar (wedge is ``/\``, power is ``^``)::

    model   := "model" IDENT "{" item* "}"
    item    := "param" IDENT "in" "{" NUM ("," NUM)* "}" ";"
             | "vars" vardecl ("," vardecl)* ";"
             | "coframe" IDENT ("," IDENT)* ";"
             | "connection" IDENT ("," IDENT)* ";"
             | "d" IDENT "=" form ";"
    vardecl := IDENT (("!=" | ">") NUM)?
    form    := ("+"|"-")? term (("+"|"-") term)*
    term    := (scalar "*")? wedge | "0"
    wedge   := IDENT ("/\" IDENT)*
    scalar  := "+","-","*","/","^" INT expressions over NUM and declared
               non-basis IDENTs, with parentheses

Names must be declared before use; each coframe name takes exactly one
d-rule.  A variable with a d-rule is a declared function symbol; one without
is free.  Connection names take no d-rule (their differentials are opaque).
A bare ``0`` is the zero form of whatever degree the context requires; any
other wedge-free scalar term is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .forms import Basis, Form
from .models import FunctionSymbol, ModelError, StructureModel, covariant_name
from .ring import Ring, Scalar


class DslError(Exception):
    """Parse or build failure with a 1-based source location."""

    def __init__(self, kind: str, message: str, line: int, col: int):
        self.kind = kind
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"line {line} col {col}: {kind}: {message}")


# ---------------------------------------------------------------------------
# tokens

_PUNCT = ("!=", "/\\", "{", "}", "(", ")", ",", ";", "=", "+", "-", "*", "/", "^", ">")
_KEYWORDS = {"model", "param", "in", "vars", "coframe", "connection", "d"}


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, NUM, punctuation literal, EOF
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        two = text[i:i + 2]
        if two in ("!=", "/\\"):
            tokens.append(Token(two, two, start_line, start_col))
            i += 2
            col += 2
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("NUM", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if c in "{}(),;=+-*/^>":
            tokens.append(Token(c, c, start_line, start_col))
            i += 1
            col += 1
            continue
        raise DslError("lexical", f"unexpected character {c!r}", start_line, start_col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# syntax trees

@dataclass
class ModelFile:
    name: str
    params: list = field(default_factory=list)      # (name, tuple[Fraction, ...])
    vardecls: list = field(default_factory=list)    # (name, rel or None, Fraction or None)
    coframe: list = field(default_factory=list)
    connection: list = field(default_factory=list)
    drules: dict = field(default_factory=dict)      # name -> form AST


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.pos = 0
        self.declared: dict[str, str] = {}  # name -> "param" | "var" | "coframe" | "connection"

    def peek(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, what: str | None = None) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise DslError("syntax", f"expected {what or kind}, found {t.text or t.kind!r}",
                           t.line, t.col)
        return self.advance()

    def error_undeclared(self, tok: Token):
        raise DslError("undeclared-name", f"name {tok.text!r} is not declared", tok.line, tok.col)

    # -- toplevel ---------------------------------------------------------

    def parse_model(self) -> ModelFile:
        self.expect_keyword("model")
        name = self.expect("IDENT", "model name").text
        mf = ModelFile(name)
        self.expect("{")
        while self.peek().kind != "}":
            self.parse_item(mf)
        close = self.expect("}")
        for cf in mf.coframe:
            if cf not in mf.drules:
                raise DslError("syntax", f"coframe name {cf!r} has no d-rule",
                               close.line, close.col)
        self.expect("EOF", "end of input")
        return mf

    def expect_keyword(self, kw: str):
        t = self.peek()
        if t.kind != "IDENT" or t.text != kw:
            raise DslError("syntax", f"expected {kw!r}, found {t.text or t.kind!r}", t.line, t.col)
        return self.advance()

    def declare(self, tok: Token, role: str):
        if tok.text in _KEYWORDS:
            raise DslError("syntax", f"{tok.text!r} is reserved", tok.line, tok.col)
        if tok.text in self.declared:
            raise DslError("duplicate-rule", f"name {tok.text!r} already declared",
                           tok.line, tok.col)
        self.declared[tok.text] = role

    def parse_item(self, mf: ModelFile):
        t = self.peek()
        if t.kind != "IDENT":
            raise DslError("syntax", f"expected an item, found {t.text or t.kind!r}", t.line, t.col)
        if t.text == "param":
            self.advance()
            name = self.expect("IDENT", "parameter name")
            self.declare(name, "param")
            self.expect_keyword("in")
            self.expect("{")
            values = [self.parse_signed_number()]
            while self.peek().kind == ",":
                self.advance()
                values.append(self.parse_signed_number())
            self.expect("}")
            self.expect(";")
            mf.params.append((name.text, tuple(values)))
        elif t.text == "vars":
            self.advance()
            while True:
                name = self.expect("IDENT", "variable name")
                self.declare(name, "var")
                rel = None
                bound = None
                if self.peek().kind in ("!=", ">"):
                    rel = self.advance().kind
                    bound = self.parse_signed_number()
                mf.vardecls.append((name.text, rel, bound))
                if self.peek().kind != ",":
                    break
                self.advance()
            self.expect(";")
        elif t.text in ("coframe", "connection"):
            role = t.text
            self.advance()
            target = mf.coframe if role == "coframe" else mf.connection
            while True:
                name = self.expect("IDENT", f"{role} name")
                self.declare(name, role)
                target.append(name.text)
                if self.peek().kind != ",":
                    break
                self.advance()
            self.expect(";")
        elif t.text == "d":
            self.advance()
            name = self.expect("IDENT", "name after 'd'")
            role = self.declared.get(name.text)
            if role is None:
                self.error_undeclared(name)
            if role not in ("coframe", "var"):
                raise DslError("syntax", f"d-rule target {name.text!r} must be a coframe name or variable",
                               name.line, name.col)
            if name.text in mf.drules:
                raise DslError("duplicate-rule", f"duplicate d-rule for {name.text!r}",
                               name.line, name.col)
            self.expect("=")
            form = self.parse_form()
            self.expect(";")
            mf.drules[name.text] = form
        else:
            raise DslError("syntax", f"unknown item {t.text!r}", t.line, t.col)

    def parse_signed_number(self) -> Fraction:
        sign = 1
        if self.peek().kind == "-":
            self.advance()
            sign = -1
        t = self.expect("NUM", "a number")
        return Fraction(sign * int(t.text))

    # -- forms -------------------------------------------------------------

    def is_basis_name(self, text: str) -> bool:
        return self.declared.get(text) in ("coframe", "connection")

    def parse_form(self):
        terms = []
        sign = 1
        t = self.peek()
        if t.kind in ("+", "-"):
            self.advance()
            sign = -1 if t.kind == "-" else 1
        terms.append(self.parse_term(sign))
        while self.peek().kind in ("+", "-"):
            op = self.advance()
            terms.append(self.parse_term(-1 if op.kind == "-" else 1))
        return terms

    def parse_term(self, sign: int):
        t = self.peek()
        if t.kind == "IDENT" and self.is_basis_name(t.text):
            return (sign, None, self.parse_wedge(), (t.line, t.col))
        # additive scalar expressions must be parenthesized: bare "+"/"-"
        # separate form terms
        scalar = self.parse_scalar_term()
        if self.peek().kind == "*":
            self.advance()
            w = self.parse_wedge()
            return (sign, scalar, w, (t.line, t.col))
        return (sign, scalar, [], (t.line, t.col))

    def parse_wedge(self):
        names = []
        while True:
            t = self.expect("IDENT", "a 1-form name")
            if t.text not in self.declared:
                self.error_undeclared(t)
            if not self.is_basis_name(t.text):
                raise DslError("syntax", f"{t.text!r} is not a coframe or connection name",
                               t.line, t.col)
            names.append(t.text)
            if self.peek().kind != "/\\":
                break
            self.advance()
        return names

    # -- scalars (precedence: ^ > unary - > * / > + -) ----------------------

    def parse_scalar(self):
        node = self.parse_scalar_term()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            rhs = self.parse_scalar_term()
            node = (("add" if op == "+" else "sub"), node, rhs)
        return node

    def parse_scalar_term(self):
        node = self.parse_scalar_factor()
        while True:
            k = self.peek().kind
            if k == "*":
                # a '*' that introduces the wedge belongs to the caller
                nxt = self.toks[self.pos + 1]
                if nxt.kind == "IDENT" and self.is_basis_name(nxt.text):
                    return node
                self.advance()
                node = ("mul", node, self.parse_scalar_factor())
            elif k == "/":
                self.advance()
                node = ("div", node, self.parse_scalar_factor())
            else:
                return node

    def parse_scalar_factor(self):
        t = self.peek()
        if t.kind == "-":
            self.advance()
            return ("neg", self.parse_scalar_factor())
        return self.parse_scalar_power()

    def parse_scalar_power(self):
        base = self.parse_scalar_primary()
        if self.peek().kind == "^":
            self.advance()
            e = self.expect("NUM", "an integer exponent")
            return ("pow", base, int(e.text))
        return base

    def parse_scalar_primary(self):
        t = self.peek()
        if t.kind == "NUM":
            self.advance()
            return ("num", Fraction(int(t.text)))
        if t.kind == "(":
            self.advance()
            node = self.parse_scalar()
            self.expect(")")
            return node
        if t.kind == "IDENT":
            role = self.declared.get(t.text)
            if role is None:
                self.error_undeclared(t)
            if role in ("coframe", "connection"):
                raise DslError("syntax", f"1-form {t.text!r} used in scalar context",
                               t.line, t.col)
            self.advance()
            return ("var", t.text)
        raise DslError("syntax", f"expected a scalar, found {t.text or t.kind!r}", t.line, t.col)


def parse(text: str) -> ModelFile:
    """Parse model-file text; raises :class:`DslError` with line/col."""
    return _Parser(tokenize(text)).parse_model()


# ---------------------------------------------------------------------------
# building

def _scalar_from_ast(ast, ring: Ring) -> Scalar:
    kind = ast[0]
    if kind == "num":
        return ring.const(ast[1])
    if kind == "var":
        return ring.var(ast[1])
    if kind == "neg":
        return -_scalar_from_ast(ast[1], ring)
    if kind == "pow":
        return _scalar_from_ast(ast[1], ring) ** ast[2]
    a = _scalar_from_ast(ast[1], ring)
    b = _scalar_from_ast(ast[2], ring)
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        return a / b
    raise ValueError(f"bad scalar ast {kind!r}")


def _form_from_ast(terms, basis: Basis, ring: Ring, degree: int) -> Form:
    out = Form.zero(basis, ring, degree)
    for sign, scalar_ast, names, loc in terms:
        coeff = ring.one if scalar_ast is None else _scalar_from_ast(scalar_ast, ring)
        if sign < 0:
            coeff = -coeff
        if not names:
            if coeff.is_zero():
                continue
            raise DslError("syntax", "scalar term without wedge factors must be zero",
                           loc[0], loc[1])
        if len(names) != degree:
            raise DslError("syntax",
                           f"term has degree {len(names)}, expected {degree}", loc[0], loc[1])
        piece = Form(basis, ring, 0, {(): coeff})
        for n in names:
            piece = piece.wedge(Form.basis_oneform(basis, ring, n))
        out = out + piece
    return out


def build_model(mf: ModelFile, params: dict | None = None, chart: Optional[bool] = None) -> StructureModel:
    """Construct the structure model, binding every declared parameter.

    Parameters with a singleton value set bind automatically; the rest must
    be supplied through ``params`` with a value from the declared set.
    """
    params = dict(params or {})
    bound = {}
    for name, values in mf.params:
        if name in params:
            v = Fraction(params.pop(name))
            if v not in values:
                raise ModelError(f"parameter {name}={v} not in declared set {sorted(values)}")
            bound[name] = v
        elif len(values) == 1:
            bound[name] = values[0]
        else:
            raise ModelError(f"parameter {name!r} requires a binding from {sorted(values)}")
    if params:
        raise ModelError(f"unknown parameters supplied: {sorted(params)}")

    var_names = [n for n, _, _ in mf.vardecls]
    free_vars = [n for n in var_names if n not in mf.drules]
    basis = Basis(mf.coframe, mf.connection, ["d" + c for c in mf.connection])
    all_vars = list(var_names)
    for f in free_vars:
        all_vars.extend(covariant_name(f, b) for b in basis.oneforms)
    ring = Ring(all_vars, bound)

    drules = {}
    functions = {}
    for cf in mf.coframe:
        drules[cf] = _form_from_ast(mf.drules[cf], basis, ring, 2)
    for n in var_names:
        if n in mf.drules:
            functions[n] = FunctionSymbol(n, _form_from_ast(mf.drules[n], basis, ring, 1))
        else:
            functions[n] = FunctionSymbol(n, None)

    constraints = []
    for n, rel, bound_num in mf.vardecls:
        if rel is None:
            continue
        expr = ring.var(n) - ring.const(bound_num)
        constraints.append((expr, "!=0" if rel == "!=" else ">0"))

    if chart is None:
        chart = bool(mf.coframe) and all(drules[cf].is_zero() for cf in mf.coframe)
    return StructureModel(mf.name, ring, basis, drules, functions, constraints, chart=chart)


def parse_model(text: str, params: dict | None = None) -> StructureModel:
    return build_model(parse(text), params)


def parse_form_text(text: str, model: StructureModel, degree: int | None = None) -> Form:
    """Parse a standalone form expression over an existing model's names."""
    toks = tokenize(text)
    p = _Parser(toks)
    for v in model.ring.variables:
        p.declared[v] = "var"
    for par in model.ring.parameters:
        p.declared[par] = "param"
    for n in model.basis.coframe:
        p.declared[n] = "coframe"
    for n in model.basis.connection:
        p.declared[n] = "connection"
    ast = p.parse_form()
    p.expect("EOF", "end of expression")
    if degree is None:
        degree = 0
        for _, _, names, _ in ast:
            degree = max(degree, len(names))
    return _form_from_ast(ast, model.basis, model.ring, degree)


def parse_scalar_text(text: str, ring: Ring) -> Scalar:
    toks = tokenize(text)
    p = _Parser(toks)
    for v in ring.variables:
        p.declared[v] = "var"
    for par in ring.parameters:
        p.declared[par] = "param"
    ast = p.parse_scalar()
    p.expect("EOF", "end of expression")
    return _scalar_from_ast(ast, ring)


# ---------------------------------------------------------------------------
# printing

def _constraint_decl(model: StructureModel):
    """Recover per-variable domain relations from the constraint list."""
    decls = {}
    for expr, rel in model.constraints:
        # expr must be var - bound with integer bound
        if len(expr.den) != 1 or expr.den.get(()) != 1:
            raise ModelError(f"constraint {expr.text()} {rel} is not printable")
        var_id = None
        bound = Fraction(0)
        for mono, c in expr.num.items():
            if mono == ():
                bound = -c
            elif len(mono) == 1 and mono[0][1] == 1 and c == 1:
                var_id = mono[0][0]
            else:
                raise ModelError(f"constraint {expr.text()} {rel} is not printable")
        if var_id is None:
            raise ModelError(f"constraint {expr.text()} {rel} is not printable")
        decls[model.ring.variables[var_id]] = ("!=" if rel == "!=0" else ">", bound)
    return decls


def print_model(model: StructureModel) -> str:
    """Canonical model-file text; ``parse`` + ``build_model`` round-trips it."""
    lines = [f"model {model.name} {{"]
    for name, value in model.ring.parameters.items():
        lines.append(f"  param {name} in {{{value}}};")
    declared_vars = [n for n in model.functions]
    if declared_vars:
        decls = _constraint_decl(model)
        rendered = []
        for n in declared_vars:
            if n in decls:
                rel, bound = decls[n]
                rendered.append(f"{n} {rel} {bound}")
            else:
                rendered.append(n)
        lines.append(f"  vars {', '.join(rendered)};")
    lines.append(f"  coframe {', '.join(model.basis.coframe)};")
    if model.basis.connection:
        lines.append(f"  connection {', '.join(model.basis.connection)};")

    def form_text(f: Form) -> str:
        if f.is_zero():
            return "0"
        pieces = []
        for mi in sorted(f.terms):
            wedge = "/\\".join(model.basis.oneforms[i] for i in mi)
            pieces.append(f"({f.terms[mi].text()})*{wedge}")
        return " + ".join(pieces)

    for cf in model.basis.coframe:
        lines.append(f"  d {cf} = {form_text(model.drules[cf])};")
    for n, sym in model.functions.items():
        if not sym.free:
            lines.append(f"  d {n} = {form_text(sym.differential)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
