"""Recursive-descent parser for the expression text grammar.

Grammar (whitespace-insensitive):

    expr    :=  term (('+' | '-') term)*
    term    :=  unary (('*' | '/') unary)*
    unary   :=  '-' unary | power
    power   :=  atom ('^' exponent)?          # right-associative
    exponent:=  integer | '-' integer | '(' exponent ')'
    atom    :=  integer | identifier | call | '(' expr ')'
    call    :=  ('sin' | 'cos' | 'exp' | 'log') '(' expr ')'

Identifiers are ``[a-zA-Z][a-zA-Z0-9]*``.  A jet variable is written as a
field name followed by ``_`` and a string of independent-variable names,
one per derivative (``x1_tt`` is the second t-derivative of field x1).
Which identifiers denote independent variables, fields or parameters is
supplied by a :class:`VarContext`.
"""

from __future__ import annotations

import re

from . import expr as ex


class ParseError(ex.ExprError):
    def __init__(self, message, position, text):
        self.position = position
        line = text.count("\n", 0, position) + 1
        col = position - (text.rfind("\n", 0, position) + 1) + 1
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.column = col


class VarContext:
    """Symbol table mapping identifiers to atom kinds."""

    def __init__(self, indep=(), fields=(), params=()):
        self.indep = tuple(indep)
        self.fields = tuple(fields)
        self.params = tuple(params)
        names = list(self.indep) + list(self.fields) + list(self.params)
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise ValueError(f"names must be unique within a model: {sorted(dupes)}")
        clash = set(names) & set(ex.FUNCTIONS)
        if clash:
            raise ValueError(f"names shadow elementary functions: {sorted(clash)}")

    def lookup(self, name):
        if name in self.indep:
            return ex.IndepVar(name)
        if name in self.fields:
            return ex.JetVar(name)
        if name in self.params:
            return ex.Param(name)
        return None

    def split_jet_suffix(self, suffix):
        """Split a derivative suffix into independent-variable names by
        greedy longest match; returns None when it does not decompose."""
        ordered = sorted(self.indep, key=len, reverse=True)
        counts = {}
        i = 0
        while i < len(suffix):
            for name in ordered:
                if suffix.startswith(name, i):
                    counts[name] = counts.get(name, 0) + 1
                    i += len(name)
                    break
            else:
                return None
        return counts


_TOKEN = re.compile(
    r"\s*(?:(?P<num>[0-9]+)|(?P<ident>[a-zA-Z][a-zA-Z0-9]*(?:_[a-zA-Z0-9]+)?)"
    r"|(?P<op>[-+*/^()]))"
)


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == m.start():
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            where = len(text) - len(stripped)
            raise ParseError(f"unexpected character {text[where]!r}", where, text)
        if m.lastgroup is None:
            break
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, context):
        self.text = text
        self.context = context
        self.tokens = tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.peek()
        if kind != "op" or val != value:
            raise ParseError(f"expected {value!r}", pos, self.text)
        return self.advance()

    def fail(self, message):
        _, _, pos = self.peek()
        raise ParseError(message, pos, self.text)

    # grammar rules ------------------------------------------------------
    def expr(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                rhs = self.term()
                node = node + rhs if val == "+" else node - rhs
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                rhs = self.unary()
                node = node * rhs if val == "*" else node / rhs
            else:
                return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return -self.unary()
        if kind == "op" and val == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            return base ** self.exponent()
        return base

    def exponent(self):
        kind, val, pos = self.peek()
        if kind == "op" and val == "(":
            self.advance()
            inner = self.exponent()
            self.expect(")")
            return inner
        if kind == "op" and val == "-":
            self.advance()
            return -self.exponent()
        if kind == "num":
            self.advance()
            return int(val)
        raise ParseError("exponent must be an integer", pos, self.text)

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.advance()
            return ex.rational(int(val))
        if kind == "op" and val == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "ident":
            self.advance()
            if val in ex.FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ex.Fun(val, arg)
            return self.identifier(val, pos)
        raise ParseError("expected a value", pos, self.text)

    def identifier(self, name, pos):
        if "_" in name:
            head, suffix = name.split("_", 1)
            if head not in self.context.fields:
                raise ParseError(f"unknown field {head!r} in jet symbol", pos, self.text)
            counts = self.context.split_jet_suffix(suffix)
            if counts is None:
                raise ParseError(
                    f"cannot read derivative suffix {suffix!r} as independent variables",
                    pos,
                    self.text,
                )
            return ex.jet(head, counts)
        atom = self.context.lookup(name)
        if atom is None:
            raise ParseError(f"unknown identifier {name!r}", pos, self.text)
        return ex.Sym(atom)


def parse_expr(text, context) -> ex.Expr:
    """Parse a single expression; raises ParseError with position info."""
    p = _Parser(text, context)
    node = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing input {val!r}", pos, text)
    return node
