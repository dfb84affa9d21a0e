"""Recursive-descent parser for a C-like statement/expression subset.

The parser never raises on bad input. A syntax error inside a statement is
recorded as a diagnostic, the offending tokens are skipped up to the next
``;`` (or the ``}`` that closes a brace opened while skipping) and parsing
resumes. Only input with no parseable top-level construct is reported as
failed.

Node kinds produced:

    translation-unit, function-def, declaration, init-declarator, declarator,
    param-list, param, array-suffix, type-spec, type-name, init-list,
    compound, expr-stmt, if-stmt, while-stmt, do-while-stmt, for-stmt,
    switch-stmt, case-label, labeled-stmt, goto-stmt, return-stmt,
    assign-expr, compound-assign-expr, ternary-expr, binary-expr, unary-expr,
    postfix-expr, cast-expr, sizeof-expr, call-expr, index-expr, member-expr,
    paren-expr, comma-expr

and leaves identifier, literal, keyword, operator, plus statement leaves for
constructs without operands (``break``, ``continue``, ``return``, ``;``,
``default``, ``{}``, ``()``, ``EMPTY``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .tokens import CHAR, IDENTIFIER, KEYWORD, NUMBER, OPERATOR, STRING, Token, tokenize

MAX_NESTING = 64

TYPE_KEYWORDS = frozenset(
    "auto char const double enum extern float inline int long register restrict "
    "short signed static struct typedef union unsigned void volatile bool".split()
)
BASE_TYPE_KEYWORDS = frozenset(
    "char double float int long short signed unsigned void bool".split()
)
TAG_KEYWORDS = frozenset(("struct", "union", "enum"))
LITERAL_KEYWORDS = frozenset(("true", "false", "nullptr"))

ASSIGN_OPS = frozenset(("=", "+=", "-=", "*=", "/="))
# Spelled as two adjacent tokens because the lexer's operator table stops at "/=".
FUSED_ASSIGN_PREFIXES = frozenset(("%", "&", "|", "^", "<<", ">>"))

BINARY_PRECEDENCE = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6,
    "<": 7, ">": 7, "<=": 7, ">=": 7,
    "<<": 8, ">>": 8,
    "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
}
PREFIX_OPS = frozenset(("!", "-", "~", "*", "&", "+"))


@dataclass(frozen=True)
class SyntaxNode:
    kind: str
    children: tuple["SyntaxNode", ...] = ()
    leaf_lexeme: str | None = None
    span: tuple[int, int] = (0, 0)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self):
        """Pre-order iteration (source order)."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"kind": self.kind, "lexeme": self.leaf_lexeme, "span": list(self.span)}
        return {
            "kind": self.kind,
            "span": list(self.span),
            "children": [c.to_dict() for c in self.children],
        }


@dataclass(frozen=True)
class SyntaxTree:
    root: SyntaxNode
    coverage: float


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str


@dataclass(frozen=True)
class ParseOutcome:
    tree: SyntaxTree | None
    diagnostics: tuple[Diagnostic, ...] = field(default_factory=tuple)

    @property
    def failed(self) -> bool:
        return self.tree is None


class _SyntaxError(Exception):
    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.message = message
        self.index = index


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.n = len(tokens)
        self.pos = 0
        self.depth = 0
        self.skipped = 0
        self.diagnostics: list[Diagnostic] = []

    # -- token helpers -----------------------------------------------------

    def peek(self, k: int = 0) -> Token | None:
        i = self.pos + k
        return self.toks[i] if i < self.n else None

    def lex(self, k: int = 0) -> str | None:
        i = self.pos + k
        return self.toks[i].lexeme if i < self.n else None

    def at(self, lexeme: str) -> bool:
        return self.pos < self.n and self.toks[self.pos].lexeme == lexeme

    def accept(self, lexeme: str) -> bool:
        if self.at(lexeme):
            self.pos += 1
            return True
        return False

    def expect(self, lexeme: str) -> None:
        if not self.accept(lexeme):
            got = self.lex()
            self.fail(f"expected {lexeme!r}, found {got!r}" if got else f"expected {lexeme!r} at end of input")

    def fail(self, message: str):
        raise _SyntaxError(message, min(self.pos, self.n - 1) if self.n else 0)

    def node(self, kind: str, children: list[SyntaxNode], start: int) -> SyntaxNode:
        return SyntaxNode(kind, tuple(children), None, (start, self.pos))

    def leaf(self, kind: str, lexeme: str, start: int, end: int | None = None) -> SyntaxNode:
        return SyntaxNode(kind, (), lexeme, (start, self.pos if end is None else end))

    def take_leaf(self, kind: str) -> SyntaxNode:
        tok = self.toks[self.pos]
        self.pos += 1
        return SyntaxNode(kind, (), tok.lexeme, (self.pos - 1, self.pos))

    def enter(self) -> None:
        self.depth += 1
        if self.depth > MAX_NESTING:
            self.fail("nesting too deep")

    def _fused_assign(self, i: int) -> str | None:
        """``%=``, ``&=``, ``<<=`` ... written as two touching tokens."""
        if i + 1 >= self.n:
            return None
        a, b = self.toks[i], self.toks[i + 1]
        if a.lexeme in FUSED_ASSIGN_PREFIXES and b.lexeme == "=" and b.offset == a.offset + len(a.lexeme):
            return a.lexeme + "="
        return None

    # -- recovery ----------------------------------------------------------

    def snapshot(self):
        return self.pos, self.depth, self.skipped, len(self.diagnostics)

    def restore(self, snap) -> None:
        self.pos, self.depth, self.skipped, ndiag = snap
        del self.diagnostics[ndiag:]

    def recover(self, start: int, err: _SyntaxError) -> None:
        tok = self.toks[err.index]
        self.diagnostics.append(Diagnostic(tok.line, tok.column, err.message))
        depth = 0
        i = start
        while i < self.n:
            lex = self.toks[i].lexeme
            if lex == "{":
                depth += 1
            elif lex == "}":
                if depth == 0:
                    break
                depth -= 1
                if depth == 0:
                    i += 1
                    break
            elif lex == ";" and depth == 0:
                i += 1
                break
            i += 1
        if i == start:
            i += 1
        self.skipped += i - start
        self.pos = i

    # -- top level ---------------------------------------------------------

    def translation_unit(self) -> list[SyntaxNode]:
        items = []
        while self.pos < self.n:
            start = self.pos
            item, err = self.external_item()
            if item is not None:
                items.append(item)
            else:
                self.recover(start, err)
        return items

    def external_item(self):
        snap = self.snapshot()
        furthest = None
        for rule in (self.function_def, self.declaration, self.statement):
            try:
                return rule(), None
            except _SyntaxError as err:
                if furthest is None or err.index > furthest.index:
                    furthest = err
                self.restore(snap)
        return None, furthest

    def function_def(self) -> SyntaxNode:
        start = self.pos
        spec = self.type_spec()
        decl = self.declarator()
        if not decl.children or decl.children[-1].kind != "param-list":
            self.fail("expected parameter list")
        if not self.at("{"):
            self.fail("expected function body")
        body = self.compound()
        return self.node("function-def", [spec, decl, body], start)

    # -- declarations ------------------------------------------------------

    def looks_like_declaration(self) -> bool:
        tok = self.peek()
        if tok is None:
            return False
        if tok.kind == KEYWORD:
            return tok.lexeme in TYPE_KEYWORDS
        if tok.kind != IDENTIFIER:
            return False
        nxt = self.peek(1)
        if nxt is None:
            return False
        if nxt.kind == IDENTIFIER:
            return True
        if nxt.lexeme != "*":
            return False
        k = 1
        while self.lex(k) == "*":
            k += 1
        t = self.peek(k)
        return t is not None and t.kind == IDENTIFIER and self.lex(k + 1) in ("=", ";", ",", "[", ")")

    def type_spec(self, in_type_name: bool = False) -> SyntaxNode:
        start = self.pos
        parts = []
        saw_base = False
        while self.pos < self.n:
            tok = self.toks[self.pos]
            if tok.kind == KEYWORD and tok.lexeme in TYPE_KEYWORDS:
                parts.append(self.take_leaf("keyword"))
                if tok.lexeme in TAG_KEYWORDS:
                    if self.peek() is not None and self.peek().kind == IDENTIFIER:
                        parts.append(self.take_leaf("identifier"))
                    if self.at("{"):
                        self.fail("aggregate definitions are not supported")
                    saw_base = True
                elif tok.lexeme in BASE_TYPE_KEYWORDS:
                    saw_base = True
                continue
            if tok.kind == IDENTIFIER and not saw_base:
                nxt = self.peek(1)
                follow_ok = nxt is not None and (
                    nxt.kind == IDENTIFIER or nxt.lexeme == "*" or (in_type_name and nxt.lexeme == ")")
                )
                if follow_ok:
                    parts.append(self.take_leaf("identifier"))
                    saw_base = True
                    continue
            break
        if not parts:
            self.fail("expected type")
        return self.node("type-spec", parts, start)

    def declarator(self, abstract: bool = False) -> SyntaxNode:
        start = self.pos
        parts = []
        while self.at("*"):
            parts.append(self.take_leaf("operator"))
            while self.lex() in ("const", "volatile", "restrict"):
                parts.append(self.take_leaf("keyword"))
        if self.at("(") and self.lex(1) == "*":
            self.pos += 1
            parts.append(self.declarator(abstract))
            self.expect(")")
        elif self.peek() is not None and self.peek().kind == IDENTIFIER:
            parts.append(self.take_leaf("identifier"))
        elif not abstract:
            self.fail("expected declarator name")
        while True:
            if self.at("["):
                s = self.pos
                self.pos += 1
                if self.accept("]"):
                    parts.append(self.leaf("array-suffix", "[]", s))
                else:
                    size = self.expression()
                    self.expect("]")
                    parts.append(self.node("array-suffix", [size], s))
            elif self.at("(") and not abstract:
                parts.append(self.param_list())
            else:
                break
        if not parts:
            self.fail("expected declarator")
        return self.node("declarator", parts, start)

    def param_list(self) -> SyntaxNode:
        start = self.pos
        self.expect("(")
        if self.accept(")"):
            return self.leaf("param-list", "()", start)
        params = []
        while True:
            if self.at(".") and self.lex(1) == "." and self.lex(2) == ".":
                s = self.pos
                self.pos += 3
                params.append(self.leaf("param", "...", s))
                break
            s = self.pos
            spec = self.type_spec()
            kids = [spec]
            if not (self.at(",") or self.at(")")):
                kids.append(self.declarator(abstract=True))
            params.append(self.node("param", kids, s))
            if not self.accept(","):
                break
        self.expect(")")
        return self.node("param-list", params, start)

    def declaration(self) -> SyntaxNode:
        start = self.pos
        kids = [self.type_spec()]
        while True:
            s = self.pos
            decl = self.declarator()
            if self.accept("="):
                init = self.initializer()
                kids.append(self.node("init-declarator", [decl, init], s))
            else:
                kids.append(decl)
            if not self.accept(","):
                break
        self.expect(";")
        return self.node("declaration", kids, start)

    def initializer(self) -> SyntaxNode:
        if not self.at("{"):
            return self.assignment()
        start = self.pos
        self.pos += 1
        items = []
        while not self.at("}"):
            items.append(self.initializer())
            if not self.accept(","):
                break
        self.expect("}")
        if not items:
            return self.leaf("init-list", "{}", start)
        return self.node("init-list", items, start)

    # -- statements --------------------------------------------------------

    def compound(self) -> SyntaxNode:
        start = self.pos
        self.expect("{")
        items = []
        while not self.at("}"):
            if self.pos >= self.n:
                tok = self.toks[-1]
                self.diagnostics.append(Diagnostic(tok.line, tok.column, "missing '}' at end of input"))
                break
            stmt_start = self.pos
            snap = self.snapshot()
            try:
                items.append(self.statement())
            except _SyntaxError as err:
                self.restore(snap)
                self.recover(stmt_start, err)
        else:
            self.pos += 1
        if not items:
            return self.leaf("compound", "{}", start)
        return self.node("compound", items, start)

    def statement(self) -> SyntaxNode:
        try:
            self.enter()
            return self._statement()
        finally:
            self.depth -= 1

    def _statement(self) -> SyntaxNode:
        tok = self.peek()
        if tok is None:
            self.fail("expected statement")
        start = self.pos
        lex = tok.lexeme
        if lex == "{":
            return self.compound()
        if lex == ";":
            self.pos += 1
            return self.leaf("empty-stmt", ";", start)
        if tok.kind == KEYWORD:
            handler = self._keyword_statements.get(lex)
            if handler is not None:
                return handler(self, start)
        if tok.kind == IDENTIFIER and self.lex(1) == ":":
            label = self.take_leaf("identifier")
            self.pos += 1
            if self.at("}"):
                return self.node("labeled-stmt", [label], start)
            return self.node("labeled-stmt", [label, self.statement()], start)
        if self.looks_like_declaration():
            return self.declaration()
        expr = self.expression()
        self.expect(";")
        return self.node("expr-stmt", [expr], start)

    def paren_condition(self) -> SyntaxNode:
        self.expect("(")
        cond = self.expression()
        self.expect(")")
        return cond

    def _if(self, start):
        self.pos += 1
        kids = [self.paren_condition(), self.statement()]
        if self.accept("else"):
            kids.append(self.statement())
        return self.node("if-stmt", kids, start)

    def _while(self, start):
        self.pos += 1
        cond = self.paren_condition()
        return self.node("while-stmt", [cond, self.statement()], start)

    def _do(self, start):
        self.pos += 1
        body = self.statement()
        self.expect("while")
        cond = self.paren_condition()
        self.expect(";")
        return self.node("do-while-stmt", [body, cond], start)

    def _for(self, start):
        self.pos += 1
        self.expect("(")
        s = self.pos
        if self.accept(";"):
            init = self.leaf("empty", "EMPTY", s)
        elif self.looks_like_declaration():
            init = self.declaration()
        else:
            init = self.expression()
            self.expect(";")
        s = self.pos
        cond = self.leaf("empty", "EMPTY", s) if self.at(";") else self.expression()
        self.expect(";")
        s = self.pos
        step = self.leaf("empty", "EMPTY", s) if self.at(")") else self.expression()
        self.expect(")")
        return self.node("for-stmt", [init, cond, step, self.statement()], start)

    def _switch(self, start):
        self.pos += 1
        cond = self.paren_condition()
        return self.node("switch-stmt", [cond, self.statement()], start)

    def _case(self, start):
        self.pos += 1
        value = self.ternary()
        self.expect(":")
        return self.node("case-label", [value], start)

    def _default(self, start):
        self.pos += 1
        self.expect(":")
        return self.leaf("default-label", "default", start)

    def _return(self, start):
        self.pos += 1
        if self.accept(";"):
            return self.leaf("return-stmt", "return", start)
        value = self.expression()
        self.expect(";")
        return self.node("return-stmt", [value], start)

    def _jump(self, start):
        word = self.lex()
        self.pos += 1
        self.expect(";")
        return self.leaf(f"{word}-stmt", word, start)

    def _goto(self, start):
        self.pos += 1
        tok = self.peek()
        if tok is None or tok.kind != IDENTIFIER:
            self.fail("expected label after goto")
        label = self.take_leaf("identifier")
        self.expect(";")
        return self.node("goto-stmt", [label], start)

    _keyword_statements = {
        "if": _if,
        "while": _while,
        "do": _do,
        "for": _for,
        "switch": _switch,
        "case": _case,
        "default": _default,
        "return": _return,
        "break": _jump,
        "continue": _jump,
        "goto": _goto,
    }

    # -- expressions -------------------------------------------------------

    def expression(self) -> SyntaxNode:
        start = self.pos
        first = self.assignment()
        if not self.at(","):
            return first
        items = [first]
        while self.accept(","):
            items.append(self.assignment())
        return self.node("comma-expr", items, start)

    def assignment(self) -> SyntaxNode:
        try:
            self.enter()
            start = self.pos
            target = self.ternary()
            lex = self.lex()
            if lex in ASSIGN_OPS:
                op_start = self.pos
                self.pos += 1
                op = lex
            else:
                op = self._fused_assign(self.pos)
                if op is None:
                    return target
                op_start = self.pos
                self.pos += 2
            op_leaf = self.leaf("operator", op, op_start)
            value = self.assignment()
            if op == "=":
                return self.node("assign-expr", [target, value], start)
            return self.node("compound-assign-expr", [target, op_leaf, value], start)
        finally:
            self.depth -= 1

    def ternary(self) -> SyntaxNode:
        start = self.pos
        cond = self.binary(1)
        if not self.accept("?"):
            return cond
        try:
            self.enter()
            then = self.expression()
            self.expect(":")
            other = self.ternary()
        finally:
            self.depth -= 1
        return self.node("ternary-expr", [cond, then, other], start)

    def binary(self, min_prec: int) -> SyntaxNode:
        start = self.pos
        left = self.unary()
        while self.pos < self.n:
            tok = self.toks[self.pos]
            prec = BINARY_PRECEDENCE.get(tok.lexeme) if tok.kind == OPERATOR else None
            if prec is None or prec < min_prec or self._fused_assign(self.pos):
                break
            op = self.take_leaf("operator")
            right = self.binary(prec + 1)
            left = self.node("binary-expr", [left, op, right], start)
        return left

    def unary(self) -> SyntaxNode:
        try:
            self.enter()
            return self._unary()
        finally:
            self.depth -= 1

    def _unary(self) -> SyntaxNode:
        tok = self.peek()
        if tok is None:
            self.fail("expected expression")
        start = self.pos
        lex = tok.lexeme
        if tok.kind == OPERATOR and (lex in ("++", "--") or lex in PREFIX_OPS):
            op = self.take_leaf("operator")
            return self.node("unary-expr", [op, self.unary()], start)
        if lex == "sizeof":
            self.pos += 1
            if self.at("(") and self._type_name_follows(1):
                self.pos += 1
                tname = self.type_name()
                self.expect(")")
                return self.node("sizeof-expr", [tname], start)
            return self.node("sizeof-expr", [self.unary()], start)
        if lex == "(" and self._looks_like_cast():
            self.pos += 1
            tname = self.type_name()
            self.expect(")")
            return self.node("cast-expr", [tname, self.unary()], start)
        return self.postfix()

    def _type_name_follows(self, k: int) -> bool:
        tok = self.peek(k)
        if tok is None:
            return False
        if tok.kind == KEYWORD:
            return tok.lexeme in TYPE_KEYWORDS
        if tok.kind != IDENTIFIER:
            return False
        j = k + 1
        if self.lex(j) != "*":
            return False
        while self.lex(j) == "*":
            j += 1
        return self.lex(j) == ")"

    def _looks_like_cast(self) -> bool:
        if self._type_name_follows(1):
            return True
        t1, t2, t3 = self.peek(1), self.peek(2), self.peek(3)
        if t1 is None or t1.kind != IDENTIFIER or t2 is None or t2.lexeme != ")" or t3 is None:
            return False
        return t3.kind in (IDENTIFIER, NUMBER, STRING, CHAR) or t3.lexeme in ("(", "!", "~")

    def type_name(self) -> SyntaxNode:
        start = self.pos
        kids = [self.type_spec(in_type_name=True)]
        while self.at("*"):
            kids.append(self.take_leaf("operator"))
            while self.lex() in ("const", "volatile", "restrict"):
                kids.append(self.take_leaf("keyword"))
        return self.node("type-name", kids, start)

    def postfix(self) -> SyntaxNode:
        start = self.pos
        expr = self.primary()
        while self.pos < self.n:
            lex = self.toks[self.pos].lexeme
            if lex == "(":
                self.pos += 1
                args = [expr]
                if not self.at(")"):
                    args.append(self.assignment())
                    while self.accept(","):
                        args.append(self.assignment())
                self.expect(")")
                expr = self.node("call-expr", args, start)
            elif lex == "[":
                self.pos += 1
                index = self.expression()
                self.expect("]")
                expr = self.node("index-expr", [expr, index], start)
            elif lex in (".", "->"):
                op = self.take_leaf("operator")
                tok = self.peek()
                if tok is None or tok.kind != IDENTIFIER:
                    self.fail("expected member name")
                member = self.take_leaf("identifier")
                expr = self.node("member-expr", [expr, op, member], start)
            elif lex in ("++", "--"):
                op = self.take_leaf("operator")
                expr = self.node("postfix-expr", [expr, op], start)
            else:
                break
        return expr

    def primary(self) -> SyntaxNode:
        tok = self.peek()
        if tok is None:
            self.fail("expected expression")
        start = self.pos
        if tok.kind == IDENTIFIER:
            return self.take_leaf("identifier")
        if tok.kind in (NUMBER, CHAR) or (tok.kind == KEYWORD and tok.lexeme in LITERAL_KEYWORDS):
            return self.take_leaf("literal")
        if tok.kind == STRING:
            parts = []
            while self.pos < self.n and self.toks[self.pos].kind == STRING:
                parts.append(self.toks[self.pos].lexeme)
                self.pos += 1
            return self.leaf("literal", " ".join(parts), start)
        if tok.lexeme == "(":
            self.pos += 1
            inner = self.expression()
            self.expect(")")
            return self.node("paren-expr", [inner], start)
        self.fail(f"unexpected token {tok.lexeme!r}")


def parse(tokens: list[Token]) -> ParseOutcome:
    """Parse a token list. Never raises."""
    if not tokens:
        return ParseOutcome(None, (Diagnostic(1, 1, "empty input"),))
    parser = _Parser(tokens)
    try:
        items = parser.translation_unit()
    except RecursionError:
        tok = tokens[0]
        return ParseOutcome(None, (Diagnostic(tok.line, tok.column, "input nested too deeply"),))
    diagnostics = tuple(parser.diagnostics)
    if not items:
        return ParseOutcome(None, diagnostics)
    root = SyntaxNode("translation-unit", tuple(items), None, (0, len(tokens)))
    coverage = 1.0 - parser.skipped / len(tokens)
    return ParseOutcome(SyntaxTree(root, coverage), diagnostics)


def parse_text(text: str) -> ParseOutcome:
    return parse(tokenize(text))
