"""Normalized variable-to-variable data-flow graphs.

Each function body (and the sequence of top-level statements, for bare
fragments) is scanned in source order while tracking reaching definitions.
For every assignment ``x = expr`` or initialized declaration, each variable
read in ``expr`` contributes one edge ``(v, x)`` per definition of ``v``
reaching that read. Every variable starts with one implicit definition at
entry, so globals and uninitialized locals still produce edges.

The state maps each variable to its reaching definitions; a variable absent
from the map has none, and the empty map is the state after ``return``,
``break`` or ``continue``. Branches join by union. Loop bodies are scanned
twice: a silent pass to find the definitions flowing around the back edge
and an emitting pass from the merged head state. For gen/kill transfer
functions that second pass is already the fixed point.

Variables are numbered by first appearance, so the graph is unchanged by
any consistent renaming.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .parser import ParseOutcome, SyntaxNode, SyntaxTree

_ENTRY = frozenset((-1,))
_NOT_VARIABLE_CONTAINERS = frozenset(("type-spec", "type-name", "sizeof-expr"))


@dataclass(frozen=True)
class DataFlowGraph:
    slot_count: int
    edges: tuple[tuple[int, int], ...] = ()

    def edge_counts(self) -> Counter:
        return Counter(self.edges)

    def to_dict(self) -> dict:
        return {"slot_count": self.slot_count, "edges": [list(e) for e in self.edges]}


# -- slot numbering ------------------------------------------------------------


def _is_prototype(declarator: SyntaxNode) -> bool:
    return any(c.kind == "param-list" for c in declarator.children)


def _collect_variables(node: SyntaxNode, out: dict[str, int]) -> None:
    kind = node.kind
    if node.is_leaf:
        if kind == "identifier" and node.leaf_lexeme not in out:
            out[node.leaf_lexeme] = len(out)
        return
    if kind in _NOT_VARIABLE_CONTAINERS:
        return
    children = node.children
    if kind == "function-def":
        for part in children[1].children:
            if part.kind == "param-list":
                _collect_variables(part, out)
        _collect_variables(children[2], out)
        return
    if kind == "declarator" and _is_prototype(node):
        return
    if kind == "call-expr" and children[0].kind == "identifier":
        children = children[1:]
    elif kind == "member-expr":
        children = children[:1]
    elif kind in ("labeled-stmt", "goto-stmt"):
        children = children[1:]
    for child in children:
        _collect_variables(child, out)


def declarator_name(declarator: SyntaxNode) -> str | None:
    for child in declarator.children:
        if child.kind == "identifier":
            return child.leaf_lexeme
        if child.kind == "declarator":
            return declarator_name(child)
    return None


# -- reaching definitions ------------------------------------------------------


_NONE: frozenset = frozenset()
_UNREACHABLE: dict = {}


def _join(*states: dict) -> dict:
    out: dict = {}
    for state in states:
        for var, defs in state.items():
            out[var] = out.get(var, _NONE) | defs
    return out


class _FlowScanner:
    def __init__(self, variables):
        self.variables = tuple(variables)
        self.state: dict[str, frozenset] = self.entry_state()
        self.emitting = True
        self.edges: list[tuple[str, str]] = []
        # Stack of [break_states, continue_states] per enclosing loop/switch.
        self.jumps: list[tuple[list, list | None]] = []
        self.switch_entries: list[dict] = []  # {entry state, default seen}

    def entry_state(self) -> dict:
        return dict.fromkeys(self.variables, _ENTRY)

    def reaching(self, var: str) -> frozenset:
        return self.state.get(var, _NONE)

    def define(self, var: str, site: int, kill: bool = True) -> None:
        if kill:
            self.state = {**self.state, var: frozenset((site,))}
        else:
            self.state = {**self.state, var: self.reaching(var) | {site}}

    def flow(self, reads, target: str) -> None:
        if not self.emitting:
            return
        for var, defs in reads:
            self.edges.extend([(var, target)] * len(defs))

    # statements

    def scan_statement(self, node: SyntaxNode) -> None:
        kind = node.kind
        if kind == "compound" or kind == "translation-unit":
            for child in node.children:
                self.scan_statement(child)
        elif kind == "declaration":
            self.scan_declaration(node)
        elif kind == "expr-stmt":
            for child in node.children:
                self.eval(child)
        elif kind == "return-stmt":
            for child in node.children:
                self.eval(child)
            self.state = _UNREACHABLE
        elif kind == "if-stmt":
            self.eval(node.children[0])
            before = self.state
            self.scan_statement(node.children[1])
            after_then = self.state
            self.state = before
            if len(node.children) > 2:
                self.scan_statement(node.children[2])
            self.state = _join(after_then, self.state)
        elif kind == "while-stmt":
            cond, body = node.children
            self.scan_loop(cond, body, None, test_first=True)
        elif kind == "do-while-stmt":
            body, cond = node.children
            self.scan_loop(cond, body, None, test_first=False)
        elif kind == "for-stmt":
            init, cond, step, body = node.children
            if init.kind == "declaration":
                self.scan_statement(init)
            else:
                self.eval(init)
            self.scan_loop(None if cond.kind == "empty" else cond, body, step, test_first=True)
        elif kind == "switch-stmt":
            self.eval(node.children[0])
            frame = {"entry": self.state, "default": False}
            self.jumps.append(([], None))
            self.switch_entries.append(frame)
            self.scan_statement(node.children[1])
            self.switch_entries.pop()
            breaks, _ = self.jumps.pop()
            # Without a default label, no matching case skips the body.
            skip = _UNREACHABLE if frame["default"] else frame["entry"]
            self.state = _join(self.state, skip, *breaks)
        elif kind in ("case-label", "default-label"):
            if self.switch_entries:
                frame = self.switch_entries[-1]
                frame["default"] = frame["default"] or kind == "default-label"
                self.state = _join(self.state, frame["entry"])
        elif kind == "labeled-stmt":
            if len(node.children) > 1:
                self.scan_statement(node.children[1])
        elif kind == "break-stmt":
            if self.jumps:
                self.jumps[-1][0].append(self.state)
                self.state = _UNREACHABLE
        elif kind == "continue-stmt":
            for breaks, continues in reversed(self.jumps):
                if continues is not None:
                    continues.append(self.state)
                    self.state = _UNREACHABLE
                    break
        elif kind == "function-def":
            self.scan_function(node)
        # goto, empty statements and declarations without initializers: no flow

    def _iteration(self, cond, body, step, test_first) -> tuple[dict, dict, list]:
        """One trip around the loop from the current state.

        Returns (state flowing back to the head, state leaving through the
        condition, break states). ``continue`` lands just before ``step`` in a
        for loop and before the condition in a do-while.
        """
        exit_state = _UNREACHABLE
        if test_first and cond is not None:
            self.eval(cond)
            exit_state = self.state
        self.jumps.append(([], []))
        self.scan_statement(body)
        breaks, continues = self.jumps.pop()
        self.state = _join(self.state, *continues)
        if step is not None:
            self.eval(step)
        if not test_first:
            self.eval(cond)
            exit_state = self.state
        return self.state, exit_state, breaks

    def scan_loop(self, cond, body, step, test_first: bool) -> None:
        entry = self.state
        emitting = self.emitting
        self.emitting = False
        back, _, _ = self._iteration(cond, body, step, test_first)
        self.emitting = emitting
        self.state = _join(entry, back)
        _, exit_state, breaks = self._iteration(cond, body, step, test_first)
        self.state = _join(exit_state, *breaks)

    def scan_declaration(self, node: SyntaxNode) -> None:
        for child in node.children[1:]:
            if child.kind != "init-declarator":
                continue
            decl, init = child.children
            name = declarator_name(decl)
            reads = self.eval(init)
            if name is not None and not _is_prototype(decl):
                self.flow(reads, name)
                self.define(name, id(child))

    def scan_function(self, node: SyntaxNode) -> None:
        saved = self.state
        self.state = self.entry_state()
        for part in node.children[1].children:
            if part.kind != "param-list":
                continue
            for param in part.children:
                for sub in param.children:
                    if sub.kind == "declarator":
                        name = declarator_name(sub)
                        if name is not None:
                            self.define(name, id(param))
        self.scan_statement(node.children[2])
        self.state = saved

    # expressions: return the list of (variable, reaching-defs) read

    def eval(self, node: SyntaxNode, conditional: bool = False) -> list:
        kind = node.kind
        if node.is_leaf:
            if kind == "identifier":
                return [(node.leaf_lexeme, self.reaching(node.leaf_lexeme))]
            return []
        ch = node.children
        if kind == "assign-expr":
            value = self.eval(ch[1], conditional)
            return self.assign(node, ch[0], value, False, conditional)
        if kind == "compound-assign-expr":
            value = self.eval(ch[2], conditional)
            return self.assign(node, ch[0], value, True, conditional)
        if kind == "unary-expr":
            op = ch[0].leaf_lexeme
            if op in ("++", "--"):
                return self.assign(node, ch[1], [], True, conditional)
            return self.eval(ch[1], conditional)
        if kind == "postfix-expr":
            before = self.eval(ch[0], conditional)
            self.assign(node, ch[0], [], True, conditional)
            return before
        if kind == "binary-expr":
            left = self.eval(ch[0], conditional)
            lazy = ch[1].leaf_lexeme in ("&&", "||")
            return left + self.eval(ch[2], conditional or lazy)
        if kind == "ternary-expr":
            reads = self.eval(ch[0], conditional)
            reads += self.eval(ch[1], True)
            return reads + self.eval(ch[2], True)
        if kind == "comma-expr":
            reads = []
            for child in ch:
                reads = self.eval(child, conditional)
            return reads
        if kind == "call-expr":
            reads = [] if ch[0].kind == "identifier" else self.eval(ch[0], conditional)
            for arg in ch[1:]:
                reads += self.eval(arg, conditional)
            return reads
        if kind == "member-expr":
            return self.eval(ch[0], conditional)
        if kind == "cast-expr":
            return self.eval(ch[1], conditional)
        if kind in _NOT_VARIABLE_CONTAINERS:
            return []
        reads = []
        for child in ch:
            reads += self.eval(child, conditional)
        return reads

    def assign(self, node, target, value, reads_target, conditional) -> list:
        base, whole = self.lvalue_base(target)
        if reads_target or not whole:
            # Evaluate index/pointer subexpressions for their side effects.
            target_reads = self.eval(target, conditional)
            if not reads_target:
                target_reads = []
        else:
            target_reads = []
        if base is None:
            return target_reads + value
        self.flow(target_reads + value, base)
        self.define(base, id(node), kill=whole and not conditional)
        return [(base, self.reaching(base))]

    def lvalue_base(self, node: SyntaxNode) -> tuple[str | None, bool]:
        """Variable written by an assignment to ``node`` and whether it is overwritten whole."""
        kind = node.kind
        if kind == "identifier":
            return node.leaf_lexeme, True
        if kind == "paren-expr":
            return self.lvalue_base(node.children[0])
        if kind in ("index-expr", "member-expr"):
            return self.lvalue_base(node.children[0])[0], False
        if kind == "unary-expr" and node.children[0].leaf_lexeme == "*":
            return self.lvalue_base(node.children[1])[0], False
        if kind == "cast-expr":
            return self.lvalue_base(node.children[1])[0], False
        return None, False


def _units(root: SyntaxNode):
    """Function definitions are separate units; loose top-level items form one more."""
    loose = []
    for item in root.children:
        if item.kind == "function-def":
            yield [item]
        else:
            loose.append(item)
    if loose:
        yield loose


def extract_dfg(tree: SyntaxTree | ParseOutcome) -> DataFlowGraph:
    if isinstance(tree, ParseOutcome):
        if tree.failed:
            raise ValueError("cannot extract data flow from a failed parse")
        tree = tree.tree
    if tree is None:
        raise ValueError("cannot extract data flow from a failed parse")
    slot_count = 0
    edges: list[tuple[int, int]] = []
    for unit in _units(tree.root):
        slots: dict[str, int] = {}
        for item in unit:
            _collect_variables(item, slots)
        scanner = _FlowScanner(slots)
        for item in unit:
            scanner.scan_statement(item)
        slot_count = max(slot_count, len(slots))
        edges.extend((slots[src], slots[dst]) for src, dst in scanner.edges)
    return DataFlowGraph(slot_count, tuple(sorted(edges)))
