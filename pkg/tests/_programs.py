"""Random C-like programs with independently computed expectations.

Programs are built as small Python trees, rendered to C text, and analysed
here without touching the package: reaching definitions come from an
explicit control-flow graph solved by a worklist, and subtree counts from
brute-force enumeration over the package's syntax trees using a separate
canonicalization.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

KEYWORDS = {"int", "if", "else", "while", "break", "continue", "return"}
BIN_OPS = ("+", "-", "*", "<", ">", "==")


@dataclass
class Program:
    params: list[str]
    body: list
    as_function: bool = True
    rename: dict[str, str] = field(default_factory=dict)

    def name(self, v: str) -> str:
        return self.rename.get(v, v)

    def renamed(self, mapping: dict[str, str]) -> "Program":
        return Program(self.params, self.body, self.as_function, dict(mapping))

    def variables(self) -> list[str]:
        """Every variable name used, in first-appearance order (unrenamed)."""
        seen: dict[str, None] = {}
        for tok in render_tokens(Program(self.params, self.body, self.as_function)):
            if tok.isidentifier() and tok not in KEYWORDS and tok != "f":
                seen.setdefault(tok)
        return list(seen)

    def tokens(self) -> list[str]:
        return render_tokens(self)

    def text(self) -> str:
        return " ".join(self.tokens())


# -- generation ----------------------------------------------------------------


class Generator:
    def __init__(self, rng: random.Random, n_vars: int = 4, max_depth: int = 3):
        self.rng = rng
        self.pool = [f"v{i}" for i in range(n_vars)] + ["g"]
        self.max_depth = max_depth

    def expr(self, names, depth=0):
        r = self.rng.random()
        if depth >= 2 or r < 0.45:
            return ("var", self.rng.choice(names))
        if r < 0.6:
            return ("lit", str(self.rng.randint(0, 9)))
        return ("bin", self.rng.choice(BIN_OPS), self.expr(names, depth + 1), self.expr(names, depth + 1))

    def stmt(self, names, depth, in_loop):
        choices = ["decl", "assign", "assign", "cassign", "incr", "decl0"]
        if depth < self.max_depth:
            choices += ["if", "while"]
        if in_loop:
            choices += ["break", "continue"]
        choices.append("return")
        kind = self.rng.choice(choices)
        target = self.rng.choice(self.pool)
        if kind == "decl":
            return ("decl", target, self.expr(names))
        if kind == "decl0":
            return ("decl", target, None)
        if kind == "assign":
            return ("assign", target, self.expr(names))
        if kind == "cassign":
            return ("cassign", target, self.rng.choice(("+=", "-=", "*=")), self.expr(names))
        if kind == "incr":
            return ("incr", target, self.rng.choice(("++", "--")))
        if kind == "if":
            other = self.block(names, depth + 1, in_loop) if self.rng.random() < 0.5 else None
            return ("if", self.expr(names), self.block(names, depth + 1, in_loop), other)
        if kind == "while":
            return ("while", self.expr(names), self.block(names, depth + 1, True))
        if kind in ("break", "continue"):
            return (kind,)
        return ("return", self.expr(names))

    def block(self, names, depth, in_loop, lo=1, hi=3):
        return [self.stmt(names, depth, in_loop) for _ in range(self.rng.randint(lo, hi))]

    def program(self, as_function=True, lo=2, hi=6) -> Program:
        params = ["p0", "p1"][: self.rng.randint(0, 2)] if as_function else []
        names = self.pool + params
        return Program(params, self.block(names, 0, False, lo, hi), as_function)


def random_program(rng: random.Random, **kw) -> Program:
    return Generator(rng, max_depth=kw.pop("max_depth", 3)).program(**kw)


def small_program(rng: random.Random, max_tokens: int = 30) -> Program:
    """A random program of at most ``max_tokens`` tokens."""
    while True:
        gen = Generator(rng, n_vars=3, max_depth=2)
        prog = gen.program(as_function=rng.random() < 0.5, lo=1, hi=3)
        if len(prog.tokens()) <= max_tokens:
            return prog


NAME_WORDS = ("alpha", "beta", "len", "buf", "tmp", "cnt", "ptr", "res")


def fresh_names(prog: Program, rng: random.Random) -> dict[str, str]:
    """A consistent renaming of every variable to a new distinct name."""
    names = prog.variables()
    return {old: f"{rng.choice(NAME_WORDS)}_{i}" for i, old in enumerate(names)}


# -- rendering -----------------------------------------------------------------


def _expr_tokens(p: Program, e, nested=False) -> list[str]:
    if e[0] == "var":
        return [p.name(e[1])]
    if e[0] == "lit":
        return [e[1]]
    inner = _expr_tokens(p, e[2], True) + [e[1]] + _expr_tokens(p, e[3], True)
    return ["(", *inner, ")"] if nested else inner


def _block_tokens(p: Program, stmts) -> list[str]:
    out = ["{"]
    for s in stmts:
        out += _stmt_tokens(p, s)
    return out + ["}"]


def _stmt_tokens(p: Program, s) -> list[str]:
    kind = s[0]
    if kind == "decl":
        if s[2] is None:
            return ["int", p.name(s[1]), ";"]
        return ["int", p.name(s[1]), "=", *_expr_tokens(p, s[2]), ";"]
    if kind == "assign":
        return [p.name(s[1]), "=", *_expr_tokens(p, s[2]), ";"]
    if kind == "cassign":
        return [p.name(s[1]), s[2], *_expr_tokens(p, s[3]), ";"]
    if kind == "incr":
        return [p.name(s[1]), s[2], ";"]
    if kind == "if":
        out = ["if", "(", *_expr_tokens(p, s[1]), ")", *_block_tokens(p, s[2])]
        if s[3] is not None:
            out += ["else", *_block_tokens(p, s[3])]
        return out
    if kind == "while":
        return ["while", "(", *_expr_tokens(p, s[1]), ")", *_block_tokens(p, s[2])]
    if kind in ("break", "continue"):
        return [kind, ";"]
    return ["return", *_expr_tokens(p, s[1]), ";"]


def render_tokens(p: Program) -> list[str]:
    body: list[str] = []
    for s in p.body:
        body += _stmt_tokens(p, s)
    if not p.as_function:
        return body
    params: list[str] = []
    for i, name in enumerate(p.params):
        params += ([","] if i else []) + ["int", p.name(name)]
    return ["int", "f", "(", *params, ")", "{", *body, "}"]


# -- reaching-definitions oracle -----------------------------------------------


@dataclass
class _Node:
    target: str | None = None  # variable defined here (None: no definition)
    reads: list = field(default_factory=list)  # variable read occurrences feeding the definition
    preds: set = field(default_factory=set)


class _CFG:
    def __init__(self):
        self.nodes: list[_Node] = []

    def add(self, preds, target=None, reads=()) -> int:
        self.nodes.append(_Node(target, list(reads), set(preds)))
        return len(self.nodes) - 1


def _reads(e) -> list[str]:
    if e[0] == "var":
        return [e[1]]
    if e[0] == "lit":
        return []
    return _reads(e[2]) + _reads(e[3])


def _build(cfg: _CFG, stmts, preds: set, loop) -> set:
    """Add nodes for ``stmts``; returns the set of nodes falling through."""
    for s in stmts:
        kind = s[0]
        if kind == "decl":
            if s[2] is None:
                preds = {cfg.add(preds)}
            else:
                preds = {cfg.add(preds, s[1], _reads(s[2]))}
        elif kind == "assign":
            preds = {cfg.add(preds, s[1], _reads(s[2]))}
        elif kind == "cassign":
            preds = {cfg.add(preds, s[1], [s[1]] + _reads(s[3]))}
        elif kind == "incr":
            preds = {cfg.add(preds, s[1], [s[1]])}
        elif kind == "if":
            cond = cfg.add(preds)
            then_out = _build(cfg, s[2], {cond}, loop)
            else_out = _build(cfg, s[3], {cond}, loop) if s[3] is not None else {cond}
            preds = then_out | else_out
        elif kind == "while":
            head = cfg.add(preds)
            ctx = {"head": head, "breaks": set()}
            body_out = _build(cfg, s[2], {head}, ctx)
            cfg.nodes[head].preds |= body_out
            preds = {head} | ctx["breaks"]
        elif kind == "break":
            loop["breaks"].add(cfg.add(preds))
            preds = set()
        elif kind == "continue":
            cfg.nodes[loop["head"]].preds.add(cfg.add(preds))
            preds = set()
        elif kind == "return":
            cfg.add(preds)
            preds = set()
    return preds


ENTRY = "entry"


def oracle_dfg(prog: Program) -> tuple[int, list[tuple[int, int]]]:
    """(slot_count, sorted edges) by classic worklist reaching definitions."""
    variables = prog.variables()
    slot = {v: i for i, v in enumerate(variables)}
    cfg = _CFG()
    entry = cfg.add(set())
    last = {entry}
    for param in prog.params:
        last = {cfg.add(last, param)}
    _build(cfg, prog.body, last, None)

    n = len(cfg.nodes)
    succs = [set() for _ in range(n)]
    for i, node in enumerate(cfg.nodes):
        for p in node.preds:
            succs[p].add(i)
    entry_defs = frozenset((v, ENTRY) for v in variables)
    IN = [frozenset() for _ in range(n)]
    OUT = [frozenset() for _ in range(n)]
    work = list(range(n))
    while work:
        i = work.pop(0)
        node = cfg.nodes[i]
        inn = entry_defs if i == entry else frozenset().union(*(OUT[p] for p in node.preds))
        if node.target is None:
            out = inn
        else:
            out = frozenset(d for d in inn if d[0] != node.target) | {(node.target, i)}
        IN[i] = inn
        if out != OUT[i] or i == entry:
            OUT[i] = out
            work.extend(s for s in sorted(succs[i]) if s not in work)
    edges = []
    for i, node in enumerate(cfg.nodes):
        if node.target is None or i == entry:
            continue
        for var in node.reads:
            count = sum(1 for d in IN[i] if d[0] == var)
            edges += [(slot[var], slot[node.target])] * count
    return len(variables), sorted(edges)


# -- brute-force subtree oracle ------------------------------------------------


def _label(node) -> str:
    if node.kind == "identifier":
        return "ID"
    if node.kind.endswith("literal"):
        return "LIT"
    return node.leaf_lexeme


def _all_nodes(node):
    stack = [node]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(cur.children)


def _height(node) -> int:
    return 1 if not node.children else 1 + max(_height(c) for c in node.children)


def _text(node) -> str:
    if not node.children:
        return _label(node)
    return "(" + " ".join([node.kind] + [_text(c) for c in node.children]) + ")"


def naive_subtrees(root, min_height: int = 1) -> list[str]:
    return [_text(n) for n in _all_nodes(root) if _height(n) >= min_height]


def naive_ast_similarity(cand_root, ref_root, min_height: int = 1) -> float:
    """Fraction of oracle subtrees matched one-to-one by candidate subtrees."""
    pool = naive_subtrees(cand_root, min_height)
    ref = naive_subtrees(ref_root, min_height)
    matched = 0
    for s in ref:
        if s in pool:
            pool.remove(s)
            matched += 1
    return matched / len(ref)


def naive_counter(root, min_height: int = 1) -> Counter:
    return Counter(naive_subtrees(root, min_height))


# -- realistic hand-written corpus ---------------------------------------------

CORPUS = [
    """int sum(int *a, int n) {
    int s = 0;
    for (int i = 0; i < n; i++) {
        s += a[i];
    }
    return s;
}""",
    """static size_t copy_name(char *dst, const char *src, size_t cap) {
    size_t len = strlen(src);
    if (len >= cap) {
        len = cap - 1;
    }
    memcpy(dst, src, len);
    dst[len] = '\\0';
    return len;
}""",
    """int find(const int *v, int n, int key) {
    int lo = 0, hi = n - 1;
    while (lo <= hi) {
        int mid = lo + (hi - lo) / 2;
        if (v[mid] == key) return mid;
        else if (v[mid] < key) lo = mid + 1;
        else hi = mid - 1;
    }
    return -1;
}""",
    """void list_free(struct node *head) {
    struct node *next;
    while (head != NULL) {
        next = head->next;
        free(head->data);
        free(head);
        head = next;
    }
}""",
    """int parse_header(const unsigned char *buf, size_t len, struct hdr *out) {
    if (buf == NULL || out == NULL) return -EINVAL;
    if (len < 8) return -EINVAL;
    out->magic = (buf[0] << 8) | buf[1];
    out->length = (buf[2] << 8) | buf[3];
    if (out->length > len - 4) return -EOVERFLOW;
    return 0;
}""",
    """static int grow(struct vec *v, size_t need) {
    size_t cap = v->cap ? v->cap : 16;
    while (cap < need) cap *= 2;
    void *p = realloc(v->data, cap * sizeof(int));
    if (!p) return -1;
    v->data = p;
    v->cap = cap;
    return 0;
}""",
    """int classify(int c) {
    switch (c) {
    case 0:
        return 1;
    case 1:
    case 2:
        c = c * 2;
        break;
    default:
        c = -c;
    }
    return c;
}""",
    """unsigned hash(const char *s) {
    unsigned h = 5381;
    int c;
    while ((c = *s++) != 0)
        h = ((h << 5) + h) + c;
    return h;
}""",
    """int read_all(int fd, char *buf, int n) {
    int got = 0;
    do {
        int r = read(fd, buf + got, n - got);
        if (r < 0) return -1;
        if (r == 0) break;
        got += r;
    } while (got < n);
    return got;
}""",
    """void swap(int *a, int *b) {
    int t = *a;
    *a = *b;
    *b = t;
}""",
    """int max3(int a, int b, int c) {
    int m = a > b ? a : b;
    return m > c ? m : c;
}""",
    """static void reverse(char *s, int n) {
    for (int i = 0, j = n - 1; i < j; i++, j--) {
        char t = s[i];
        s[i] = s[j];
        s[j] = t;
    }
}""",
]


def multiline(prog: Program) -> str:
    """Render one statement or brace per line, as a formatter would."""
    lines, current, depth = [], [], 0
    for tok in prog.tokens():
        if tok == "}":
            if current:
                lines.append("    " * depth + " ".join(current))
                current = []
            depth -= 1
            lines.append("    " * depth + "}")
            continue
        current.append(tok)
        if tok in (";", "{"):
            lines.append("    " * depth + " ".join(current))
            current = []
            depth += tok == "{"
    if current:
        lines.append(" ".join(current))
    return "\n".join(lines) + "\n"
