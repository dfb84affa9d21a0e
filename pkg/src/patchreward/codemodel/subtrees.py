"""Canonical subtree multisets used for structural matching."""

from __future__ import annotations

from collections import Counter

from .parser import SyntaxNode, SyntaxTree

ID_PLACEHOLDER = "ID"
LIT_PLACEHOLDER = "LIT"


def leaf_label(node: SyntaxNode) -> str:
    if node.kind == "identifier":
        return ID_PLACEHOLDER
    if node.kind == "literal":
        return LIT_PLACEHOLDER
    return node.leaf_lexeme


def canonical_form(node: SyntaxNode) -> str:
    """Serialize ``node`` as ``(kind child ...)`` with ID/LIT placeholders."""
    if node.is_leaf:
        return leaf_label(node)
    return "(" + node.kind + " " + " ".join(canonical_form(c) for c in node.children) + ")"


def node_height(node: SyntaxNode) -> int:
    """A leaf has height 1."""
    if node.is_leaf:
        return 1
    return 1 + max(node_height(c) for c in node.children)


def extract_subtrees(tree: SyntaxTree | SyntaxNode, min_height: int = 1) -> Counter:
    """Multiset of canonical forms of every subtree of height >= ``min_height``.

    Forms are built bottom-up once per node, so the cost is linear in the
    total length of the emitted strings rather than quadratic in tree size.
    """
    if min_height < 1:
        raise ValueError("min_height must be >= 1")
    root = tree.root if isinstance(tree, SyntaxTree) else tree
    out: Counter = Counter()
    # Explicit post-order so deep trees don't hit the recursion limit.
    forms: dict[int, tuple[str, int]] = {}
    stack: list[tuple[SyntaxNode, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if node.is_leaf:
            form, height = leaf_label(node), 1
        elif not expanded:
            stack.append((node, True))
            stack.extend((c, False) for c in reversed(node.children))
            continue
        else:
            kids = [forms.pop(id(c)) for c in node.children]
            form = "(" + node.kind + " " + " ".join(f for f, _ in kids) + ")"
            height = 1 + max(h for _, h in kids)
        forms[id(node)] = (form, height)
        if height >= min_height:
            out[form] += 1
    return out
