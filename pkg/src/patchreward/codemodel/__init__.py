"""Tokenizer, parser, subtree extraction and data-flow graphs for C-like code."""

from .dataflow import DataFlowGraph, extract_dfg
from .parser import Diagnostic, ParseOutcome, SyntaxNode, SyntaxTree, parse, parse_text
from .subtrees import canonical_form, extract_subtrees, node_height
from .tokens import C_KEYWORDS, Token, detokenize, tokenize

__all__ = [
    "C_KEYWORDS",
    "DataFlowGraph",
    "Diagnostic",
    "ParseOutcome",
    "SyntaxNode",
    "SyntaxTree",
    "Token",
    "canonical_form",
    "detokenize",
    "extract_dfg",
    "extract_subtrees",
    "node_height",
    "parse",
    "parse_text",
    "tokenize",
]
