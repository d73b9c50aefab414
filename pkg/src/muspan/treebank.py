"""Penn-Treebank bracketed trees and the accept/reject subtree traversal.

Trees are read, never produced: parses come from an external constituency
parser as a sidecar TSV file (``<example_id>\\t<bracketed tree>``).

Labels lose functional tags and co-index suffixes on reading
(``NP-SBJ-1`` becomes ``NP``); labels that start with ``-`` such as
``-NONE-`` are kept verbatim. Leaf tokens are unescaped from the PTB bracket
codes (``-LRB-`` becomes ``(``) and escaped again by :func:`serialize`.
"""

import re
from dataclasses import dataclass
from typing import Iterator, Optional

_UNESCAPE = {
    "-LRB-": "(",
    "-RRB-": ")",
    "-LSB-": "[",
    "-RSB-": "]",
    "-LCB-": "{",
    "-RCB-": "}",
}
_ESCAPE = {v: k for k, v in _UNESCAPE.items()}

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")
_LABEL_SUFFIX_RE = re.compile(r"[-=].*$")


class TreeParseError(ValueError):
    """Malformed bracketed input. ``offset`` is a UTF-8 byte offset."""

    def __init__(self, message, text, char_index):
        self.offset = len(text[:char_index].encode("utf-8"))
        super().__init__(f"{message} at byte {self.offset}")


@dataclass(frozen=True)
class ParseTree:
    label: str
    children: tuple = ()
    leaf_token: Optional[str] = None

    def __post_init__(self):
        if self.children and self.leaf_token is not None:
            raise ValueError("a node cannot have both children and a leaf token")
        if not self.children and self.leaf_token is None:
            raise ValueError("a node needs children or a leaf token")
        if not isinstance(self.children, tuple):
            object.__setattr__(self, "children", tuple(self.children))

    @property
    def is_leaf(self):
        return self.leaf_token is not None

    def __str__(self):
        return serialize(self)


def strip_label(label):
    if not label or label.startswith("-"):
        return label
    return _LABEL_SUFFIX_RE.sub("", label) or label


def parse_bracketed(text):
    """Parse one bracketed tree such as ``(S (NP (DT a) (NN dog)) (VP (VBZ runs)))``.

    A label-less wrapper around a single tree, ``( (S ...) )``, is unwrapped.
    """
    tokens = [(m.group(), m.start()) for m in _TOKEN_RE.finditer(text)]
    if not tokens:
        raise TreeParseError("empty input", text, 0)
    pos = 0

    def node():
        nonlocal pos
        tok, at = tokens[pos]
        if tok != "(":
            raise TreeParseError(f"expected '(' but found {tok!r}", text, at)
        pos += 1
        if pos >= len(tokens):
            raise TreeParseError("unbalanced parentheses at end of input", text, len(text))
        label = ""
        if tokens[pos][0] not in "()":
            label = tokens[pos][0]
            pos += 1
        children = []
        leaf = None
        while True:
            if pos >= len(tokens):
                raise TreeParseError("unbalanced parentheses at end of input", text, len(text))
            tok, tok_at = tokens[pos]
            if tok == ")":
                pos += 1
                break
            if tok == "(":
                if leaf is not None:
                    raise TreeParseError("subtree after leaf token", text, tok_at)
                children.append(node())
            else:
                if children or leaf is not None:
                    raise TreeParseError(f"unexpected token {tok!r}", text, tok_at)
                leaf = _UNESCAPE.get(tok, tok)
                pos += 1
        if not children and leaf is None:
            raise TreeParseError("empty node", text, at)
        if not label:
            if leaf is None and len(children) == 1:
                return children[0]
            raise TreeParseError("node without a label", text, at)
        return ParseTree(strip_label(label), tuple(children), leaf)

    tree = node()
    if pos != len(tokens):
        raise TreeParseError("trailing input after tree", text, tokens[pos][1])
    return tree


def serialize(tree):
    """Canonical single-line bracketed form."""
    if tree.is_leaf:
        return f"({tree.label} {_ESCAPE.get(tree.leaf_token, tree.leaf_token)})"
    return f"({tree.label} {' '.join(serialize(c) for c in tree.children)})"


def leaves(tree):
    out = []
    stack = [tree]
    while stack:
        t = stack.pop()
        if t.is_leaf:
            out.append(t.leaf_token)
        else:
            stack.extend(reversed(t.children))
    return out


def flat_tree(tokens, label="ROOT", tag="X"):
    """Depth-one tree over ``tokens``, for corpora without parses."""
    if not tokens:
        raise ValueError("flat_tree needs at least one token")
    return ParseTree(label, tuple(ParseTree(tag, (), t) for t in tokens))


class SubtreeTraversal:
    """Stack-based depth-first walk where the caller decides what to expand.

    Iterating yields subtrees, root first. Call :meth:`reject` on the subtree
    just yielded to have its children visited next (leftmost first);
    otherwise it counts as accepted and its descendants are skipped.
    """

    def __init__(self, tree):
        self._stack = [tree]
        self._current = None

    def __iter__(self) -> Iterator[ParseTree]:
        return self

    def __next__(self):
        if not self._stack:
            self._current = None
            raise StopIteration
        self._current = self._stack.pop()
        return self._current

    def accept(self):
        if self._current is None:
            raise RuntimeError("no subtree to accept")
        self._current = None

    def reject(self):
        if self._current is None:
            raise RuntimeError("no subtree to reject")
        self._stack.extend(reversed(self._current.children))
        self._current = None


def dfs_subtrees(tree):
    return SubtreeTraversal(tree)


def iter_tree_file(path):
    """Yield ``(example_id, ParseTree)`` from a sidecar TSV file."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            try:
                example_id, bracketed = line.split("\t", 1)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected '<id>\\t<tree>'") from None
            try:
                yield example_id, parse_bracketed(bracketed)
            except TreeParseError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc


def read_tree_file(path):
    return dict(iter_tree_file(path))


def write_tree_file(path, trees):
    with open(path, "w", encoding="utf-8") as fh:
        for example_id, tree in trees:
            fh.write(f"{example_id}\t{serialize(tree)}\n")
