"""Prefix tree over vocabulary spellings with contiguous word-ID intervals."""

from __future__ import annotations

from dataclasses import dataclass, field

from .vocab import Vocabulary


@dataclass
class TrieNode:
    """One spelling prefix; ``[min_id, max_id]`` spans the words below it."""

    children: dict[str, int] = field(default_factory=dict)
    word_id: int | None = None
    min_id: int = 0
    max_id: int = 0


class PrefixTree:
    """Trie over word spellings supporting descent and interval queries.

    Nodes live in a flat arena and refer to each other by index; the root is
    always index 0.  Word IDs ascend with spelling order, so the words
    anticipated below any node occupy one contiguous ID interval, and the
    interval of a node encloses the intervals of all of its children.
    """

    ROOT = 0

    def __init__(self, nodes: list[TrieNode]):
        self.nodes = nodes

    @classmethod
    def build(cls, vocab: Vocabulary) -> "PrefixTree":
        if not vocab.words:
            raise ValueError("vocabulary has no spelled words")
        nodes = [TrieNode(min_id=0, max_id=0)]
        for word_id, word in enumerate(vocab.words):
            nodes[cls.ROOT].max_id = word_id
            cursor = cls.ROOT
            for ch in word:
                child = nodes[cursor].children.get(ch)
                if child is None:
                    child = len(nodes)
                    nodes[cursor].children[ch] = child
                    nodes.append(TrieNode(min_id=word_id, max_id=word_id))
                else:
                    # Words arrive in ascending ID order, so the first word
                    # through a node fixes min_id and the latest fixes max_id.
                    nodes[child].max_id = word_id
                cursor = child
            nodes[cursor].word_id = word_id
        return cls(nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def descend(self, node: int | None, label: str) -> int | None:
        """Child of *node* along *label*; ``None`` is absorbing."""
        if node is None:
            return None
        return self.nodes[node].children.get(label)

    def interval(self, node: int) -> tuple[int, int]:
        """Smallest and largest word ID anticipated at *node*."""
        entry = self.nodes[node]
        return entry.min_id, entry.max_id

    def word_end(self, node: int) -> int | None:
        """Word ID when the path to *node* spells a complete word, else None."""
        return self.nodes[node].word_id

    def children(self, node: int) -> dict[str, int]:
        return self.nodes[node].children

    def dump_lines(self) -> list[str]:
        """One line per node: path, interval bounds, and word end or ``-``."""
        lines = []
        stack = [(self.ROOT, "")]
        while stack:
            node, path = stack.pop()
            entry = self.nodes[node]
            word = "-" if entry.word_id is None else str(entry.word_id)
            lines.append(f"{path}\t{entry.min_id}\t{entry.max_id}\t{word}")
            for ch in sorted(entry.children, reverse=True):
                stack.append((entry.children[ch], path + ch))
        return lines
