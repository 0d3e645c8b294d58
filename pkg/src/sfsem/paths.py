"""Hierarchical state paths and ancestry queries.

A path is a dot-separated sequence of names leading from the chart root
down to a state or junction, e.g. ``root.Off.Sleep``.  Junction names
carry a ``#`` prefix and may only appear as the final segment.  The
empty path plays the role of "no path" in several places (no recorded
history, no transition source on default transitions).
"""

from __future__ import annotations

from dataclasses import dataclass

JUNCTION_MARK = "#"
HISTORY_SEGMENT = "#history"


@dataclass(frozen=True)
class Path:
    segments: tuple[str, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "Path":
        if text == "":
            return EMPTY_PATH
        parts = tuple(text.split("."))
        if any(part == "" for part in parts):
            raise ValueError(f"path {text!r} contains an empty segment")
        return cls(parts)

    def __str__(self) -> str:
        return ".".join(self.segments)

    def __bool__(self) -> bool:
        return bool(self.segments)

    def __len__(self) -> int:
        return len(self.segments)

    @property
    def is_junction(self) -> bool:
        return bool(self.segments) and self.segments[-1].startswith(JUNCTION_MARK)

    @property
    def last(self) -> str:
        if not self.segments:
            raise ValueError("empty path has no final segment")
        return self.segments[-1]

    @property
    def head(self) -> str:
        if not self.segments:
            raise ValueError("empty path has no head segment")
        return self.segments[0]

    def tail(self) -> "Path":
        return Path(self.segments[1:])

    def child(self, name: str) -> "Path":
        return Path(self.segments + (name,))

    def is_prefix_of(self, other: "Path") -> bool:
        return other.segments[: len(self.segments)] == self.segments


EMPTY_PATH = Path(())
ROOT_PATH = Path(("root",))


def parent(p: Path) -> Path:
    """Drop the final segment.  The empty path has no parent."""
    if not p:
        raise ValueError("parent of the empty path is undefined")
    return Path(p.segments[:-1])


def state_prefix(p: Path) -> Path:
    """The path restricted to state segments: a trailing junction name is
    replaced by the enclosing state."""
    return parent(p) if p.is_junction else p


def lca(paths: list[Path]) -> Path:
    """Longest common ancestor, computed over state segments only."""
    if not paths:
        raise ValueError("lca of an empty path list is undefined")
    if any(not p for p in paths):
        raise ValueError("lca over an empty path is undefined")
    stems = [state_prefix(p).segments for p in paths]
    common = stems[0]
    for segs in stems[1:]:
        limit = min(len(common), len(segs))
        i = 0
        while i < limit and common[i] == segs[i]:
            i += 1
        common = common[:i]
    return Path(common)


def path_diff(target: Path, ancestor: Path) -> Path:
    """The suffix of ``target`` below ``ancestor``.

    ``ancestor`` must be a prefix of ``target``.
    """
    if not ancestor.is_prefix_of(target):
        raise ValueError(f"{ancestor} is not a prefix of {target}")
    return Path(target.segments[len(ancestor.segments):])
