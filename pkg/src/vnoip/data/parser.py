"""Reader and writer for the retweet-path dataset format.

One cascade per line::

    id<TAB>root<TAB>t0<TAB>n<TAB>path_1 path_2 ... path_n

Each path is ``u0/u1/.../uk:t``, the forwarding chain from the root to the
reposting user and the time of the repost relative to publication. The last
two users of a path define one repost edge; a single-user path is the root.
"""
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Tuple, Union

from ..utils.errors import OrderingError, ParseError
from .data_schemas import Cascade, RepostEvent

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _number(text: str, what: str, line_number: int) -> float:
    try:
        return float(text)
    except ValueError as e:
        raise ParseError(f"invalid {what} {text!r}", line_number) from e


def _user(text: str, line_number: int) -> int:
    try:
        return int(text)
    except ValueError as e:
        raise ParseError(f"invalid user id {text!r}", line_number) from e


def _format_number(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def parse_line(line: str, line_number: int = 1) -> Cascade:
    """Parse one dataset line.

    Raises:
        ParseError: On a malformed field or a path count mismatch
        OrderingError: If a repost's parent has not appeared earlier in time
    """
    parts = line.rstrip("\r\n").split("\t")
    if len(parts) != 5:
        raise ParseError(f"expected 5 tab-separated fields, got {len(parts)}", line_number)
    cascade_id, root_text, t0_text, count_text, paths_text = parts
    root = _user(root_text, line_number)
    publish_time = _number(t0_text, "publish time", line_number)
    try:
        declared = int(count_text)
    except ValueError as e:
        raise ParseError(f"invalid path count {count_text!r}", line_number) from e

    raw_paths = paths_text.split()
    if len(raw_paths) != declared:
        raise ParseError(f"declared {declared} paths, found {len(raw_paths)}", line_number)

    parsed: List[Tuple[float, List[int]]] = []
    for raw in raw_paths:
        chain_text, sep, time_text = raw.rpartition(":")
        if not sep or not chain_text:
            raise ParseError(f"path {raw!r} lacks ':time'", line_number)
        chain = [_user(u, line_number) for u in chain_text.split("/")]
        t = _number(time_text, "repost time", line_number)
        if t < 0:
            raise ParseError(f"negative repost time in {raw!r}", line_number)
        if chain[0] != root:
            raise ParseError(f"path {raw!r} does not start at root {root}", line_number)
        parsed.append((t, chain))

    parsed.sort(key=lambda item: item[0])
    seen = {root}
    events: List[RepostEvent] = []
    for t, chain in parsed:
        if len(chain) == 1:
            continue
        parent, child = chain[-2], chain[-1]
        if parent not in seen:
            raise OrderingError(f"parent {parent} of {child} has not appeared by t={t}", line_number)
        seen.add(child)
        events.append(RepostEvent(parent=parent, child=child, time=t))
    return Cascade(cascade_id=cascade_id, root=root, publish_time=publish_time, events=tuple(events))


def parse_dataset(path: PathLike) -> List[Cascade]:
    """Parse every non-blank line of a dataset file, in file order."""
    cascades: List[Cascade] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            cascades.append(parse_line(line, line_number))
    logger.info(f"Parsed {len(cascades)} cascades from {path}")
    return cascades


def format_cascade(cascade: Cascade) -> str:
    """Canonical line for ``cascade``: the root path first, then one path per repost."""
    chains: Dict[int, List[int]] = {cascade.root: [cascade.root]}
    paths = [f"{cascade.root}:0"]
    for event in cascade.events:
        chain = chains[event.parent] + [event.child]
        chains.setdefault(event.child, chain)
        paths.append(f"{'/'.join(str(u) for u in chain)}:{_format_number(event.time)}")
    return "\t".join([
        cascade.cascade_id, str(cascade.root), _format_number(cascade.publish_time),
        str(len(paths)), " ".join(paths),
    ])


def write_dataset(cascades: Iterable[Cascade], path: PathLike) -> int:
    """Write cascades in the canonical format; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for cascade in cascades:
            f.write(format_cascade(cascade) + "\n")
            count += 1
    logger.info(f"Wrote {count} cascades to {path}")
    return count
