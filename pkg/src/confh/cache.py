"""On-disk cache of per-weight Betti rows.

One file per (algebra fingerprint, weight)::

    confh-cache v1
    algebra <sha256>
    weight <n>
    <degree> <dim>
    ...
    end

Writes go to a temporary file in the same directory and are moved into
place with ``os.replace``, so readers never see a partial file.  Anything
that does not parse exactly is reported as corruption rather than ignored.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

from .lie import LieAlgebra

SCHEMA = "confh-cache v1"


class CacheCorrupt(RuntimeError):
    pass


class ResultCache:
    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)

    def path(self, g: LieAlgebra, n: int) -> Path:
        return self.directory / f"{g.fingerprint()[:32]}-w{n}.txt"

    def load(self, g: LieAlgebra, n: int) -> dict[int, int] | None:
        p = self.path(g, n)
        try:
            text = p.read_text(encoding="utf-8")
        except FileNotFoundError:
            return None
        except OSError as exc:
            raise CacheCorrupt(f"{p}: unreadable ({exc})") from exc
        return self._parse(text, g.fingerprint(), n, p)

    @staticmethod
    def _parse(text: str, fingerprint: str, n: int, p: Path) -> dict[int, int]:
        lines = text.split("\n")
        if not text.endswith("\n") or len(lines) < 5:
            raise CacheCorrupt(f"{p}: truncated")
        lines = lines[:-1]
        if lines[0] != SCHEMA:
            raise CacheCorrupt(f"{p}: unknown schema line {lines[0]!r}")
        if lines[1] != f"algebra {fingerprint}":
            raise CacheCorrupt(f"{p}: algebra hash mismatch")
        if lines[2] != f"weight {n}":
            raise CacheCorrupt(f"{p}: weight mismatch")
        if lines[-1] != "end":
            raise CacheCorrupt(f"{p}: missing end marker")
        row: dict[int, int] = {}
        for line in lines[3:-1]:
            parts = line.split(" ")
            try:
                i, dim = int(parts[0]), int(parts[1])
                if len(parts) != 2 or i < 0 or dim < 0 or i in row:
                    raise ValueError
            except (ValueError, IndexError):
                raise CacheCorrupt(f"{p}: bad entry {line!r}") from None
            row[i] = dim
        return row

    def store(self, g: LieAlgebra, n: int, row: dict[int, int]) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        body = [SCHEMA, f"algebra {g.fingerprint()}", f"weight {n}"]
        body += [f"{i} {row[i]}" for i in sorted(row)]
        body.append("end")
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".tmp-", suffix=".txt")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write("\n".join(body) + "\n")
            os.replace(tmp, self.path(g, n))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
