"""Reader-side backend: tag records looked up by either pseudonym tuple.

One JSON file per store, one object per row, every word in canonical
24-hex form.  JSON was chosen for diffability in tests; writes go through
a temp file and rename so a crash never leaves a torn store behind.

Single writer, any number of readers; the simulator serializes commits.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass

from .word96 import Word96, from_hex, to_hex

log = logging.getLogger(__name__)

STORE_FORMAT = "rfid-tagstore/1"

MATCH_NEXT = "next"
MATCH_OLD = "old"

_WORD_FIELDS = ("id", "ids", "k1", "k2", "ids_old", "k1_old", "k2_old")


@dataclass
class TagRecordRow:
    """Backend mirror of one tag: static id plus next and old tuples."""

    tag_label: str
    variant: str
    id: Word96
    ids: Word96
    k1: Word96
    k2: Word96
    ids_old: Word96
    k1_old: Word96
    k2_old: Word96


class Store:
    """In-memory row set with lookup by either IDS and JSON persistence."""

    def __init__(self) -> None:
        self.rows: dict[str, TagRecordRow] = {}

    def add(self, row: TagRecordRow) -> None:
        if row.tag_label in self.rows:
            raise ValueError(f"duplicate tag label: {row.tag_label}")
        self.rows[row.tag_label] = row

    def lookup(self, ids: Word96, variant: str) -> tuple[TagRecordRow, str] | None:
        """Find the row announcing ``ids``: next tuples first, then old ones.

        Returns (row, which-tuple-matched) or None.  Cross-tag IDS
        collisions (possible only in contrived setups) resolve to the
        first row in tag_label order, with a warning.
        """
        next_hits = []
        old_hits = []
        for label in sorted(self.rows):
            row = self.rows[label]
            if row.variant != variant:
                continue
            if row.ids == ids:
                next_hits.append(row)
            elif row.ids_old == ids:
                old_hits.append(row)
        if len(next_hits) + len(old_hits) > 1:
            log.warning("IDS %s matches %d rows; using first by label",
                        to_hex(ids), len(next_hits) + len(old_hits))
        if next_hits:
            return next_hits[0], MATCH_NEXT
        if old_hits:
            return old_hits[0], MATCH_OLD
        return None

    def commit(self, tag_label: str, staged: tuple[Word96, Word96, Word96],
               used: str = MATCH_NEXT) -> None:
        """Install the staged tuple after tag authentication succeeded.

        The tuple the session actually ran on becomes the old tuple; for
        the normal next-side session that means next moves to old.
        """
        row = self.rows[tag_label]
        if used == MATCH_NEXT:
            row.ids_old, row.k1_old, row.k2_old = row.ids, row.k1, row.k2
        row.ids, row.k1, row.k2 = staged

    def save(self, path: str) -> None:
        """Write the whole store; atomic via write-then-rename."""
        payload = {
            "format": STORE_FORMAT,
            "rows": [_row_to_dict(self.rows[label]) for label in sorted(self.rows)],
        }
        tmp = f"{path}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str) -> "Store":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != STORE_FORMAT:
            raise ValueError(f"{path}: not a {STORE_FORMAT} file")
        store = cls()
        for entry in payload["rows"]:
            store.add(_row_from_dict(entry))
        return store


def _row_to_dict(row: TagRecordRow) -> dict:
    data = asdict(row)
    for field in _WORD_FIELDS:
        data[field] = to_hex(data[field])
    return data


def _row_from_dict(data: dict) -> TagRecordRow:
    kwargs = dict(data)
    for field in _WORD_FIELDS:
        kwargs[field] = from_hex(kwargs[field])
    return TagRecordRow(**kwargs)
