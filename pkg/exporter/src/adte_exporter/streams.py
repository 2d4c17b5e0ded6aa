"""Incremental writers for the adte logit-stream formats.

Implemented against the published byte layouts rather than the engine's
own writer code, so an export doubles as a cross-implementation
conformance check. Both writers quantize logits to float32 and flush
after every record: an interrupted export stays valid up to the last
complete record (JSONL truncates at a line boundary; a binary reader
reports the incomplete trailing record and keeps everything before it).

JSONL: one header object line `{"format": "adte-logits", "version": 1,
"num_classes": L, "class_names": [...]}` (names optional), then one
`{"id": ..., "label": int|null, "logits": [[...]]}` object per record.

Binary (little-endian): magic `ADTE`, u32 version=1, u32 num_classes,
u32 name-block length plus UTF-8 names joined by newlines, then per
record u32 id length, UTF-8 id, i32 label (-1 when absent), u32 view
count, and view*class float32 logits row-major.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .job import ExportError

FORMAT_TAG = "adte-logits"
FORMAT_VERSION = 1
MAGIC = b"ADTE"


class _WriterBase:
    def __init__(self, path: str, num_classes: int, class_names=None):
        if class_names is not None and len(class_names) != num_classes:
            raise ExportError("class_names length must equal num_classes")
        self.num_classes = num_classes
        self.class_names = None if class_names is None else \
            tuple(str(n) for n in class_names)
        self.records_written = 0
        self._fh = None
        self._path = path

    def _rows(self, logits) -> np.ndarray:
        rows = np.asarray(logits, dtype=np.float32)
        if rows.ndim != 2 or rows.shape[0] < 1 \
                or rows.shape[1] != self.num_classes:
            raise ExportError(
                f"logits must be (n_views, {self.num_classes}), "
                f"got {rows.shape}")
        return rows

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


class JsonlStreamWriter(_WriterBase):
    def __init__(self, path, num_classes, class_names=None):
        super().__init__(path, num_classes, class_names)
        self._fh = open(path, "w", encoding="utf-8")
        header = {"format": FORMAT_TAG, "version": FORMAT_VERSION,
                  "num_classes": num_classes}
        if self.class_names is not None:
            header["class_names"] = list(self.class_names)
        self._fh.write(json.dumps(header) + "\n")
        self._fh.flush()

    def emit(self, record_id: str, label: int | None, logits) -> None:
        rows = self._rows(logits)
        payload = ",".join(
            "[" + ",".join(repr(float(v)) for v in row) + "]"
            for row in rows)
        self._fh.write(f'{{"id":{json.dumps(record_id)},'
                       f'"label":{"null" if label is None else int(label)},'
                       f'"logits":[{payload}]}}\n')
        self._fh.flush()
        self.records_written += 1


class BinaryStreamWriter(_WriterBase):
    def __init__(self, path, num_classes, class_names=None):
        super().__init__(path, num_classes, class_names)
        self._fh = open(path, "wb")
        names = b"" if self.class_names is None else \
            "\n".join(self.class_names).encode("utf-8")
        self._fh.write(MAGIC)
        self._fh.write(struct.pack("<II", FORMAT_VERSION, num_classes))
        self._fh.write(struct.pack("<I", len(names)) + names)
        self._fh.flush()

    def emit(self, record_id: str, label: int | None, logits) -> None:
        rows = self._rows(logits)
        name = record_id.encode("utf-8")
        self._fh.write(struct.pack("<I", len(name)) + name)
        self._fh.write(struct.pack("<i", -1 if label is None else int(label)))
        self._fh.write(struct.pack("<I", rows.shape[0]))
        self._fh.write(rows.astype("<f4").tobytes())
        self._fh.flush()
        self.records_written += 1


def open_writer(fmt: str, path: str, num_classes: int, class_names=None):
    cls = {"jsonl": JsonlStreamWriter, "bin": BinaryStreamWriter}.get(fmt)
    if cls is None:
        raise ExportError(f"unknown stream format {fmt!r}")
    return cls(path, num_classes, class_names)
