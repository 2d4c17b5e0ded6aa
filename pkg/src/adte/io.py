"""Stream, report, and configuration file formats.

Two stream encodings carry the same payload:

* JSONL: a header line ``{"format": "adte-logits", "version": 1,
  "num_classes": L}`` (plus optional ``"class_names"``) followed by one
  object per line ``{"id": str, "label": int | null, "logits": [[...]]}``
  with floats rendered at 17 significant digits.
* Binary: magic ``ADTE``, then little-endian u32 version (= 1), u32 L,
  u32 name-block length and that many bytes of newline-separated UTF-8
  class names; then per record u32 id length, the id bytes, i32 label
  (-1 = absent), u32 N, and N*L float32 logits row-major.

Logits quantize to float32 on write in both encodings, so the two decode
to bit-identical records. Readers are lazy single-pass generators whose
peak memory is one record. Reports serialize to a three-section CSV
(summary key/value rows, a per-class table, bucket rows) and configs load
from a strict JSON object (unknown keys rejected).
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, fields

import numpy as np

from .errors import (
    InvalidConfigError,
    InvalidInputError,
    StreamFormatError,
    UnsupportedFormatError,
)
from .metrics import BucketStats, Report
from .pipeline import AdaptConfig, InstanceRecord

FORMAT_TAG = "adte-logits"
FORMAT_VERSION = 1
MAGIC = b"ADTE"

_HEADER_KEYS = {"format", "version", "num_classes", "class_names"}
_RECORD_KEYS = {"id", "label", "logits"}


@dataclass(frozen=True)
class StreamHeader:
    """Identity and class layout shared by every record of a stream."""
    num_classes: int
    class_names: tuple[str, ...] | None = None
    format_tag: str = FORMAT_TAG
    version: int = FORMAT_VERSION

    def __post_init__(self):
        if self.format_tag != FORMAT_TAG:
            raise UnsupportedFormatError(
                f"unknown stream format {self.format_tag!r}")
        if self.version != FORMAT_VERSION:
            raise UnsupportedFormatError(
                f"unsupported stream version {self.version!r}")
        if not (isinstance(self.num_classes, int) and self.num_classes >= 2):
            raise InvalidInputError("num_classes must be an integer >= 2")
        if self.class_names is not None:
            names = tuple(str(n) for n in self.class_names)
            if len(names) != self.num_classes:
                raise InvalidInputError(
                    f"expected {self.num_classes} class names, "
                    f"got {len(names)}")
            if any("\n" in n for n in names):
                raise InvalidInputError("class names must not contain newlines")
            object.__setattr__(self, "class_names", names)


def _open(source, mode: str):
    """Return (handle, owned); `owned` handles are closed by this module."""
    if isinstance(source, (str, os.PathLike)):
        kwargs = {} if "b" in mode else {"encoding": "utf-8"}
        return open(source, mode, **kwargs), True
    return source, False


def _f17(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# JSONL encoding


def _jsonl_header_line(header: StreamHeader) -> str:
    payload = {"format": header.format_tag, "version": header.version,
               "num_classes": header.num_classes}
    if header.class_names is not None:
        payload["class_names"] = list(header.class_names)
    return json.dumps(payload, separators=(",", ":")) + "\n"


def _jsonl_record_line(rec: InstanceRecord, num_classes: int) -> str:
    if rec.num_classes != num_classes:
        raise InvalidInputError(
            f"record {rec.id!r} has {rec.num_classes} classes, "
            f"stream header says {num_classes}")
    quantized = np.asarray(rec.logits, dtype=np.float32)
    rows = ",".join(
        "[" + ",".join(_f17(v) for v in row) + "]" for row in quantized)
    label = "null" if rec.label is None else str(int(rec.label))
    return (f'{{"id":{json.dumps(rec.id)},"label":{label},'
            f'"logits":[{rows}]}}\n')


def write_stream_jsonl(destination, header: StreamHeader, records) -> int:
    """Write a JSONL stream; returns the number of records written."""
    fh, owned = _open(destination, "w")
    try:
        fh.write(_jsonl_header_line(header))
        count = 0
        for rec in records:
            fh.write(_jsonl_record_line(rec, header.num_classes))
            count += 1
        return count
    finally:
        if owned:
            fh.close()


def _parse_jsonl_header(line: str) -> StreamHeader:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise StreamFormatError(f"header is not valid JSON ({exc.msg})",
                                line=1) from exc
    if not isinstance(obj, dict):
        raise StreamFormatError("header must be a JSON object", line=1)
    unknown = set(obj) - _HEADER_KEYS
    if unknown:
        raise StreamFormatError(
            f"unknown header key(s): {sorted(unknown)}", line=1)
    for key in ("format", "version", "num_classes"):
        if key not in obj:
            raise StreamFormatError(f"header is missing {key!r}", line=1)
    names = obj.get("class_names")
    if names is not None and (
            not isinstance(names, list)
            or any(not isinstance(n, str) for n in names)):
        raise StreamFormatError("class_names must be a list of strings",
                                line=1)
    try:
        return StreamHeader(
            num_classes=obj["num_classes"],
            class_names=tuple(names) if names is not None else None,
            format_tag=obj["format"], version=obj["version"])
    except UnsupportedFormatError:
        raise
    except InvalidInputError as exc:
        raise StreamFormatError(str(exc), line=1) from exc


def _parse_jsonl_record(line: str, num_classes: int,
                        line_no: int) -> InstanceRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise StreamFormatError(f"record is not valid JSON ({exc.msg})",
                                line=line_no) from exc
    if not isinstance(obj, dict) or set(obj) != _RECORD_KEYS:
        raise StreamFormatError(
            'record must be an object with exactly the keys '
            '"id", "label", "logits"', line=line_no)
    if not isinstance(obj["id"], str):
        raise StreamFormatError("id must be a string", line=line_no)
    label = obj["label"]
    if label is not None and (isinstance(label, bool)
                              or not isinstance(label, int)):
        raise StreamFormatError("label must be an integer or null",
                                line=line_no)
    logits = obj["logits"]
    if (not isinstance(logits, list) or not logits
            or any(not isinstance(row, list) for row in logits)):
        raise StreamFormatError("logits must be a non-empty list of rows",
                                line=line_no)
    for row in logits:
        if len(row) != num_classes:
            raise StreamFormatError(
                f"logit row has {len(row)} entries, header says "
                f"{num_classes}", line=line_no)
        if any(isinstance(v, bool) or not isinstance(v, (int, float))
               for v in row):
            raise StreamFormatError("logits must be numbers", line=line_no)
    try:
        return InstanceRecord(
            id=obj["id"],
            logits=np.array(logits, dtype=np.float64),
            label=label)
    except InvalidInputError as exc:
        raise StreamFormatError(str(exc), line=line_no) from exc


def read_stream_jsonl(source):
    """Open a JSONL stream; returns (header, lazy record generator)."""
    fh, owned = _open(source, "r")
    try:
        first = fh.readline()
        if not first:
            raise StreamFormatError("empty stream, expected a header object",
                                    line=1)
        header = _parse_jsonl_header(first)
    except BaseException:
        if owned:
            fh.close()
        raise

    def records():
        try:
            line_no = 1
            for line in fh:
                line_no += 1
                if line.strip() == "":
                    raise StreamFormatError("blank line inside stream",
                                            line=line_no)
                yield _parse_jsonl_record(line, header.num_classes, line_no)
        finally:
            if owned:
                fh.close()

    return header, records()


# ---------------------------------------------------------------------------
# Binary encoding


def write_stream_binary(destination, header: StreamHeader, records) -> int:
    """Write a binary stream; returns the number of records written."""
    fh, owned = _open(destination, "wb")
    try:
        name_block = b"" if header.class_names is None else \
            "\n".join(header.class_names).encode("utf-8")
        fh.write(MAGIC)
        fh.write(struct.pack("<III", header.version, header.num_classes,
                             len(name_block)))
        fh.write(name_block)
        count = 0
        for rec in records:
            if rec.num_classes != header.num_classes:
                raise InvalidInputError(
                    f"record {rec.id!r} has {rec.num_classes} classes, "
                    f"stream header says {header.num_classes}")
            id_bytes = rec.id.encode("utf-8")
            label = -1 if rec.label is None else int(rec.label)
            fh.write(struct.pack("<I", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(struct.pack("<iI", label, rec.n_views))
            quantized = np.ascontiguousarray(rec.logits, dtype="<f4")
            fh.write(quantized.tobytes())
            count += 1
        return count
    finally:
        if owned:
            fh.close()


class _ByteReader:
    """Tracks the byte offset so truncation errors can name it."""

    def __init__(self, fh):
        self.fh = fh
        self.offset = 0

    def exactly(self, n: int, what: str) -> bytes:
        at = self.offset
        buf = self.fh.read(n)
        self.offset += len(buf)
        if len(buf) != n:
            raise StreamFormatError(
                f"truncated stream: expected {n} bytes of {what}, "
                f"got {len(buf)}", offset=at)
        return buf

    def maybe_u32(self, what: str) -> int | None:
        """A u32, or None at a clean end-of-file boundary."""
        at = self.offset
        buf = self.fh.read(4)
        self.offset += len(buf)
        if not buf:
            return None
        if len(buf) != 4:
            raise StreamFormatError(
                f"truncated stream: expected 4 bytes of {what}, "
                f"got {len(buf)}", offset=at)
        return struct.unpack("<I", buf)[0]


def read_stream_binary(source):
    """Open a binary stream; returns (header, lazy record generator)."""
    fh, owned = _open(source, "rb")
    reader = _ByteReader(fh)
    try:
        magic = fh.read(4)
        reader.offset += len(magic)
        if magic != MAGIC:
            raise UnsupportedFormatError(f"bad magic {magic!r}, "
                                         f"expected {MAGIC!r}")
        version, num_classes, name_len = struct.unpack(
            "<III", reader.exactly(12, "header"))
        if version != FORMAT_VERSION:
            raise UnsupportedFormatError(
                f"unsupported stream version {version}")
        names: tuple[str, ...] | None = None
        if name_len:
            names = tuple(
                reader.exactly(name_len, "class names")
                .decode("utf-8").split("\n"))
        try:
            header = StreamHeader(num_classes=num_classes, class_names=names)
        except InvalidInputError as exc:
            raise StreamFormatError(str(exc), offset=0) from exc
    except BaseException:
        if owned:
            fh.close()
        raise

    def records():
        try:
            while True:
                start = reader.offset
                id_len = reader.maybe_u32("record id length")
                if id_len is None:
                    return
                rec_id = reader.exactly(id_len, "record id").decode("utf-8")
                label, n_views = struct.unpack(
                    "<iI", reader.exactly(8, "label and view count"))
                if n_views == 0:
                    raise StreamFormatError("record has zero views",
                                            offset=start)
                payload = reader.exactly(
                    4 * n_views * header.num_classes, "logit payload")
                logits = np.frombuffer(payload, dtype="<f4").reshape(
                    n_views, header.num_classes).astype(np.float64)
                try:
                    yield InstanceRecord(
                        id=rec_id, logits=logits,
                        label=None if label == -1 else label)
                except InvalidInputError as exc:
                    raise StreamFormatError(str(exc), offset=start) from exc
        finally:
            if owned:
                fh.close()

    return header, records()


def read_stream(source, fmt: str):
    """Dispatch to the `jsonl` or `bin` reader by format name."""
    if fmt == "jsonl":
        return read_stream_jsonl(source)
    if fmt == "bin":
        return read_stream_binary(source)
    raise InvalidConfigError(f"unknown stream format {fmt!r}")


def write_stream(destination, header: StreamHeader, records, fmt: str) -> int:
    """Dispatch to the `jsonl` or `bin` writer by format name."""
    if fmt == "jsonl":
        return write_stream_jsonl(destination, header, records)
    if fmt == "bin":
        return write_stream_binary(destination, header, records)
    raise InvalidConfigError(f"unknown stream format {fmt!r}")


# ---------------------------------------------------------------------------
# Report CSV


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_report_csv(report: Report, destination) -> None:
    """Serialize a report to CSV in three fixed sections.

    1. `key,value` summary rows: instances, accuracy (empty when
       unlabeled), config.* echo rows, then mean_tcr_K rows;
    2. a per-class table `class,count,correct,mean_confidence,mean_entropy`;
    3. bucket rows `bucket,rank_lo,rank_hi,count,accuracy,mean_confidence,
       mean_entropy`.

    Floats are written with `repr` (shortest exact round trip).
    """
    fh, owned = _open(destination, "w")
    try:
        fh.write("key,value\n")
        fh.write(f"instances,{report.instances}\n")
        fh.write(f"accuracy,{_csv_value(report.accuracy)}\n")
        if report.config_echo is not None:
            for f in fields(report.config_echo):
                fh.write(f"config.{f.name},"
                         f"{_csv_value(getattr(report.config_echo, f.name))}\n")
        for k in sorted(report.mean_tcr):
            fh.write(f"mean_tcr_{k},{_csv_value(report.mean_tcr[k])}\n")
        fh.write("class,count,correct,mean_confidence,mean_entropy\n")
        for c in range(report.num_classes):
            fh.write(",".join([
                str(c),
                str(int(report.per_class_count[c])),
                str(int(report.per_class_correct[c])),
                repr(float(report.per_class_mean_confidence[c])),
                repr(float(report.per_class_mean_entropy[c])),
            ]) + "\n")
        fh.write("bucket,rank_lo,rank_hi,count,accuracy,"
                 "mean_confidence,mean_entropy\n")
        for i, b in enumerate(report.bucket_summary):
            fh.write(",".join([
                str(i), str(b.rank_lo), str(b.rank_hi), str(b.count),
                _csv_value(b.accuracy), _csv_value(b.mean_confidence),
                _csv_value(b.mean_entropy),
            ]) + "\n")
    finally:
        if owned:
            fh.close()


def read_report_csv(source):
    """Parse a report CSV back into (summary dict, class rows, bucket rows).

    Values come back as str in the summary and float in the tables (None
    for empties); the inverse of `write_report_csv` up to types.
    """
    fh, owned = _open(source, "r")
    try:
        lines = [ln.rstrip("\n") for ln in fh]
    finally:
        if owned:
            fh.close()
    if not lines or lines[0] != "key,value":
        raise StreamFormatError("not a report CSV: missing key,value header",
                                line=1)
    try:
        class_at = lines.index("class,count,correct,mean_confidence,"
                               "mean_entropy")
        bucket_at = lines.index("bucket,rank_lo,rank_hi,count,accuracy,"
                                "mean_confidence,mean_entropy")
    except ValueError as exc:
        raise StreamFormatError("not a report CSV: missing a section header"
                                ) from exc

    def num(s: str):
        return None if s == "" else float(s)

    summary = {}
    for ln in lines[1:class_at]:
        key, _, value = ln.partition(",")
        summary[key] = value
    classes = [[num(v) for v in ln.split(",")]
               for ln in lines[class_at + 1:bucket_at]]
    buckets = [[num(v) for v in ln.split(",")]
               for ln in lines[bucket_at + 1:] if ln]
    return summary, classes, buckets


# ---------------------------------------------------------------------------
# Configuration


_CONFIG_FIELDS = {f.name: f for f in fields(AdaptConfig)}
_BOOL_FIELDS = {"use_logit_adjustment", "invert_q_mapping"}
_INT_FIELDS = {"n_views", "bank_capacity", "jacobi_max_iter",
               "bias_refresh_period"}
_FLOAT_FIELDS = {"filter_ratio", "jacobi_eps", "q_alpha", "q_beta",
                 "tsallis_q"}


def load_config(source) -> AdaptConfig:
    """Build an AdaptConfig from a JSON object; unknown keys rejected.

    `source` may be a path, an open text handle, or a JSON string.
    Missing keys take the package defaults; every value is type- and
    range-checked with the offending key named in the error.
    """
    if isinstance(source, str) and source.lstrip()[:1] in ("{", "["):
        text = source
    else:
        fh, owned = _open(source, "r")
        try:
            text = fh.read()
        finally:
            if owned:
                fh.close()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfigError(f"config is not valid JSON: {exc.msg}"
                                 ) from exc
    if not isinstance(data, dict):
        raise InvalidConfigError("config must be a JSON object")
    unknown = sorted(set(data) - set(_CONFIG_FIELDS))
    if unknown:
        raise InvalidConfigError(f"unknown config key(s): {unknown}")
    cleaned = {}
    for key, value in data.items():
        if key in _BOOL_FIELDS:
            if not isinstance(value, bool):
                raise InvalidConfigError(f"{key}: must be true or false")
        elif isinstance(value, bool):
            raise InvalidConfigError(f"{key}: must not be a boolean")
        elif key in _INT_FIELDS:
            if not isinstance(value, int):
                raise InvalidConfigError(f"{key}: must be an integer")
        elif key in _FLOAT_FIELDS:
            if not isinstance(value, (int, float)):
                raise InvalidConfigError(f"{key}: must be a number")
            value = float(value)
        elif key == "measure" and not isinstance(value, str):
            raise InvalidConfigError("measure: must be a string")
        cleaned[key] = value
    return AdaptConfig(**cleaned)
