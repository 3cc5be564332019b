"""Model artifact files.

Two interchangeable encodings of the same content (vocabularies, sparse
lexical table, jump table, schedule, log-likelihood trace):

* JSON: human-readable, fine for small models.  The lexical table is stored
  as (e_id, f_id, prob) triplets against two sorted symbol arrays that are
  written alongside, so the file is self-contained even for models without
  attached vocabularies.

* binary: for large tables.  Little-endian throughout.  Layout:

      magic  b"RALM"
      version  uint8 (currently 1)
      epsilon  float64
      window   int32
      schedule   uint32 stage count, then per stage int32 window, int32 iters
      trace      uint32 count, then float64 values
      source_vocab   uint8 presence flag, then the vocab block if present
      target_vocab   same
      target_symbols uint32 count, then length-prefixed utf-8 strings
      source_symbols same
      lexical    uint64 triplet count, then per triplet uint32 e_id,
                 uint32 f_id, float64 prob (sorted by e_id, f_id)
      jump       uint32 count, then per entry int32 offset, float64 prob

  A vocab block is: uint32 symbol count, per symbol a length-prefixed utf-8
  string and a uint64 corpus count, then uint32 min_count.

``load_model`` sniffs the magic bytes and dispatches.
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path

from .corpus import Vocabulary
from .hmm_ibm1 import AlignmentModel, TrainSchedule
from .io_utils import atomic_write_bytes, atomic_write_text

MAGIC = b"RALM"
VERSION = 1


class ModelFormatError(ValueError):
    """The file is not a readable model artifact."""


def _symbol_arrays(model: AlignmentModel) -> tuple[list[str], list[str]]:
    target_symbols = sorted(model.lexical)
    source_symbols = sorted({f for row in model.lexical.values() for f in row})
    return target_symbols, source_symbols


def _triplets(
    model: AlignmentModel, target_symbols: list[str], source_symbols: list[str]
) -> list[tuple[int, int, float]]:
    e_ids = {s: i for i, s in enumerate(target_symbols)}
    f_ids = {s: i for i, s in enumerate(source_symbols)}
    out = []
    for e in target_symbols:
        row = model.lexical[e]
        for f in sorted(row):
            out.append((e_ids[e], f_ids[f], row[f]))
    return out


def _vocab_payload(vocab: Vocabulary | None) -> dict | None:
    if vocab is None:
        return None
    return {
        "symbols": list(vocab.symbols),
        "counts": [int(vocab.counts[s]) for s in vocab.symbols],
        "min_count": vocab.min_count,
    }


def _vocab_from_payload(payload: dict | None) -> Vocabulary | None:
    if payload is None:
        return None
    symbols = tuple(payload["symbols"])
    counts = {s: int(c) for s, c in zip(symbols, payload["counts"])}
    return Vocabulary(symbols=symbols, counts=counts, min_count=int(payload["min_count"]))


def save_model_json(model: AlignmentModel, path: str | Path) -> None:
    target_symbols, source_symbols = _symbol_arrays(model)
    payload = {
        "format": "recipealign-model",
        "version": VERSION,
        "epsilon": model.epsilon,
        "window": model.window,
        "schedule": [list(stage) for stage in model.schedule.stages]
        if model.schedule
        else None,
        "loglik_trace": list(model.loglik_trace),
        "source_vocab": _vocab_payload(model.source_vocab),
        "target_vocab": _vocab_payload(model.target_vocab),
        "target_symbols": target_symbols,
        "source_symbols": source_symbols,
        "lexical": [[e, f, p] for e, f, p in _triplets(model, target_symbols, source_symbols)],
        "jump": [[d, model.jump[d]] for d in sorted(model.jump)],
    }
    atomic_write_text(path, json.dumps(payload, sort_keys=True) + "\n")


def load_model_json(path: str | Path) -> AlignmentModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not a JSON model artifact: {exc.msg}") from None
    if payload.get("format") != "recipealign-model":
        raise ModelFormatError("missing model format marker")
    if payload.get("version") != VERSION:
        raise ModelFormatError(f"unsupported model version {payload.get('version')!r}")
    target_symbols = payload["target_symbols"]
    source_symbols = payload["source_symbols"]
    lexical: dict[str, dict[str, float]] = {}
    for e_id, f_id, prob in payload["lexical"]:
        lexical.setdefault(target_symbols[e_id], {})[source_symbols[f_id]] = float(prob)
    schedule = (
        TrainSchedule(stages=tuple((int(w), int(i)) for w, i in payload["schedule"]))
        if payload.get("schedule")
        else None
    )
    return AlignmentModel(
        lexical=lexical,
        jump={int(d): float(p) for d, p in payload["jump"]},
        window=int(payload["window"]),
        epsilon=float(payload["epsilon"]),
        source_vocab=_vocab_from_payload(payload.get("source_vocab")),
        target_vocab=_vocab_from_payload(payload.get("target_vocab")),
        schedule=schedule,
        loglik_trace=tuple(float(x) for x in payload["loglik_trace"]),
    )


# ---------------------------------------------------------------------------
# binary variant
# ---------------------------------------------------------------------------


def _write_str(buf: io.BytesIO, s: str) -> None:
    raw = s.encode("utf-8")
    buf.write(struct.pack("<I", len(raw)))
    buf.write(raw)


def _read_str(buf: io.BytesIO) -> str:
    (length,) = struct.unpack("<I", buf.read(4))
    return buf.read(length).decode("utf-8")


def _write_vocab(buf: io.BytesIO, vocab: Vocabulary | None) -> None:
    if vocab is None:
        buf.write(struct.pack("<B", 0))
        return
    buf.write(struct.pack("<B", 1))
    buf.write(struct.pack("<I", len(vocab.symbols)))
    for symbol in vocab.symbols:
        _write_str(buf, symbol)
        buf.write(struct.pack("<Q", int(vocab.counts[symbol])))
    buf.write(struct.pack("<I", vocab.min_count))


def _read_vocab(buf: io.BytesIO) -> Vocabulary | None:
    (flag,) = struct.unpack("<B", buf.read(1))
    if flag == 0:
        return None
    (count,) = struct.unpack("<I", buf.read(4))
    symbols = []
    counts = {}
    for _ in range(count):
        symbol = _read_str(buf)
        (c,) = struct.unpack("<Q", buf.read(8))
        symbols.append(symbol)
        counts[symbol] = c
    (min_count,) = struct.unpack("<I", buf.read(4))
    return Vocabulary(symbols=tuple(symbols), counts=counts, min_count=min_count)


def save_model_binary(model: AlignmentModel, path: str | Path) -> None:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<B", VERSION))
    buf.write(struct.pack("<d", model.epsilon))
    buf.write(struct.pack("<i", model.window))
    stages = model.schedule.stages if model.schedule else ()
    buf.write(struct.pack("<I", len(stages)))
    for window, iters in stages:
        buf.write(struct.pack("<ii", window, iters))
    buf.write(struct.pack("<I", len(model.loglik_trace)))
    for value in model.loglik_trace:
        buf.write(struct.pack("<d", value))
    _write_vocab(buf, model.source_vocab)
    _write_vocab(buf, model.target_vocab)
    target_symbols, source_symbols = _symbol_arrays(model)
    for symbols in (target_symbols, source_symbols):
        buf.write(struct.pack("<I", len(symbols)))
        for symbol in symbols:
            _write_str(buf, symbol)
    triplets = _triplets(model, target_symbols, source_symbols)
    buf.write(struct.pack("<Q", len(triplets)))
    for e_id, f_id, prob in triplets:
        buf.write(struct.pack("<IId", e_id, f_id, prob))
    buf.write(struct.pack("<I", len(model.jump)))
    for offset in sorted(model.jump):
        buf.write(struct.pack("<id", offset, model.jump[offset]))
    atomic_write_bytes(path, buf.getvalue())


def load_model_binary(path: str | Path) -> AlignmentModel:
    buf = io.BytesIO(Path(path).read_bytes())
    if buf.read(4) != MAGIC:
        raise ModelFormatError("bad magic bytes")
    (version,) = struct.unpack("<B", buf.read(1))
    if version != VERSION:
        raise ModelFormatError(f"unsupported model version {version}")
    (epsilon,) = struct.unpack("<d", buf.read(8))
    (window,) = struct.unpack("<i", buf.read(4))
    (n_stages,) = struct.unpack("<I", buf.read(4))
    stages = tuple(struct.unpack("<ii", buf.read(8)) for _ in range(n_stages))
    (n_trace,) = struct.unpack("<I", buf.read(4))
    trace = tuple(struct.unpack("<d", buf.read(8))[0] for _ in range(n_trace))
    source_vocab = _read_vocab(buf)
    target_vocab = _read_vocab(buf)
    arrays: list[list[str]] = []
    for _ in range(2):
        (count,) = struct.unpack("<I", buf.read(4))
        arrays.append([_read_str(buf) for _ in range(count)])
    target_symbols, source_symbols = arrays
    (n_triplets,) = struct.unpack("<Q", buf.read(8))
    lexical: dict[str, dict[str, float]] = {}
    for _ in range(n_triplets):
        e_id, f_id, prob = struct.unpack("<IId", buf.read(16))
        lexical.setdefault(target_symbols[e_id], {})[source_symbols[f_id]] = prob
    (n_jump,) = struct.unpack("<I", buf.read(4))
    jump = {}
    for _ in range(n_jump):
        offset, prob = struct.unpack("<id", buf.read(12))
        jump[offset] = prob
    return AlignmentModel(
        lexical=lexical,
        jump=jump,
        window=window,
        epsilon=epsilon,
        source_vocab=source_vocab,
        target_vocab=target_vocab,
        schedule=TrainSchedule(stages=stages) if stages else None,
        loglik_trace=trace,
    )


def save_model(model: AlignmentModel, path: str | Path, fmt: str = "json") -> None:
    if fmt == "json":
        save_model_json(model, path)
    elif fmt == "binary":
        save_model_binary(model, path)
    else:
        raise ValueError(f"unknown model format {fmt!r}")


def load_model(path: str | Path) -> AlignmentModel:
    with open(path, "rb") as handle:
        head = handle.read(4)
    if head == MAGIC:
        return load_model_binary(path)
    return load_model_json(path)
