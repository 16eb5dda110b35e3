"""Token counting for model profiles: loadable BPE tables or the char heuristic.

No encoder tables are bundled; the character heuristic (default 4 chars per
token, rounded up so budget estimates stay upper bounds) is the
always-available fallback. BPE tables live in plain files:

    <encoding>.merges.txt   one merge per line, "<left>\\t<right>", rank = line
                            order; newline, tab, and backslash inside a token
                            are written \\n, \\t, \\\\; blank lines are skipped
    <encoding>.vocab.json   JSON object mapping token string -> integer id

Put both in a directory and pass it to TokenCounter (or set the
CTXBUDGET_BPE_DIR environment variable). Counting semantics: start from
single characters, repeatedly merge all occurrences of the lowest-ranked
adjacent pair (leftmost first), stop when no ranked pair remains; the count
is the number of remaining symbols. Characters absent from the vocabulary
stay unmerged and count one token each.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .registry import ModelProfile

BPE_DIR_ENV = "CTXBUDGET_BPE_DIR"
DEFAULT_CHARS_PER_TOKEN = 4.0


class TokenizerError(ValueError):
    pass


class TableFormatError(TokenizerError):
    """A BPE table file is malformed."""


class TableNotLoadedError(TokenizerError):
    """A profile selects BPE but no table is loaded for its encoding."""


@dataclass(frozen=True)
class BpeTable:
    name: str
    merges: tuple[tuple[str, str], ...]
    vocab: dict[str, int]
    ranks: dict[tuple[str, str], int] = field(init=False, repr=False)

    def __post_init__(self):
        ranks = {}
        for rank, pair in enumerate(self.merges):
            if pair in ranks:
                raise TableFormatError(f"{self.name}: duplicate merge pair {pair!r}")
            ranks[pair] = rank
        for left, right in self.merges:
            if left + right not in self.vocab:
                raise TableFormatError(
                    f"{self.name}: merge result {left + right!r} missing from vocabulary"
                )
        object.__setattr__(self, "ranks", ranks)


@dataclass(frozen=True)
class EncoderSpec:
    """Resolved encoder for one count call: exactly one of table /
    chars_per_token is active."""

    kind: str
    table: BpeTable | None = None
    chars_per_token: float | None = None

    @classmethod
    def heuristic(cls, chars_per_token: float = DEFAULT_CHARS_PER_TOKEN) -> "EncoderSpec":
        if chars_per_token <= 0:
            raise TokenizerError("chars_per_token must be positive")
        return cls(kind="heuristic", chars_per_token=chars_per_token)

    @classmethod
    def bpe(cls, table: BpeTable) -> "EncoderSpec":
        return cls(kind="bpe", table=table)


def escape_token(token: str) -> str:
    return token.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def unescape_token(token: str) -> str:
    out = []
    i = 0
    while i < len(token):
        if token[i] == "\\" and i + 1 < len(token):
            nxt = token[i + 1]
            if nxt in ("n", "t", "\\"):
                out.append({"n": "\n", "t": "\t", "\\": "\\"}[nxt])
                i += 2
                continue
        out.append(token[i])
        i += 1
    return "".join(out)


def load_bpe_table(name: str, merges_path: str | Path, vocab_path: str | Path) -> BpeTable:
    merges = []
    for line_no, line in enumerate(Path(merges_path).read_text(encoding="utf-8").splitlines(), 1):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise TableFormatError(f"{merges_path}:{line_no}: expected '<left>\\t<right>'")
        merges.append((unescape_token(parts[0]), unescape_token(parts[1])))
    vocab = json.loads(Path(vocab_path).read_text(encoding="utf-8"))
    if not isinstance(vocab, dict) or not all(
        isinstance(k, str) and isinstance(v, int) for k, v in vocab.items()
    ):
        raise TableFormatError(f"{vocab_path}: vocabulary must map token strings to integer ids")
    return BpeTable(name=name, merges=tuple(merges), vocab=vocab)


def bpe_count(text: str, table: BpeTable) -> int:
    """Length of the BPE encoding of ``text`` under ``table``."""
    if not text:
        return 0
    symbols = list(text)
    ranks = table.ranks
    while len(symbols) > 1:
        best_pair = None
        best_rank = len(table.merges)
        for i in range(len(symbols) - 1):
            rank = ranks.get((symbols[i], symbols[i + 1]), -1)
            if rank >= 0 and rank < best_rank:
                best_rank = rank
                best_pair = (symbols[i], symbols[i + 1])
        if best_pair is None:
            break
        merged = best_pair[0] + best_pair[1]
        out = []
        i = 0
        while i < len(symbols):
            if (
                i + 1 < len(symbols)
                and symbols[i] == best_pair[0]
                and symbols[i + 1] == best_pair[1]
            ):
                out.append(merged)
                i += 2
            else:
                out.append(symbols[i])
                i += 1
        symbols = out
    return len(symbols)


def heuristic_count(text: str, chars_per_token: float = DEFAULT_CHARS_PER_TOKEN) -> int:
    """ceil(chars / chars_per_token); rounds up so estimates are upper bounds."""
    if not text:
        return 0
    return math.ceil(len(text) / chars_per_token)


class TokenCounter:
    """Counts tokens under model profiles; holds loaded BPE tables.

    Tables are immutable after load, so counting is pure and thread-safe.
    """

    def __init__(self, table_dir: str | Path | None = None):
        if table_dir is None:
            table_dir = os.environ.get(BPE_DIR_ENV)
        self._table_dir = Path(table_dir) if table_dir else None
        self._tables: dict[str, BpeTable] = {}

    def register(self, table: BpeTable) -> None:
        self._tables[table.name] = table

    def _table_for(self, encoding: str) -> BpeTable:
        if encoding in self._tables:
            return self._tables[encoding]
        if self._table_dir is not None:
            merges = self._table_dir / f"{encoding}.merges.txt"
            vocab = self._table_dir / f"{encoding}.vocab.json"
            if merges.exists() and vocab.exists():
                table = load_bpe_table(encoding, merges, vocab)
                self._tables[encoding] = table
                return table
        raise TableNotLoadedError(
            f"profile selects BPE encoding {encoding!r} but no table is loaded "
            f"(searched {self._table_dir or '$' + BPE_DIR_ENV})"
        )

    def encoder_for(self, profile: ModelProfile) -> EncoderSpec:
        tk = profile.tokenizer_kind
        if tk.kind == "bpe":
            return EncoderSpec.bpe(self._table_for(tk.encoding))
        return EncoderSpec.heuristic(tk.chars_per_token or DEFAULT_CHARS_PER_TOKEN)

    def count(self, text: str, profile: ModelProfile) -> int:
        spec = self.encoder_for(profile)
        if spec.kind == "bpe":
            return bpe_count(text, spec.table)
        return heuristic_count(text, spec.chars_per_token)


def count_tokens(text: str, profile: ModelProfile, counter: TokenCounter | None = None) -> int:
    """Count tokens for ``text`` under ``profile``.

    Deterministic: same text and tables give the same count everywhere.
    """
    return (counter or TokenCounter()).count(text, profile)


def heuristic_error_report(
    corpus,
    chars_per_token: float = DEFAULT_CHARS_PER_TOKEN,
) -> dict[str, float]:
    """Per-language mean absolute error (%) of the char heuristic.

    ``corpus`` is an iterable of (language_tag, text, true_token_count);
    every true count must be > 0. MAE per tag is
    mean(|estimate - truth| / truth) * 100.
    """
    items = list(corpus)
    if not items:
        raise TokenizerError("corpus is empty")
    errors: dict[str, list[float]] = {}
    for lang, text, truth in items:
        if truth <= 0:
            raise TokenizerError(f"ground-truth count must be > 0, got {truth} for {lang!r}")
        estimate = heuristic_count(text, chars_per_token)
        errors.setdefault(lang, []).append(abs(estimate - truth) / truth)
    return {lang: 100.0 * sum(v) / len(v) for lang, v in errors.items()}


def load_corpus(path: str | Path):
    """Load a labeled corpus file: JSON list of {lang, text, tokens}."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return [(item["lang"], item["text"], item["tokens"]) for item in raw]
