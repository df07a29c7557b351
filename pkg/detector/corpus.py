"""
EVENT DETECTOR - Corpus
================================
Sentences, vocabularies, the BIO trigger tag scheme and batching.

ON-DISK FORMAT (one JSON object per line):
    {"tokens": [...], "entity_tags": [...], "dep_head": [...],
     "dep_label": [...], "triggers": [[start, end, "Type"], ...]}

- dep_head is 1-based, 0 marks the syntactic ROOT
- trigger spans are [start, end) over token positions
- sentences longer than max_len are cut, never rejected
"""

import json
import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from django.core.exceptions import ValidationError

from .exceptions import ArgumentError, CorpusFormatError, EmbeddingFormatError, VocabularyError
from .numkit import Tensor

logger = logging.getLogger(__name__)

PAD = "<pad>"
UNK = "<unk>"
PAD_ID = 0
UNK_ID = 1
IGNORE_TAG = -1
OUTSIDE = "O"
DETACHED = -1  # dep_head of a token whose head was truncated away

REQUIRED_KEYS = ("tokens", "entity_tags", "dep_head", "dep_label", "triggers")


# ============================================
# SENTENCE
# ============================================

@dataclass
class Sentence:
    """
    One parsed sentence with its gold triggers

    Attributes:
        tokens: words
        entity_tags: BIO entity tags, one per token
        dep_head: 1-based head per token, 0 for ROOT, -1 once detached by truncation
        dep_label: dependency label per token
        triggers: list of (start, end, event_type), end exclusive
        truncated: True when load/generation cut the sentence
    """

    tokens: list
    entity_tags: list
    dep_head: list
    dep_label: list
    triggers: list = field(default_factory=list)
    truncated: bool = False

    def __len__(self):
        return len(self.tokens)

    @property
    def root(self):
        """0-based index of the ROOT token, or None when it was cut"""
        for position, head in enumerate(self.dep_head):
            if head == 0:
                return position
        return None

    def validate(self):
        """
        Check every sentence invariant

        Raises:
            ValidationError keyed by the offending field
        """
        n = len(self.tokens)
        errors = {}
        for name in ("entity_tags", "dep_head", "dep_label"):
            if len(getattr(self, name)) != n:
                errors[name] = [f"has {len(getattr(self, name))} items for {n} tokens"]
        if "dep_head" not in errors:
            roots = sum(1 for head in self.dep_head if head == 0)
            if roots != 1 and not (self.truncated and roots == 0):
                errors.setdefault("dep_head", []).append(f"expected one ROOT, found {roots}")
            for position, head in enumerate(self.dep_head):
                lowest = DETACHED if self.truncated else 0
                if not lowest <= head <= n:
                    errors.setdefault("dep_head", []).append(
                        f"head {head} of token {position + 1} is outside 0..{n}"
                    )
                elif head == position + 1:
                    errors.setdefault("dep_head", []).append(
                        f"token {position + 1} is its own head"
                    )
        previous_end = 0
        for trigger in self.triggers:
            start, end, _event_type = trigger
            if not 0 <= start < end <= n:
                errors.setdefault("triggers", []).append(f"span {trigger} outside 0..{n}")
            elif start < previous_end:
                errors.setdefault("triggers", []).append(f"span {trigger} overlaps or is unsorted")
            previous_end = max(previous_end, end)
        if errors:
            raise ValidationError(errors)

    def to_dict(self):
        data = {
            "tokens": list(self.tokens),
            "entity_tags": list(self.entity_tags),
            "dep_head": list(self.dep_head),
            "dep_label": list(self.dep_label),
            "triggers": [list(t) for t in self.triggers],
        }
        if self.truncated:
            data["truncated"] = True
        return data

    @classmethod
    def from_dict(cls, data):
        return cls(
            tokens=list(data["tokens"]),
            entity_tags=list(data["entity_tags"]),
            dep_head=[int(h) for h in data["dep_head"]],
            dep_label=list(data["dep_label"]),
            triggers=[(int(s), int(e), str(t)) for s, e, t in data.get("triggers", [])],
            truncated=bool(data.get("truncated", False)),
        )


def truncate(sentence, max_len):
    """
    Cut a sentence to max_len tokens

    Edges pointing at cut tokens are detached; triggers reaching past
    the cut are dropped.
    """
    if len(sentence) <= max_len:
        return sentence
    heads = [head if head <= max_len else DETACHED for head in sentence.dep_head[:max_len]]
    return Sentence(
        tokens=sentence.tokens[:max_len],
        entity_tags=sentence.entity_tags[:max_len],
        dep_head=heads,
        dep_label=sentence.dep_label[:max_len],
        triggers=[t for t in sentence.triggers if t[1] <= max_len],
        truncated=True,
    )


# ============================================
# CORPUS FILES
# ============================================

def load_corpus(path, max_len=50, require_triggers=True):
    """
    Read a JSONL corpus

    Args:
        path: corpus file
        max_len: longer sentences are truncated
        require_triggers: False accepts records without a "triggers" key (prediction input)

    Returns:
        list of validated Sentence objects

    Raises:
        CorpusFormatError: a line is not a well-formed record
        ValidationError: a record breaks a sentence invariant
    """
    sentences = []
    cut = 0
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(line_number, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(line_number, "expected a JSON object")
            required = REQUIRED_KEYS if require_triggers else REQUIRED_KEYS[:-1]
            missing = [key for key in required if key not in record]
            if missing:
                raise CorpusFormatError(line_number, f"missing keys {missing}")
            try:
                sentence = Sentence.from_dict(record)
            except (TypeError, ValueError) as exc:
                raise CorpusFormatError(line_number, f"bad field value ({exc})") from exc

            try:
                sentence.validate()
            except ValidationError as exc:
                raise ValidationError(
                    {name: [f"line {line_number}: {m}" for m in messages]
                     for name, messages in exc.message_dict.items()}
                ) from exc

            if len(sentence) > max_len:
                sentence = truncate(sentence, max_len)
                cut += 1
            sentences.append(sentence)

    logger.info("Loaded %d sentences from %s (%d truncated to %d tokens)",
                len(sentences), path, cut, max_len)
    if cut:
        logger.warning("%d sentences in %s exceeded max_len=%d and were truncated", cut, path, max_len)
    return sentences


def write_corpus(path, sentences):
    """Write sentences as JSONL, byte-for-byte reproducible"""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for sentence in sentences:
            handle.write(json.dumps(sentence.to_dict(), ensure_ascii=True) + "\n")


# ============================================
# VOCABULARIES
# ============================================

class Vocab:
    """
    Dense string ↔ id map with reserved padding (0) and unknown (1) ids

    Usage:
        vocab = Vocab.build(["the", "the", "visited"])
        vocab.encode("visited")  -> 2
        vocab.encode("zebra")    -> 1  (UNK)
    """

    def __init__(self, items=()):
        self.itos = [PAD, UNK]
        self.stoi = {PAD: PAD_ID, UNK: UNK_ID}
        for item in items:
            self.add(item)

    @classmethod
    def build(cls, items, min_count=1):
        counts = Counter(items)
        # most frequent first, ties alphabetical: stable across runs
        ordered = sorted(counts, key=lambda item: (-counts[item], item))
        return cls(item for item in ordered if counts[item] >= min_count)

    def add(self, item):
        if item not in self.stoi:
            self.stoi[item] = len(self.itos)
            self.itos.append(item)
        return self.stoi[item]

    def encode(self, item):
        return self.stoi.get(item, UNK_ID)

    def decode(self, item_id):
        return self.itos[item_id]

    def __len__(self):
        return len(self.itos)

    def __contains__(self, item):
        return item in self.stoi

    def to_list(self):
        return list(self.itos[2:])

    @classmethod
    def from_list(cls, items):
        return cls(items)


class TagSet:
    """
    Bijection between BI/O trigger tags and ids

    Id 0 is O; event type k (0-based) owns B-type = 2k+1 and I-type = 2k+2,
    so there are 2·N + 1 tags in total.
    """

    def __init__(self, event_types):
        self.event_types = list(event_types)
        if len(set(self.event_types)) != len(self.event_types):
            raise VocabularyError(f"duplicate event types in {self.event_types}")
        self.tags = [OUTSIDE]
        for event_type in self.event_types:
            self.tags.extend([f"B-{event_type}", f"I-{event_type}"])
        self.tag_ids = {tag: i for i, tag in enumerate(self.tags)}
        self.type_ids = {t: k for k, t in enumerate(self.event_types)}

    def __len__(self):
        return len(self.tags)

    def encode(self, tag):
        try:
            return self.tag_ids[tag]
        except KeyError:
            raise VocabularyError(f"unknown tag {tag!r}") from None

    def decode(self, tag_id):
        return self.tags[tag_id]

    def begin_id(self, event_type):
        try:
            return 2 * self.type_ids[event_type] + 1
        except KeyError:
            raise VocabularyError(f"unknown event type {event_type!r}") from None

    def event_type_of(self, tag_id):
        return None if tag_id == 0 else self.event_types[(tag_id - 1) // 2]

    def is_begin(self, tag_id):
        return tag_id > 0 and tag_id % 2 == 1


def tags_for(sentence, tagset):
    """
    Gold tag ids for a sentence

    B-type at each span start, I-type inside, O elsewhere.
    """
    ids = [0] * len(sentence)
    for start, end, event_type in sentence.triggers:
        begin = tagset.begin_id(event_type)
        ids[start] = begin
        for position in range(start + 1, end):
            ids[position] = begin + 1
    return ids


def decode_tags(tag_ids, tagset):
    """
    Turn tag ids back into (start, end, event_type) spans

    An I tag that does not continue a span of the same type opens a new span.
    """
    spans = []
    current = None
    for position, tag_id in enumerate(tag_ids):
        tag_id = int(tag_id)
        event_type = tagset.event_type_of(tag_id)
        continues = (
            current is not None
            and not tagset.is_begin(tag_id)
            and event_type == current[2]
        )
        if continues:
            current[1] = position + 1
            continue
        if current is not None:
            spans.append(tuple(current))
            current = None
        if event_type is not None:
            current = [position, position + 1, event_type]
    if current is not None:
        spans.append(tuple(current))
    return spans


@dataclass
class Vocabularies:
    """Everything needed to turn sentences into ids"""

    words: Vocab
    entities: Vocab
    tagset: TagSet

    def to_dict(self):
        return {
            "words": self.words.to_list(),
            "entities": self.entities.to_list(),
            "event_types": list(self.tagset.event_types),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            words=Vocab.from_list(data["words"]),
            entities=Vocab.from_list(data["entities"]),
            tagset=TagSet(data["event_types"]),
        )


def event_types_of(*splits):
    """Sorted event types appearing in any of the given sentence lists"""
    return sorted({t for split in splits for s in split for (_a, _b, t) in s.triggers})


def build_vocabularies(train, event_types):
    return Vocabularies(
        words=Vocab.build(tok for s in train for tok in s.tokens),
        entities=Vocab.build(tag for s in train for tag in s.entity_tags),
        tagset=TagSet(event_types),
    )


# ============================================
# PRE-TRAINED EMBEDDINGS
# ============================================

def random_embedding_rows(rng, rows, dim):
    """Word2vec-style init: uniform in [-0.5/dim, 0.5/dim]"""
    return rng.uniform(-0.5 / dim, 0.5 / dim, size=(rows, dim))


def load_embeddings(path, vocab, dim, rng):
    """
    Load skip-gram vectors in text format

    FORMAT:
        first line: "<count> <dim>"
        then one "word v1 ... vdim" per line

    Args:
        path: embedding file
        vocab: word Vocab
        dim: expected dimension
        rng: numpy Generator for rows the file does not cover

    Returns:
        trainable Tensor[len(vocab), dim]; padding row is zero

    Raises:
        EmbeddingFormatError on a bad header or row
    """
    table = random_embedding_rows(rng, len(vocab), dim)
    seen = set()
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().split()
        if len(header) != 2 or not all(part.isdigit() for part in header):
            raise EmbeddingFormatError(f"{path}: header must be '<count> <dim>'")
        if int(header[1]) != dim:
            raise EmbeddingFormatError(f"{path}: header dim {header[1]} does not match {dim}")
        for line_number, line in enumerate(handle, start=2):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise EmbeddingFormatError(
                    f"{path}:{line_number}: expected {dim} values, got {len(parts) - 1}"
                )
            word = parts[0]
            if word not in vocab:
                continue
            if word in seen:
                logger.warning("%s: %r appears more than once; keeping the last vector", path, word)
            seen.add(word)
            table[vocab.encode(word)] = np.asarray(parts[1:], dtype=np.float64)
    table[PAD_ID] = 0.0
    logger.info("Embeddings cover %d of %d vocabulary words", len(seen), len(vocab) - 2)
    return Tensor(table, requires_grad=True, name="word_embedding")


# ============================================
# BATCHING
# ============================================

@dataclass
class Batch:
    """
    Padded id matrices for B sentences

    Positions at or beyond a sentence's length carry PAD_ID / IGNORE_TAG
    and are masked out of the loss and the scores.
    """

    sentences: list
    token_ids: np.ndarray
    entity_ids: np.ndarray
    lengths: np.ndarray
    heads: np.ndarray
    gold: np.ndarray

    @property
    def size(self):
        return len(self.sentences)

    @property
    def width(self):
        return self.token_ids.shape[1]

    @property
    def mask(self):
        return np.arange(self.width)[None, :] < self.lengths[:, None]


def encode_batch(sentences, vocabs, max_len=50):
    width = max(1, min(max_len, max(len(s) for s in sentences)))
    size = len(sentences)
    token_ids = np.full((size, width), PAD_ID, dtype=np.int64)
    entity_ids = np.full((size, width), PAD_ID, dtype=np.int64)
    heads = np.full((size, width), DETACHED, dtype=np.int64)
    gold = np.full((size, width), IGNORE_TAG, dtype=np.int64)
    lengths = np.zeros(size, dtype=np.int64)
    kept = []
    for row, sentence in enumerate(sentences):
        sentence = truncate(sentence, max_len)
        kept.append(sentence)
        n = len(sentence)
        lengths[row] = n
        token_ids[row, :n] = [vocabs.words.encode(t) for t in sentence.tokens]
        entity_ids[row, :n] = [vocabs.entities.encode(t) for t in sentence.entity_tags]
        heads[row, :n] = sentence.dep_head
        gold[row, :n] = tags_for(sentence, vocabs.tagset)
    return Batch(kept, token_ids, entity_ids, lengths, heads, gold)


def make_batches(sentences, vocabs, batch_size=30, max_len=50, shuffle_seed=None):
    """
    Split sentences into padded batches

    Args:
        sentences: list of Sentence
        vocabs: Vocabularies
        batch_size: sentences per batch (the last one may be smaller)
        max_len: cut length
        shuffle_seed: None keeps the input order; an int shuffles deterministically

    Returns:
        list of Batch
    """
    if batch_size < 1:
        raise ArgumentError(f"batch_size must be >= 1, got {batch_size}")
    order = np.arange(len(sentences))
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(len(sentences))
    return [
        encode_batch([sentences[i] for i in order[start:start + batch_size]], vocabs, max_len)
        for start in range(0, len(sentences), batch_size)
    ]


def unbatch(batch):
    """Per-sentence (token ids, entity ids, tag ids) with padding removed"""
    return [
        (
            batch.token_ids[row, :n].tolist(),
            batch.entity_ids[row, :n].tolist(),
            batch.gold[row, :n].tolist(),
        )
        for row, n in enumerate(batch.lengths)
    ]
