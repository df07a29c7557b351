"""
EVENT DETECTOR - Synthetic Corpus
================================
Templated, parsed sentences in which dependency labels decide the event type.

HOW THE SIGNAL IS PLANTED:
- Every eventive verb "listens" to one grammatical role (nsubj, dobj or nmod)
- Every noun leans to one event type (its entity tag shows which)
- A sentence's three argument nouns lean to different types
- The trigger's type is the leaning of the noun in the verb's role

So the verb alone cannot tell the type; one needs to know which
neighbour is the subject, the object or the oblique.

LABEL-BLIND VARIANT:
Argument phrases are shuffled around the verb and prepositions dropped,
so only the dependency label says which neighbour fills which role.
"""

import logging
import random
from dataclasses import dataclass, field

from .corpus import OUTSIDE, Sentence
from .exceptions import ArgumentError

logger = logging.getLogger(__name__)

EVENT_TYPE_NAMES = (
    "Attack", "Meet", "Transport", "Die", "Elect", "Marry", "Sentence", "Transfer-Money",
    "Arrest-Jail", "Injure", "Start-Org", "End-Position", "Phone-Write", "Demonstrate",
)
ROLES = ("nsubj", "dobj", "nmod")
DETERMINERS = ("the", "a")
PREPOSITIONS = ("in", "at", "with", "near", "from")
CONSONANTS = "bdfgklmnprstvz"
VOWELS = "aeiou"


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Shape of a generated corpus

    Attributes:
        event_types: number of event types (>= 1)
        sentences: total sentences over all splits
        dev_ratio / test_ratio: share of sentences held out for dev / test
        min_len / max_len: sentence length range (the template needs at least 11 tokens
            of room in max_len)
        verbs / nouns / fillers: lexicon sizes
        event_rate: share of sentences built around an eventive verb
        label_blind: shuffle argument phrases and drop prepositions
    """

    event_types: int = 5
    sentences: int = 2600
    dev_ratio: float = 0.1153846154
    test_ratio: float = 0.1153846154
    min_len: int = 9
    max_len: int = 20
    verbs: int = 40
    nouns: int = 60
    fillers: int = 30
    event_rate: float = 0.8
    label_blind: bool = False

    @classmethod
    def from_config(cls, config):
        return cls(
            event_types=config.synthetic_event_types,
            sentences=config.synthetic_sentences,
            dev_ratio=config.synthetic_dev_ratio,
            test_ratio=config.synthetic_test_ratio,
            min_len=config.synthetic_min_len,
            max_len=config.synthetic_max_len,
            verbs=config.synthetic_verbs,
            nouns=config.synthetic_nouns,
            fillers=config.synthetic_fillers,
            event_rate=config.synthetic_event_rate,
            label_blind=config.synthetic_label_blind,
        )

    def validate(self):
        if self.event_types < 1:
            raise ArgumentError(f"a synthetic corpus needs at least one event type, got {self.event_types}")
        if self.sentences < 1:
            raise ArgumentError(f"sentences must be >= 1, got {self.sentences}")
        if self.nouns < self.event_types:
            raise ArgumentError(f"need at least one noun per event type ({self.nouns} < {self.event_types})")
        if self.verbs < 1 or self.fillers < 2:
            raise ArgumentError("need at least 1 verb and 2 fillers")
        if self.max_len < 11 or self.min_len > self.max_len:
            raise ArgumentError(f"length range {self.min_len}..{self.max_len} leaves no room for the template")
        if not (0 <= self.dev_ratio and 0 <= self.test_ratio and self.dev_ratio + self.test_ratio < 1):
            raise ArgumentError("dev_ratio + test_ratio must be in [0, 1)")
        if not 0 <= self.event_rate <= 1:
            raise ArgumentError(f"event_rate must be in [0, 1], got {self.event_rate}")


@dataclass
class Verb:
    word: str
    eventive: bool
    role: str
    particle: str = None


@dataclass
class Lexicon:
    event_types: list
    verbs: list
    nouns: dict          # event type → list of nouns leaning to it
    adjectives: list
    adverbs: list


@dataclass
class SyntheticCorpus:
    train: list
    dev: list
    test: list
    lexicon: Lexicon = field(repr=False, default=None)

    @property
    def all_sentences(self):
        return self.train + self.dev + self.test


# ============================================
# LEXICON
# ============================================

def _pseudo_words(rng, count, taken):
    words = []
    while len(words) < count:
        syllables = rng.randint(2, 3)
        word = "".join(rng.choice(CONSONANTS) + rng.choice(VOWELS) for _ in range(syllables))
        if word not in taken:
            taken.add(word)
            words.append(word)
    return words


def entity_tag(event_type):
    """Entity tag carried by nouns leaning to an event type"""
    return f"B-ENT{event_type.upper()}"


def build_lexicon(spec, rng):
    """Pseudo-word lexicon; every draw comes from the given random.Random"""
    if spec.event_types <= len(EVENT_TYPE_NAMES):
        event_types = list(EVENT_TYPE_NAMES[:spec.event_types])
    else:
        event_types = [f"Event{k}" for k in range(spec.event_types)]

    taken = set(DETERMINERS) | set(PREPOSITIONS)
    verb_words = _pseudo_words(rng, spec.verbs, taken)
    particles = _pseudo_words(rng, 3, taken)
    noun_words = _pseudo_words(rng, spec.nouns, taken)
    filler_words = _pseudo_words(rng, spec.fillers, taken)

    eventive_count = max(1, round(0.75 * spec.verbs)) if spec.verbs > 1 else 1
    verbs = []
    for position, word in enumerate(verb_words):
        particle = rng.choice(particles) if rng.random() < 0.25 else None
        verbs.append(Verb(word=word, eventive=position < eventive_count,
                          role=ROLES[position % len(ROLES)], particle=particle))

    nouns = {t: [] for t in event_types}
    for position, word in enumerate(noun_words):
        nouns[event_types[position % len(event_types)]].append(word)

    half = len(filler_words) // 2
    return Lexicon(event_types=event_types, verbs=verbs, nouns=nouns,
                   adjectives=filler_words[:half], adverbs=filler_words[half:])


# ============================================
# SENTENCES
# ============================================

class _Node:
    """Token under construction; head is another _Node (None for ROOT)"""

    __slots__ = ("word", "entity", "head", "label")

    def __init__(self, word, entity=OUTSIDE, head=None, label="root"):
        self.word = word
        self.entity = entity
        self.head = head
        self.label = label


def _noun_phrase(rng, lexicon, noun, event_type, verb_node, role, adjectives, with_case):
    head = _Node(noun, entity_tag(event_type), verb_node, role)
    phrase = []
    if with_case:
        phrase.append(_Node(rng.choice(PREPOSITIONS), head=head, label="case"))
    phrase.append(_Node(rng.choice(DETERMINERS), head=head, label="det"))
    phrase.extend(_Node(rng.choice(lexicon.adjectives), head=head, label="amod")
                  for _ in range(adjectives))
    phrase.append(head)
    return phrase


def _argument_types(rng, event_types):
    if len(event_types) >= len(ROLES):
        return rng.sample(event_types, len(ROLES))
    picked = rng.sample(event_types, len(event_types))
    while len(picked) < len(ROLES):
        picked.append(rng.choice(event_types))
    return picked


def generate_sentence(rng, lexicon, spec):
    """One templated sentence with its tree parse and triggers"""
    eventive = [v for v in lexicon.verbs if v.eventive]
    plain = [v for v in lexicon.verbs if not v.eventive] or eventive
    verb = rng.choice(eventive if rng.random() < spec.event_rate else plain)

    verb_node = _Node(verb.word)
    verb_block = [verb_node]
    if verb.particle:
        verb_block.append(_Node(verb.particle, head=verb_node, label="compound:prt"))

    types = dict(zip(ROLES, _argument_types(rng, lexicon.event_types)))
    base = len(verb_block) + 2 * len(ROLES) + 1 + (0 if spec.label_blind else 1)
    target = rng.randint(max(spec.min_len, base), max(spec.max_len, base))
    spare = target - base

    # share the spare length between adjectives and trailing adverbs
    extras = {role: 0 for role in ROLES}
    adverbs = 0
    for _ in range(spare):
        slot = rng.randrange(len(ROLES) + 1)
        if slot == len(ROLES):
            adverbs += 1
        else:
            extras[ROLES[slot]] += 1

    phrases = {
        role: _noun_phrase(rng, lexicon, rng.choice(lexicon.nouns[types[role]]), types[role],
                           verb_node, role, extras[role],
                           with_case=(role == "nmod" and not spec.label_blind))
        for role in ROLES
    }
    if spec.label_blind:
        order = rng.sample(ROLES, len(ROLES))
    else:
        order = list(ROLES)
    nodes = phrases[order[0]] + verb_block + phrases[order[1]] + phrases[order[2]]
    nodes.extend(_Node(rng.choice(lexicon.adverbs), head=verb_node, label="advmod")
                 for _ in range(adverbs))
    nodes.append(_Node(".", head=verb_node, label="punct"))

    position = {id(node): i for i, node in enumerate(nodes)}
    triggers = []
    if verb.eventive:
        start = position[id(verb_node)]
        triggers.append((start, start + len(verb_block), types[verb.role]))
    return Sentence(
        tokens=[n.word for n in nodes],
        entity_tags=[n.entity for n in nodes],
        dep_head=[0 if n.head is None else position[id(n.head)] + 1 for n in nodes],
        dep_label=[n.label for n in nodes],
        triggers=triggers,
    )


def gen_synthetic(spec, seed):
    """
    Generate a train/dev/test corpus

    Args:
        spec: SyntheticSpec
        seed: integer; equal seeds give identical corpora

    Returns:
        SyntheticCorpus

    Raises:
        ArgumentError for an unusable spec (e.g. zero event types)
    """
    spec.validate()
    rng = random.Random(seed)
    lexicon = build_lexicon(spec, rng)
    sentences = [generate_sentence(rng, lexicon, spec) for _ in range(spec.sentences)]
    for sentence in sentences:
        sentence.validate()

    n_dev = round(spec.sentences * spec.dev_ratio)
    n_test = round(spec.sentences * spec.test_ratio)
    n_train = spec.sentences - n_dev - n_test
    corpus = SyntheticCorpus(
        train=sentences[:n_train],
        dev=sentences[n_train:n_train + n_dev],
        test=sentences[n_train + n_dev:],
        lexicon=lexicon,
    )
    logger.info("Generated %d synthetic sentences (%d/%d/%d), %d event types%s",
                spec.sentences, len(corpus.train), len(corpus.dev), len(corpus.test),
                spec.event_types, ", label-blind" if spec.label_blind else "")
    return corpus
