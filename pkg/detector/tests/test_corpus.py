"""
Tests for sentences, corpus files, tags, embeddings and batching
"""

import json
import tempfile
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from detector.corpus import (DETACHED, IGNORE_TAG, PAD_ID, UNK_ID, Sentence, TagSet, Vocab,
                             build_vocabularies, decode_tags, event_types_of, load_corpus,
                             load_embeddings, make_batches, tags_for, truncate, unbatch,
                             write_corpus)
from detector.exceptions import (ArgumentError, CorpusFormatError, EmbeddingFormatError,
                                 VocabularyError)

from .helpers import fig1_sentence, random_tree_sentence


class CorpusFileMixin:

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write_lines(self, name, lines):
        path = self.dir / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


def record(**changes):
    data = {
        "tokens": ["Putin", "visited", "Bush"],
        "entity_tags": ["B-PER", "O", "B-PER"],
        "dep_head": [2, 0, 2],
        "dep_label": ["nsubj", "root", "dobj"],
        "triggers": [[1, 2, "Meet"]],
    }
    data.update(changes)
    return json.dumps(data)


class LoadCorpusTests(CorpusFileMixin, SimpleTestCase):

    def test_minimal_record(self):
        sentences = load_corpus(self.write_lines("c.jsonl", [record()]))
        self.assertEqual(len(sentences), 1)
        self.assertEqual(sentences[0].dep_head, [2, 0, 2])
        self.assertEqual(sentences[0].triggers, [(1, 2, "Meet")])

    def test_head_out_of_bounds(self):
        path = self.write_lines("c.jsonl", [record(), record(dep_head=[5, 0, 2])])
        with self.assertRaises(ValidationError) as ctx:
            load_corpus(path)
        self.assertIn("dep_head", ctx.exception.message_dict)
        self.assertIn("line 2", ctx.exception.message_dict["dep_head"][0])

    def test_two_roots(self):
        with self.assertRaises(ValidationError) as ctx:
            load_corpus(self.write_lines("c.jsonl", [record(dep_head=[0, 0, 2])]))
        self.assertIn("dep_head", ctx.exception.message_dict)

    def test_self_head(self):
        with self.assertRaises(ValidationError):
            load_corpus(self.write_lines("c.jsonl", [record(dep_head=[1, 0, 2])]))

    def test_overlapping_triggers(self):
        with self.assertRaises(ValidationError) as ctx:
            load_corpus(self.write_lines("c.jsonl", [record(triggers=[[0, 2, "Meet"], [1, 3, "Meet"]])]))
        self.assertIn("triggers", ctx.exception.message_dict)

    def test_length_mismatch_names_field(self):
        with self.assertRaises(ValidationError) as ctx:
            load_corpus(self.write_lines("c.jsonl", [record(entity_tags=["O"])]))
        self.assertIn("entity_tags", ctx.exception.message_dict)

    def test_malformed_json_has_line_number(self):
        with self.assertRaises(CorpusFormatError) as ctx:
            load_corpus(self.write_lines("c.jsonl", [record(), "{not json"]))
        self.assertEqual(ctx.exception.line_number, 2)
        self.assertIn("line 2", str(ctx.exception))

    def test_missing_key(self):
        data = json.loads(record())
        del data["dep_label"]
        with self.assertRaises(CorpusFormatError):
            load_corpus(self.write_lines("c.jsonl", [json.dumps(data)]))

    def test_triggers_optional_for_prediction_input(self):
        data = json.loads(record())
        del data["triggers"]
        path = self.write_lines("c.jsonl", [json.dumps(data)])
        with self.assertRaises(CorpusFormatError):
            load_corpus(path)
        self.assertEqual(load_corpus(path, require_triggers=False)[0].triggers, [])

    def test_long_sentences_are_truncated(self):
        n = 8
        data = record(
            tokens=[f"w{i}" for i in range(n)],
            entity_tags=["O"] * n,
            dep_head=[0, 1, 1, 1, 8, 5, 5, 1],
            dep_label=["root"] + ["dep"] * (n - 1),
            triggers=[[1, 2, "Meet"], [5, 7, "Attack"]],
        )
        with self.assertLogs("detector.corpus", level="WARNING"):
            sentence = load_corpus(self.write_lines("c.jsonl", [data]), max_len=5)[0]
        self.assertEqual(len(sentence), 5)
        self.assertTrue(sentence.truncated)
        self.assertEqual(sentence.dep_head, [0, 1, 1, 1, DETACHED])
        self.assertEqual(sentence.triggers, [(1, 2, "Meet")])
        sentence.validate()

    def test_write_then_load(self):
        sentences = [fig1_sentence(), random_tree_sentence(np.random.default_rng(0), 6)]
        path = self.dir / "out.jsonl"
        write_corpus(path, sentences)
        self.assertEqual(load_corpus(path), sentences)


class TagTests(SimpleTestCase):

    def test_tagset_size(self):
        tagset = TagSet([f"T{k}" for k in range(33)])
        self.assertEqual(len(tagset), 67)
        self.assertEqual(tagset.encode("O"), 0)

    def test_fig1_trigger(self):
        tagset = TagSet(["Meet"])
        ids = tags_for(fig1_sentence(), tagset)
        self.assertEqual(tagset.decode(ids[1]), "B-Meet")
        self.assertEqual([tagset.decode(i) for i in ids].count("O"), 7)

    def test_no_triggers_all_outside(self):
        sentence = fig1_sentence()
        sentence.triggers = []
        self.assertEqual(tags_for(sentence, TagSet(["Meet"])), [0] * 8)

    def test_unknown_event_type(self):
        with self.assertRaises(VocabularyError):
            tags_for(fig1_sentence(), TagSet(["Attack"]))

    def test_tag_bijection(self):
        tagset = TagSet(["Attack", "Meet", "Die"])
        for tag in tagset.tags:
            self.assertEqual(tagset.decode(tagset.encode(tag)), tag)
        with self.assertRaises(VocabularyError):
            tagset.encode("B-Elect")

    def test_round_trip_on_random_spans(self):
        rng = np.random.default_rng(11)
        tagset = TagSet(["Attack", "Meet", "Die"])
        for _ in range(200):
            n = int(rng.integers(1, 15))
            spans, position = [], 0
            while position < n:
                if rng.random() < 0.3:
                    end = min(n, position + int(rng.integers(1, 4)))
                    spans.append((position, end, str(rng.choice(tagset.event_types))))
                    position = end
                else:
                    position += 1
            sentence = Sentence(["w"] * n, ["O"] * n, [0] + [1] * (n - 1),
                                ["root"] + ["dep"] * (n - 1), spans)
            self.assertEqual(decode_tags(tags_for(sentence, tagset), tagset), spans)

    def test_stray_inside_tag_opens_span(self):
        tagset = TagSet(["Meet"])
        self.assertEqual(decode_tags([0, 2, 2, 0], tagset), [(1, 3, "Meet")])


class VocabTests(SimpleTestCase):

    def test_reserved_ids_and_order(self):
        vocab = Vocab.build(["b", "a", "b", "c"])
        self.assertEqual(vocab.encode("<pad>"), PAD_ID)
        self.assertEqual(vocab.encode("zebra"), UNK_ID)
        self.assertEqual(vocab.to_list(), ["b", "a", "c"])

    def test_stable_across_save_and_load(self):
        vocab = Vocab.build(["x", "y", "y"])
        again = Vocab.from_list(vocab.to_list())
        self.assertEqual(again.stoi, vocab.stoi)


class EmbeddingTests(CorpusFileMixin, SimpleTestCase):

    def setUp(self):
        super().setUp()
        self.vocab = Vocab.build(["putin", "visited", "bush"])

    def test_full_coverage(self):
        path = self.write_lines("emb.txt", ["3 2", "putin 1 2", "visited 3 4", "bush 5 6"])
        table = load_embeddings(path, self.vocab, 2, np.random.default_rng(0))
        np.testing.assert_array_equal(table.data[self.vocab.encode("visited")], [3, 4])
        np.testing.assert_array_equal(table.data[PAD_ID], [0, 0])
        self.assertTrue(table.requires_grad)

    def test_no_coverage(self):
        table = load_embeddings(self.write_lines("emb.txt", ["0 4"]), self.vocab, 4,
                                np.random.default_rng(0))
        np.testing.assert_array_equal(table.data[PAD_ID], np.zeros(4))
        rows = table.data[1:]
        self.assertTrue(np.all(rows != 0))
        self.assertTrue(np.all(np.abs(rows) <= 0.5 / 4))

    def test_duplicate_word_last_wins(self):
        path = self.write_lines("emb.txt", ["2 2", "bush 1 1", "bush 2 2"])
        with self.assertLogs("detector.corpus", level="WARNING"):
            table = load_embeddings(path, self.vocab, 2, np.random.default_rng(0))
        np.testing.assert_array_equal(table.data[self.vocab.encode("bush")], [2, 2])

    def test_dim_mismatch(self):
        with self.assertRaises(EmbeddingFormatError):
            load_embeddings(self.write_lines("emb.txt", ["1 3", "bush 1 2 3"]), self.vocab, 2,
                            np.random.default_rng(0))


class BatchTests(SimpleTestCase):

    def setUp(self):
        rng = np.random.default_rng(3)
        self.sentences = [random_tree_sentence(rng, int(rng.integers(2, 9))) for _ in range(61)]
        self.vocabs = build_vocabularies(self.sentences, event_types_of(self.sentences))

    def test_batch_sizes(self):
        batches = make_batches(self.sentences, self.vocabs, batch_size=30)
        self.assertEqual([b.size for b in batches], [30, 30, 1])

    def test_same_seed_same_batches(self):
        first = make_batches(self.sentences, self.vocabs, 30, shuffle_seed=5)
        second = make_batches(self.sentences, self.vocabs, 30, shuffle_seed=5)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.token_ids, b.token_ids)

    def test_padding_is_ignored(self):
        for batch in make_batches(self.sentences, self.vocabs, 30):
            self.assertTrue(np.all(batch.gold[~batch.mask] == IGNORE_TAG))
            self.assertTrue(np.all(batch.token_ids[~batch.mask] == PAD_ID))

    def test_unbatch_restores_ids(self):
        batch = make_batches(self.sentences, self.vocabs, 61)[0]
        for sentence, (tokens, entities, tags) in zip(self.sentences, unbatch(batch)):
            self.assertEqual(tokens, [self.vocabs.words.encode(t) for t in sentence.tokens])
            self.assertEqual(entities, [self.vocabs.entities.encode(t) for t in sentence.entity_tags])
            self.assertEqual(tags, tags_for(sentence, self.vocabs.tagset))

    def test_batch_size_must_be_positive(self):
        with self.assertRaises(ArgumentError):
            make_batches(self.sentences, self.vocabs, batch_size=0)

    def test_truncate_keeps_short_sentences(self):
        sentence = fig1_sentence()
        self.assertIs(truncate(sentence, 50), sentence)
