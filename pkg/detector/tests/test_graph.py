"""
Tests for turning dependency parses into adjacency tensors
"""

import numpy as np
from django.test import SimpleTestCase

from detector import numkit as nk
from detector.corpus import truncate
from detector.exceptions import DimensionError, VocabularyError
from detector.graph import (ROOT_ID, SELF_ID, SHARED_ID, UNK_LABEL_ID, EdgeVocab, binary_adjacency,
                            build_adjacency, build_batch_adjacency, relation_adjacency,
                            relevance_matrix)

from .helpers import analytic_gradients, fig1_sentence, random_tree_sentence

FIG1_LABELS = ["nsubj", "dobj", "case", "nmod:poss", "nmod"]


def edge_vocab(labels=FIG1_LABELS, dim=3, seed=0, **kwargs):
    vocab = EdgeVocab(labels, **kwargs)
    vocab.init_table(dim, np.random.default_rng(seed))
    return vocab


class AdjacencyTests(SimpleTestCase):

    def setUp(self):
        self.sentence = fig1_sentence()
        self.vocab = edge_vocab()
        self.adj = build_adjacency(self.sentence, self.vocab, 3)

    def test_shape(self):
        self.assertEqual(self.adj.E.shape, (8, 8, 3))

    def test_symmetric(self):
        E = self.adj.E.data
        np.testing.assert_array_equal(E, E.transpose(1, 0, 2))

    def test_visited_putin_edge(self):
        nsubj = self.vocab.table.data[self.vocab.lookup("nsubj")]
        np.testing.assert_array_equal(self.adj.E.data[1, 0], nsubj)
        np.testing.assert_array_equal(self.adj.E.data[0, 1], nsubj)

    def test_no_edge_is_zero(self):
        np.testing.assert_array_equal(self.adj.E.data[0, 2], np.zeros(3))
        self.assertFalse(self.adj.edge_mask[0, 2])

    def test_root_self_loop(self):
        np.testing.assert_array_equal(self.adj.E.data[1, 1], self.vocab.table.data[ROOT_ID])
        self.assertEqual(self.adj.relation_ids[1, 1], ROOT_ID)
        self.assertEqual(int(np.trace(self.adj.edge_mask)), 1)

    def test_edge_count(self):
        n = len(self.sentence)
        self.assertEqual(int(self.adj.edge_mask.sum()), 2 * (n - 1) + 1)

    def test_all_self_loops(self):
        adj = build_adjacency(self.sentence, self.vocab, 3, self_loops=True)
        self.assertTrue(np.all(np.diag(adj.edge_mask)))
        self.assertEqual(adj.relation_ids[0, 0], SELF_ID)
        self.assertEqual(adj.relation_ids[1, 1], ROOT_ID)

    def test_random_trees(self):
        rng = np.random.default_rng(1)
        vocab = edge_vocab(["nsubj", "dobj", "nmod", "det"])
        for _ in range(30):
            sentence = random_tree_sentence(rng, int(rng.integers(1, 12)))
            adj = build_adjacency(sentence, vocab, 3)
            n = len(sentence)
            np.testing.assert_array_equal(adj.edge_mask, adj.edge_mask.T)
            self.assertEqual(int(adj.edge_mask.sum()), 2 * (n - 1) + 1)

    def test_relevance_norm(self):
        self.vocab.table.data[self.vocab.lookup("nsubj")] = [3.0, 4.0, 0.0]
        adj = build_adjacency(self.sentence, self.vocab, 3)
        relevance = relevance_matrix(adj.E)
        self.assertAlmostEqual(relevance[1, 0], 5.0)
        self.assertAlmostEqual(relevance[0, 1], 5.0)
        self.assertEqual(relevance[0, 2], 0.0)

    def test_gradient_reaches_label_table(self):
        table = self.vocab.table
        grads = analytic_gradients(
            lambda: nk.sum(build_adjacency(self.sentence, self.vocab, 3).E), [table]
        )
        # each nmod edge is listed twice and there are two nmod dependents
        np.testing.assert_allclose(grads[0][self.vocab.lookup("nmod")], np.full(3, 4.0))
        np.testing.assert_allclose(grads[0][ROOT_ID], np.ones(3))

    def test_p_must_match_table(self):
        with self.assertRaises(DimensionError):
            build_adjacency(self.sentence, self.vocab, 5)

    def test_truncated_sentence_drops_detached_edges(self):
        cut = truncate(self.sentence, 4)
        adj = build_adjacency(cut, self.vocab, 3)
        # token 3 ("at") hangs off "ranch", which was cut
        self.assertFalse(adj.edge_mask[3].any())
        self.assertTrue(adj.edge_mask[2, 1])


class EdgeVocabTests(SimpleTestCase):

    def test_unknown_label_raises(self):
        with self.assertRaises(VocabularyError):
            edge_vocab().lookup("acl:relcl")

    def test_unknown_label_maps_to_unk(self):
        self.assertEqual(edge_vocab(allow_unk=True).lookup("acl:relcl"), UNK_LABEL_ID)

    def test_untyped_edges_share_one_id(self):
        vocab = edge_vocab(typed=False)
        adj = build_adjacency(fig1_sentence(), vocab, 3)
        ids = adj.relation_ids[adj.edge_mask]
        self.assertTrue(np.all(ids == SHARED_ID))
        np.testing.assert_array_equal(adj.E.data[0, 1], adj.E.data[5, 1])

    def test_untyped_keeps_named_labels(self):
        vocab = edge_vocab(typed=False, keep=("nsubj",))
        self.assertNotEqual(vocab.lookup("nsubj"), SHARED_ID)
        self.assertEqual(vocab.lookup("dobj"), SHARED_ID)

    def test_round_trip(self):
        vocab = EdgeVocab(FIG1_LABELS, typed=False, keep=["nsubj"], allow_unk=True)
        again = EdgeVocab.from_dict(vocab.to_dict())
        self.assertEqual(again.labels, vocab.labels)
        self.assertEqual((again.typed, again.keep, again.allow_unk), (False, frozenset({"nsubj"}), True))

    def test_no_table(self):
        with self.assertRaises(VocabularyError):
            build_batch_adjacency([fig1_sentence()], EdgeVocab(FIG1_LABELS), 8)


class BatchAdjacencyTests(SimpleTestCase):

    def test_padding_has_no_edges(self):
        vocab = edge_vocab()
        short = truncate(fig1_sentence(), 3)
        adj = build_batch_adjacency([fig1_sentence(), short], vocab, 8)
        self.assertEqual(adj.E.shape, (2, 8, 8, 3))
        self.assertFalse(adj.edge_mask[1, 3:].any())
        self.assertFalse(adj.edge_mask[1, :, 3:].any())
        np.testing.assert_array_equal(adj.E.data[1, 3:], 0.0)

    def test_matches_single_sentence(self):
        vocab = edge_vocab()
        single = build_adjacency(fig1_sentence(), vocab, 3)
        batched = build_batch_adjacency([fig1_sentence()], vocab, 8)
        np.testing.assert_array_equal(batched.E.data[0], single.E.data)

    def test_sentence_wider_than_batch(self):
        with self.assertRaises(DimensionError):
            build_batch_adjacency([fig1_sentence()], edge_vocab(), 4)


class BaselineAdjacencyTests(SimpleTestCase):

    def test_binary(self):
        adj = build_adjacency(fig1_sentence(), edge_vocab(), 3)
        A = binary_adjacency(adj.edge_mask)
        self.assertEqual(A.dtype, np.float64)
        self.assertEqual(A.sum(), 15.0)

    def test_relation_rows_are_normalized(self):
        relation_ids = np.array([[0, 1, 1], [1, -1, -1], [1, -1, 0]])
        A_r = relation_adjacency(relation_ids, 2)
        self.assertEqual(A_r.shape, (2, 3, 3))
        np.testing.assert_allclose(A_r[1, 0], [0.0, 0.5, 0.5])
        np.testing.assert_allclose(A_r[0, 0], [1.0, 0.0, 0.0])
        np.testing.assert_allclose(A_r[0, 1], [0.0, 0.0, 0.0])
