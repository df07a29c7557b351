"""
Tests for relevance capture and export
"""

import csv
import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from PIL import Image

from detector.exceptions import ArgumentError
from detector.inspection import capture_relevance, export_relevance, trigger_contrast
from detector.training import CorpusSplits, build_model

from .helpers import fig1_sentence, tiny_config


class RelevanceTests(SimpleTestCase):

    def setUp(self):
        sentence = fig1_sentence()
        self.model = build_model(tiny_config(), CorpusSplits([sentence], [sentence]))

    def test_untrained_layer_zero_is_symmetric(self):
        relevance = capture_relevance(self.model, fig1_sentence(), layer=0)
        self.assertEqual(relevance.matrix.shape, (8, 8))
        np.testing.assert_array_equal(relevance.matrix, relevance.matrix.T)
        self.assertEqual(relevance.matrix[0, 2], 0.0)

    def test_default_is_last_layer(self):
        relevance = capture_relevance(self.model, fig1_sentence())
        self.assertEqual(relevance.layer, 2)
        self.assertTrue(np.all(np.isfinite(relevance.matrix)))

    def test_layer_out_of_range(self):
        with self.assertRaises(ArgumentError):
            capture_relevance(self.model, fig1_sentence(), layer=3)

    def test_baselines_have_no_edges(self):
        sentence = fig1_sentence()
        gcn = build_model(tiny_config(architecture="gcn"), CorpusSplits([sentence], [sentence]))
        with self.assertRaises(ArgumentError):
            capture_relevance(gcn, sentence)

    def test_long_sentence_warns(self):
        model = build_model(tiny_config(max_len=5), CorpusSplits([fig1_sentence()], [fig1_sentence()]))
        with self.assertLogs("detector.inspection", level="WARNING"):
            relevance = capture_relevance(model, fig1_sentence())
        self.assertEqual(relevance.matrix.shape, (5, 5))

    def test_trigger_contrast(self):
        relevance = capture_relevance(self.model, fig1_sentence(), layer=0)
        trigger, other = trigger_contrast(relevance)
        columns = relevance.matrix.mean(axis=0)
        self.assertAlmostEqual(trigger, columns[1])
        self.assertAlmostEqual(other, float(np.delete(columns, 1).mean()))
        self.assertEqual(trigger_contrast(relevance, spans=[])[0], None)


class ExportTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        sentence = fig1_sentence()
        model = build_model(tiny_config(), CorpusSplits([sentence], [sentence]))
        self.relevance = capture_relevance(model, sentence, layer=0)
        self.paths = export_relevance(self.relevance, self.dir, "relevance_0")

    def tearDown(self):
        self.tmp.cleanup()

    def test_csv_has_header_and_n_rows(self):
        with open(self.paths["csv"], encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(len(rows), 9)
        self.assertEqual(rows[0], fig1_sentence().tokens)
        np.testing.assert_array_equal(np.array(rows[1:], dtype=float), self.relevance.matrix)

    def test_json(self):
        data = json.loads(self.paths["json"].read_text(encoding="utf-8"))
        self.assertEqual(data["layer"], 0)
        self.assertEqual(data["triggers"], [[1, 2, "Meet"]])
        self.assertEqual(len(data["matrix"]), 8)

    def test_png(self):
        with Image.open(self.paths["png"]) as image:
            self.assertEqual(image.size, (8 * 24, 8 * 24))
            self.assertEqual(image.mode, "L")
