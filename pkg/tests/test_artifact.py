import json

import numpy as np
import pytest

from docgat.artifact import FORMAT_VERSION, load_model, save_model
from docgat.classifier import ResidualGatClassifier


@pytest.fixture(scope="module")
def fitted(tiny_corpus):
    clf = ResidualGatClassifier(max_features=800, hidden_width=8, heads=2, epochs=6, seed=17)
    clf.fit([d.text for d in tiny_corpus], [d.label for d in tiny_corpus])
    return clf


class TestRoundTrip:
    def test_save_load_save_is_byte_identical(self, fitted, tmp_path):
        first = tmp_path / "model.json"
        second = tmp_path / "model2.json"
        save_model(first, fitted)
        loaded = load_model(first)
        save_model(second, loaded)
        assert first.read_bytes() == second.read_bytes()

    def test_parameters_bit_exact(self, fitted, tmp_path):
        path = tmp_path / "model.json"
        save_model(path, fitted)
        loaded = load_model(path)
        for name, tensor in fitted.model_.named_parameters().items():
            np.testing.assert_array_equal(
                loaded.model_.named_parameters()[name].values, tensor.values
            )

    def test_predictions_identical_after_reload(self, fitted, tiny_corpus, tmp_path):
        path = tmp_path / "model.json"
        save_model(path, fitted)
        loaded = load_model(path)
        texts = [d.text for d in tiny_corpus][:10]
        np.testing.assert_array_equal(
            fitted.predict_proba(texts), loaded.predict_proba(texts)
        )

    def test_vocabulary_preserved(self, fitted, tmp_path):
        path = tmp_path / "model.json"
        save_model(path, fitted)
        loaded = load_model(path)
        assert loaded.vocabulary_.terms == fitted.vocabulary_.terms
        assert loaded.vocabulary_.doc_freq == fitted.vocabulary_.doc_freq
        assert loaded.vocabulary_.n_docs == fitted.vocabulary_.n_docs

    def test_metrics_block_stored(self, fitted, tmp_path):
        path = tmp_path / "model.json"
        save_model(path, fitted, metrics={"macro_f1": 0.97})
        payload = json.loads(path.read_text())
        assert payload["metrics"] == {"macro_f1": 0.97}
        assert payload["format_version"] == FORMAT_VERSION


class TestErrors:
    def test_unfitted_classifier_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="not fitted"):
            save_model(tmp_path / "m.json", ResidualGatClassifier())

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="m.json"):
            load_model(tmp_path / "m.json")

    def test_newer_version_rejected(self, fitted, tmp_path):
        path = tmp_path / "m.json"
        save_model(path, fitted)
        payload = json.loads(path.read_text())
        payload["format_version"] = FORMAT_VERSION + 1
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="newer than supported"):
            load_model(path)

    def test_tampered_label_map_rejected(self, fitted, tmp_path):
        path = tmp_path / "m.json"
        save_model(path, fitted)
        payload = json.loads(path.read_text())
        payload["label_map"] = {"thyroid": 1, "colon": 0, "lung": 2, "generic": 3}
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="label map"):
            load_model(path)

    def test_parameter_shape_mismatch_rejected(self, fitted, tmp_path):
        path = tmp_path / "m.json"
        save_model(path, fitted)
        payload = json.loads(path.read_text())
        payload["parameters"]["head.b"] = [[0.0, 0.0]]
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="head.b"):
            load_model(path)

    def test_missing_parameter_rejected(self, fitted, tmp_path):
        path = tmp_path / "m.json"
        save_model(path, fitted)
        payload = json.loads(path.read_text())
        del payload["parameters"]["gat1.h0.w"]
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="gat1.h0.w"):
            load_model(path)
