import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from symscene.detection import (
    Detection,
    Scene,
    Vocabulary,
    load_scenes,
    load_vocabulary,
    load_vocabulary_file,
    normalized_topk_weights,
    scene_from_json,
    select_objects,
    top_k,
)
from symscene.errors import InvalidInputError, ParseError
from symscene.geometry import BoundingBox


def det(box, class_scores, attribute_scores=(0.1, 0.2)):
    return Detection(BoundingBox(*box), np.array(class_scores), np.array(attribute_scores))


score_vectors = hnp.arrays(
    np.float64,
    st.integers(min_value=1, max_value=24),
    elements=st.floats(min_value=0, max_value=1),
)


class TestDetection:
    def test_confidence_is_max_class_score(self):
        d = det((0, 0, 1, 1), [0.2, 0.7, 0.4])
        assert d.confidence == 0.7

    def test_scores_must_be_in_unit_interval(self):
        with pytest.raises(InvalidInputError):
            det((0, 0, 1, 1), [0.5, 1.2])
        with pytest.raises(InvalidInputError):
            det((0, 0, 1, 1), [-0.1, 0.5])
        with pytest.raises(InvalidInputError):
            det((0, 0, 1, 1), [0.5, float("nan")])

    def test_scores_must_be_flat(self):
        with pytest.raises(InvalidInputError):
            Detection(BoundingBox(0, 0, 1, 1), np.ones((2, 2)), np.ones(2))


class TestVocabulary:
    def test_counts(self, toy_vocab):
        assert toy_vocab.num_classes == 12
        assert toy_vocab.num_attributes == 8
        assert toy_vocab.class_names[7] == "traffic light"

    def test_rejects_duplicates(self):
        with pytest.raises(InvalidInputError):
            Vocabulary(["a", "a"], ["x"])

    def test_rejects_empty_names(self):
        with pytest.raises(InvalidInputError):
            Vocabulary(["a", ""], ["x"])


class TestTopK:
    def test_rank_order(self):
        t = top_k(np.array([0.1, 0.9, 0.4, 0.7]), 3)
        assert list(t.indices) == [1, 3, 2]
        assert list(t.scores) == [0.9, 0.7, 0.4]

    def test_ties_break_toward_lower_index(self):
        t = top_k(np.array([0.5, 0.9, 0.5, 0.5]), 3)
        assert list(t.indices) == [1, 0, 2]

    def test_k_bounds(self):
        with pytest.raises(InvalidInputError):
            top_k(np.array([0.5]), 2)
        with pytest.raises(InvalidInputError):
            top_k(np.array([0.5]), 0)

    @given(score_vectors, st.data())
    @settings(max_examples=80)
    def test_returns_k_best_in_order(self, scores, data):
        k = data.draw(st.integers(min_value=1, max_value=len(scores)))
        t = top_k(scores, k)
        assert len(t.indices) == k
        picked = list(t.scores)
        assert picked == sorted(scores, reverse=True)[:k]
        # ties resolved by index, so the index sequence is the unique
        # lexicographically smallest one achieving these scores
        for a, b in zip(t.entries, t.entries[1:]):
            assert a[1] > b[1] or (a[1] == b[1] and a[0] < b[0])


class TestNormalizedWeights:
    def test_sums_to_one(self):
        t = top_k(np.array([0.5, 0.3, 0.2]), 3)
        w = normalized_topk_weights(t)
        assert w.sum() == pytest.approx(1.0)
        np.testing.assert_allclose(w, [0.5, 0.3, 0.2])

    def test_all_zero_scores_become_uniform(self):
        t = top_k(np.zeros(4), 4)
        np.testing.assert_array_equal(normalized_topk_weights(t), np.full(4, 0.25))

    @given(score_vectors)
    def test_weights_are_a_distribution(self, scores):
        t = top_k(scores, len(scores))
        w = normalized_topk_weights(t)
        assert np.all(w >= 0)
        assert w.sum() == pytest.approx(1.0, abs=1e-9)


class TestSelectObjects:
    def scene(self, dets):
        return Scene(image_w=100, image_h=100, detections=dets)

    def test_threshold_is_strict(self):
        keep = det((0, 0, 10, 10), [0.5, 0.1])
        drop = det((20, 20, 30, 30), [0.2, 0.2])
        out = select_objects(self.scene([keep, drop]), 0.2, 0.5, 10)
        assert out == [keep]

    def test_nms_suppresses_overlap(self):
        strong = det((0, 0, 10, 10), [0.9, 0.1])
        weak = det((1, 1, 11, 11), [0.8, 0.1])
        far = det((50, 50, 60, 60), [0.7, 0.1])
        out = select_objects(self.scene([strong, weak, far]), 0.1, 0.5, 10)
        assert out == [strong, far]

    def test_confidence_ordering(self):
        low = det((0, 0, 10, 10), [0.4, 0.1])
        high = det((50, 50, 60, 60), [0.9, 0.1])
        out = select_objects(self.scene([low, high]), 0.1, 0.5, 10)
        assert out == [high, low]

    def test_max_objects_truncates(self):
        dets = [det((i * 20, 0, i * 20 + 10, 10), [0.5 + 0.04 * i, 0.1]) for i in range(5)]
        out = select_objects(self.scene(dets), 0.1, 0.5, 2)
        assert out == [dets[4], dets[3]]

    def test_per_class_keeps_cross_class_overlap(self):
        a = det((0, 0, 10, 10), [0.9, 0.05])
        b = det((1, 1, 11, 11), [0.05, 0.8])
        merged = select_objects(self.scene([a, b]), 0.01, 0.3, 10)
        split = select_objects(self.scene([a, b]), 0.01, 0.3, 10, per_class=True)
        assert merged == [a]
        assert split == [a, b]

    def test_empty_scene(self):
        assert select_objects(self.scene([]), 0.2, 0.5, 10) == []


class TestSceneJson:
    def base(self):
        return {
            "image_w": 64,
            "image_h": 48,
            "detections": [
                {
                    "box": [1, 2, 3, 4],
                    "class_scores": [0.1, 0.9],
                    "attribute_scores": [0.3],
                }
            ],
        }

    def test_dense_scores(self):
        scene = scene_from_json(self.base(), 2, 1)
        assert scene.image_w == 64
        assert len(scene.detections) == 1
        assert scene.detections[0].confidence == 0.9
        assert scene.scene_id is None

    def test_sparse_scores(self):
        obj = self.base()
        obj["detections"][0] = {
            "box": [1, 2, 3, 4],
            "class_scores_sparse": [[1, 0.9]],
            "attribute_scores_sparse": [],
        }
        scene = scene_from_json(obj, 2, 1)
        np.testing.assert_array_equal(scene.detections[0].class_scores, [0.0, 0.9])
        np.testing.assert_array_equal(scene.detections[0].attribute_scores, [0.0])

    def test_sparse_index_out_of_range(self):
        obj = self.base()
        obj["detections"][0] = {
            "box": [1, 2, 3, 4],
            "class_scores_sparse": [[5, 0.9]],
            "attribute_scores_sparse": [],
        }
        with pytest.raises(ParseError):
            scene_from_json(obj, 2, 1)

    def test_image_id_becomes_scene_id(self):
        obj = self.base()
        obj["image_id"] = 1234
        assert scene_from_json(obj, 2, 1).scene_id == "1234"

    def test_captions_coerced_to_strings(self):
        obj = self.base()
        obj["captions"] = ["hello", 5]
        assert scene_from_json(obj, 2, 1).captions == ["hello", "5"]

    def test_wrong_score_length(self):
        obj = self.base()
        obj["detections"][0]["class_scores"] = [0.5]
        with pytest.raises(ParseError):
            scene_from_json(obj, 2, 1)

    def test_missing_fields(self):
        obj = self.base()
        del obj["image_w"]
        with pytest.raises(ParseError, match="line 3"):
            scene_from_json(obj, 2, 1, lineno=3)

    def test_bad_box(self):
        obj = self.base()
        obj["detections"][0]["box"] = [1, 2, 3]
        with pytest.raises(ParseError):
            scene_from_json(obj, 2, 1)

    def test_inverted_box_becomes_parse_error(self):
        obj = self.base()
        obj["detections"][0]["box"] = [5, 2, 3, 4]
        with pytest.raises(ParseError):
            scene_from_json(obj, 2, 1)


class TestLoaders:
    def test_load_scenes_fixture(self, data_dir):
        scenes = load_scenes(data_dir / "scenes_toy.jsonl", 12, 8)
        assert [s.scene_id for s in scenes] == ["img-001", "img-002", "img-003"]
        assert [len(s.detections) for s in scenes] == [3, 2, 1]
        assert scenes[0].captions == ["a person next to a car"]

    def test_load_scenes_reports_bad_line(self, tmp_path):
        path = tmp_path / "scenes.jsonl"
        path.write_text('{"image_w": 1, "image_h": 1, "detections": []}\nnot json\n')
        with pytest.raises(ParseError, match="line 2"):
            load_scenes(path, 2, 1)

    def test_load_vocabulary_file(self, data_dir):
        names = load_vocabulary_file(data_dir / "classes_toy.txt")
        assert names[0] == "person"
        assert len(names) == 12

    def test_load_vocabulary_rejects_blank_entry(self, tmp_path):
        path = tmp_path / "names.txt"
        path.write_text("a\n\nb\n")
        with pytest.raises(ParseError, match="line 2"):
            load_vocabulary_file(path)

    def test_load_vocabulary_pair(self, data_dir):
        vocab = load_vocabulary(data_dir / "classes_toy.txt", data_dir / "attributes_toy.txt")
        assert vocab.num_classes == 12 and vocab.num_attributes == 8


def test_scene_requires_positive_size():
    with pytest.raises(InvalidInputError):
        Scene(image_w=0, image_h=10, detections=[])
