import math

import numpy as np
import pytest

import colortac


def test_force_law():
    p = colortac.MechanicsParams.standard()
    assert colortac.force_from_depth(p, 3.0) == 18.0
    assert colortac.force_from_depth(p, 0.6) == pytest.approx(3.6, rel=1e-12)
    with pytest.raises(IndexError):
        colortac.force_from_depth(p, 3.5)


def test_labels():
    assert colortac.class_index(12, 3) == 62
    assert colortac.split_class_index(124) == (24, 5)
    assert colortac.location_coords(0) == (-16.0, -16.0)
    assert colortac.depth_of_level(5) == 3.0


def test_gaussian_intensity():
    p = colortac.OpticsParams()
    assert colortac.gaussian_intensity(p.beam_spot_mm, p) == pytest.approx(math.exp(-2), abs=1e-15)
    with pytest.raises(ValueError):
        colortac.gaussian_intensity(-1.0, p)


def test_render_and_extract():
    response = colortac.deformed_response(12, 5)
    frame = colortac.render_frame(response)
    assert frame.shape == (480, 640, 3)
    assert frame.dtype == np.uint8
    features = np.array(colortac.extract_roi_means(frame))
    assert np.max(np.abs(features - np.array(response))) <= 1 / 255
    with pytest.raises(colortac.EmptyRoiError):
        colortac.extract_roi_means(np.zeros((480, 640, 3), dtype=np.uint8))


def test_dataset_and_classifiers(tmp_path):
    data = colortac.generate_sweep(seed=3, noise_sigma=0.0, n_trials=3, samples_per_state=1)
    assert len(data) == 375
    assert data.features().shape == (375, 27)
    assert data.labels()[:, 2].max() == 5

    path = tmp_path / "d.csv"
    data.save(path)
    again = colortac.Dataset.load(path)
    assert again.hash() == data.hash()
    assert np.array_equal(again.features(), data.features())

    train, test = colortac.split_by_trial(data, 2, 1)
    for method in ("lda", "qda", "svm", "knn"):
        model = colortac.train(method, train)
        assert colortac.evaluate(model, test)["accuracy"] == 1.0

    hier = colortac.train_hierarchical(train, "knn")
    metrics = colortac.evaluate_hierarchical(hier, test)
    assert metrics["combined_accuracy"] == 1.0
    row = test.features()[40].astype(float).tolist()
    assert hier.predict(row) == tuple(int(v) for v in test.labels()[40, 1:])


def test_train_eval_report():
    data = colortac.generate_sweep(seed=1, noise_sigma=0.02, n_trials=4, samples_per_state=1)
    report = colortac.train_eval(data, ["lda"], train_trials=3, folds=3, seed=2)
    assert report["seed"] == 2
    assert report["rows"][0]["method"] == "lda"
    assert 0.0 <= report["rows"][0]["generalization_accuracy"] <= 1.0
    assert report == colortac.train_eval(data, ["lda"], train_trials=3, folds=3, seed=2)
