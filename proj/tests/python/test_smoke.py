"""Smoke tests for the python bindings.

The heavy numerical checks live in the C++ suites; these exercise the binding
surface end to end: array conversions, error translation, and the main
operations chained the way a notebook user would.
"""

import numpy as np
import pytest

import icondet


def checker_icon(shade=255, size=32):
    rgba = np.zeros((size, size, 4), dtype=np.uint8)
    for y in range(size):
        for x in range(size):
            on = ((x // 4) + (y // 4)) % 2 == 0
            rgba[y, x] = (shade if on else 30, 40, 200 if not on else shade, 255)
    return icondet.Icon.from_rgba(rgba)


def test_feature_dims_add_up():
    assert icondet.MC_DIM == 26
    assert icondet.HOG_DIM == 576
    assert icondet.AE_DIM == 512
    assert icondet.ICON_FEATURE_DIM == 1114


def test_entropy_closed_forms():
    assert icondet.section_entropy(b"\x00" * 1024) == 0.0
    uniform = bytes(range(256)) * 4
    assert abs(icondet.section_entropy(uniform) - 8.0) < 1e-12
    assert abs(icondet.section_entropy(b"\x00" * 512 + b"\xff" * 512) - 1.0) < 1e-12


def test_parse_pe_rejects_garbage():
    with pytest.raises(ValueError):
        icondet.parse_pe(b"GARBAGE")


def test_png_round_trip_and_compositing():
    icon = checker_icon()
    png = icondet.encode_png(icon)
    back = icondet.decode_icon(png)
    assert back.width == 32 and back.height == 32
    assert np.array_equal(back.rgba, icon.rgba)

    rgb = icondet.composite(back, background=1.0)
    assert rgb.shape == (32, 32, 3)
    assert rgb.min() >= 0.0 and rgb.max() <= 1.0


def test_engineered_features_have_documented_shapes():
    rgb = icondet.composite(checker_icon())
    mc = icondet.mc_features(rgb)
    hog = icondet.hog_features(rgb)
    assert mc.shape == (26,)
    assert hog.shape == (576,)
    assert np.all(mc[::2] >= 0.0) and np.all(mc[::2] <= 1.0)  # means in [0, 1]
    assert np.all(hog >= 0.0)


def test_autoencoder_encode_and_determinism():
    ae1 = icondet.AeModel.init(seed=7)
    ae2 = icondet.AeModel.init(seed=7)
    rgb = icondet.composite(checker_icon())
    z1 = ae1.encode(rgb)
    z2 = ae2.encode(rgb)
    assert z1.shape == (512,)
    assert np.array_equal(z1, z2)
    assert ae1.latent_dim == 512

    features = icondet.icon_features(rgb, ae1)
    assert features.shape == (1114,)
    assert np.array_equal(features[:26], icondet.mc_features(rgb))


def test_gradient_check_is_tight():
    assert icondet.ae_gradient_check(seed=0) < 1e-5


def test_cluster_model_build_and_assign(tmp_path):
    rng = np.random.default_rng(3)
    a = rng.normal((0.0, 0.0), 0.05, size=(30, 2))
    b = rng.normal((10.0, 0.0), 0.05, size=(30, 2))
    X = np.vstack([a, b])
    model = icondet.ClusterModel.build(X, min_cluster_size=8, seed=5)
    assert model.num_dense_clusters == 2
    assert model.num_ids == model.num_dense_clusters + model.num_outlier_clusters

    cluster_id, outlier = model.assign(X[0])
    assert cluster_id == model.training_ids[0]
    assert isinstance(outlier, bool)

    path = tmp_path / "cluster.json"
    model.save(path)
    loaded = icondet.ClusterModel.load(path)
    assert loaded.assign(X[0]) == model.assign(X[0])


def test_classifier_round_trip():
    rng = np.random.default_rng(11)
    n = 120
    y = np.where(np.arange(n) % 2 == 0, 1, -1)
    X = rng.normal(size=(n, 3))
    X[:, 0] += 1.2 * y  # separable-ish signal

    model = icondet.fit_model("logreg_l2", X, y.tolist(), alpha=1e-3)
    scores = icondet.predict_scores(model, X)
    report = icondet.evaluate(model, X, y.tolist())
    assert report["accuracy"] > 0.85
    assert report["auc"] > 0.9

    points, auc = icondet.roc_auc(scores.tolist(), y.tolist())
    assert auc == report["auc"]
    assert points[0].tolist() == [0.0, 0.0]
    assert points[-1].tolist() == [1.0, 1.0]


def test_roc_tie_convention():
    _, auc = icondet.roc_auc([1.0, 1.0, 1.0, 1.0], [1, -1, 1, -1])
    assert auc == 0.5


def test_stratified_helpers():
    y = [1] * 10 + [-1] * 10
    train, test = icondet.stratified_split(y, 0.2, seed=1)
    assert len(train) == 16 and len(test) == 4
    assert sorted(train + test) == list(range(20))

    folds = icondet.stratified_kfold(y, 5, seed=1)
    assert sorted(i for fold in folds for i in fold) == list(range(20))


def test_one_hot_bounds():
    assert icondet.one_hot(1, 3) == [0.0, 1.0, 0.0]
    with pytest.raises(ValueError):
        icondet.one_hot(3, 3)


def test_tune_alpha_surface():
    rng = np.random.default_rng(17)
    n = 40
    y = np.where(np.arange(n) % 2 == 0, 1, -1)
    X = rng.normal(size=(n, 2))
    X[:, 0] += y
    best, curve = icondet.tune_alpha("logreg_l1", X, y.tolist(), [1e-3, 1e-1], k=4, seed=3)
    assert best in (1e-3, 1e-1)
    assert len(curve) == 2
    assert set(curve[0]) == {
        "alpha", "cv_accuracy", "cv_accuracy_std", "cv_tpr", "cv_tpr_std", "cv_tnr", "cv_tnr_std",
    }
