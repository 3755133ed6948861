import numpy as np
import pytest

from pickpoint import ensembles as en
from pickpoint import model_io
from pickpoint.errors import ModelFormatError
from pickpoint.learners import fit_elasticnet, fit_linear, fit_mlp, fit_svr, fit_tree


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(0)
    x = rng.uniform(400, 1000, size=(30, 2))
    return x, x @ [0.6, 0.4] + rng.normal(size=30) * 4


def fitted(x, y):
    p = en.EnsembleParams(n_estimators=6)
    return {
        "linear": fit_linear(x, y),
        "elasticnet": fit_elasticnet(x, y),
        "svr": fit_svr(x, y),
        "tree": fit_tree(x, y, max_depth=4),
        "mlp": fit_mlp(x, y, hidden=8, max_epochs=20),
        "adaboost": en.fit_adaboost_r2(x, y, n=6),
        "bagging": en.fit_bagging(x, y, "linear", 4, seed=2),
        "forest": en.fit_random_forest(x, y, n=4, seed=2**64 - 1),
        "boosting": en.fit_gradient_boosting(x, y, n=5),
        "voting": en.fit_voting(x, y, params=p),
        "voting_std": en.fit_voting(x, y, params=p, standardise=True),
        "voting_avg": en.fit_voting(x, y, params=p, meta="average"),
        "stacking": en.fit_stacking(x, y, params=p),
    }


def test_roundtrip_bit_exact(data, tmp_path):
    x, y = data
    probe = np.random.default_rng(1).uniform(300, 1100, size=(25, 2))
    for name, model in fitted(x, y).items():
        text = model_io.dumps(model)
        back = model_io.loads(text)
        assert type(back) is type(model), name
        assert np.array_equal(back.predict(probe), model.predict(probe)), name
        assert model_io.dumps(back) == text, name
        model_io.save_model(model, tmp_path / f"{name}.txt")
        assert np.array_equal(model_io.load_model(tmp_path / f"{name}.txt").predict(probe), model.predict(probe))


def test_header_and_layout(data):
    text = model_io.dumps(fit_linear(*data))
    lines = text.splitlines()
    assert lines[0] == "pickpoint-model 1" and lines[1] == "begin linear" and lines[-1] == "end linear"


def test_bundle_roundtrip(data, tmp_path):
    x, y = data
    b = model_io.ModelBundle("LR", (fit_linear(x, y), fit_linear(x, -y), fit_linear(x, 2 * y)), 2**63 + 5, "abc123")
    model_io.save_bundle(b, tmp_path / "b.txt")
    back = model_io.load_bundle(tmp_path / "b.txt")
    assert (back.method, back.seed, back.config_digest) == ("LR", 2**63 + 5, "abc123")
    for a, c in zip(b.models, back.models):
        assert np.array_equal(a.predict(x), c.predict(x))


@pytest.mark.parametrize("text", [
    "",
    "not-a-model 1\nbegin linear\nend linear\n",
    "pickpoint-model 99\nbegin linear\n  coef 1\n  intercept 0\nend linear\n",
    "pickpoint-model 1\nbegin linear\n  coef 1\nend linear\n",
    "pickpoint-model 1\nbegin linear\n  coef x\n  intercept 0\nend linear\n",
    "pickpoint-model 1\nbegin linear\n  coef 1\n  intercept 0\n",
    "pickpoint-model 1\nbegin teapot\nend teapot\n",
])
def test_malformed_files_rejected(text):
    with pytest.raises(ModelFormatError):
        model_io.loads(text)


def test_bundle_needs_three_models(data):
    with pytest.raises(ModelFormatError):
        model_io.dumps_bundle(model_io.ModelBundle("LR", (fit_linear(*data),)))
