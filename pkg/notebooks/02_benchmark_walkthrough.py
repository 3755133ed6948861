# %% [markdown]
# # One benchmark run, end to end
#
# Simulate a 48-pose dataset, split it 38/10, fit all eleven learned methods
# per axis, score the two analytical baselines, and simulate picking trials on
# an independent 27-pose harvest set. Then persist one method's three axis
# models and check that reloading reproduces its predictions bit for bit.

# %%
import tempfile
from pathlib import Path

import numpy as np

from pickpoint import bench, model_io
from pickpoint.config import config_digest, load_config
from pickpoint.data import split

cfg = load_config()
seed = 0
report = bench.bench_run(cfg, seed)
print(report.to_table())

# %% [markdown]
# ## Save and reload a method

# %%
data = bench.simulate(cfg, seed)
train, test = split(data, cfg.scene.test_fraction, seed)
models = bench.fit_method(bench.MethodId.ADABOOST, train, cfg, seed)
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "model_AdaBoost.txt"
    model_io.save_bundle(model_io.ModelBundle("AdaBoost", models, seed, config_digest(cfg)), path)
    print(path.read_text().splitlines()[:6])
    back = model_io.load_bundle(path)
same = np.array_equal(bench.predict_method(back.models, test), bench.predict_method(models, test))
print("reloaded predictions identical:", same)
print("test MED", round(bench.med(bench.predict_method(models, test), test.g), 3), "mm;",
      "bench row", round(report["AdaBoost"].med, 3), "mm")
