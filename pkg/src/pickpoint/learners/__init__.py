"""Primary learners: weighted linear regression, linear SVR, CART and a small MLP."""

from ._base import Regressor, as_design, check_xy
from .linear import ElasticNetModel, LinearModel, elasticnet_objective, fit_elasticnet, fit_linear
from .mlp import MLPModel, MLPParams, fit_mlp
from .svr import SVRModel, fit_svr
from .tree import TreeModel, fit_tree


def predict(model: Regressor, x):
    """Predict with any fitted model; raises ``DimensionMismatch`` on a column-count mismatch."""
    return model.predict(x)


__all__ = [
    "Regressor",
    "LinearModel",
    "ElasticNetModel",
    "SVRModel",
    "TreeModel",
    "MLPModel",
    "MLPParams",
    "fit_linear",
    "fit_elasticnet",
    "elasticnet_objective",
    "fit_svr",
    "fit_tree",
    "fit_mlp",
    "predict",
    "as_design",
    "check_xy",
]
