from .forest import ForestModel, child_rng, et_fit, forest_score, rf_fit, rf_importance
from .knn import KnnModel, knn_distance, knn_fit, knn_score
from .logistic import LogisticConfig, LogisticModel, lr_fit, lr_gradient, lr_loss, sigmoid
from .svc import OneVsOneModel, SvcConfig, SvcModel, ovo_ensemble_size, ovo_fit, svc_fit, svc_score
from .registry import DEFAULTS, MODEL_ORDER, fit_model, parse_override, resolve_params
from .serialize import dumps, load_model, loads, save_model
