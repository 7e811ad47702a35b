from .errors import (
    DimensionMismatch,
    Divergence,
    EmptyModel,
    LearningError,
    RankDeficient,
    SignatureMismatch,
    ZeroMeanTruth,
)
from .metrics import nmae
from .models import (
    KNNModel,
    MLPModel,
    PolyRModel,
    Standardizer,
    TrainConfig,
    fit_knn,
    fit_mlp,
    fit_polyr,
    mlp_loss_and_gradients,
    predict_knn,
    predict_mlp,
    predict_polyr,
)
from .pilots import FIELD_NAMES, PilotRunRecord, read_pilot_csv, write_pilot_csv
from .registry import (
    CONFIGURATION_TARGETS,
    ESTIMATION_TARGETS,
    TIME_FEATURES,
    load_model,
    model_from_dict,
    model_to_dict,
    register_externals,
    save_model,
    time_model_frame,
    training_frame,
)
from .workflow import (
    DEFAULT_GRIDS,
    EXTERNAL_TARGETS,
    fit_external,
    learn_externals,
    learn_time_model,
)
from .tuning import (
    FitReport,
    fit_method,
    grid_search,
    min_train_fraction_sweep,
    predict_method,
    train_test_split,
)

__all__ = [
    "CONFIGURATION_TARGETS",
    "DEFAULT_GRIDS",
    "EXTERNAL_TARGETS",
    "DimensionMismatch",
    "Divergence",
    "ESTIMATION_TARGETS",
    "EmptyModel",
    "FIELD_NAMES",
    "FitReport",
    "KNNModel",
    "LearningError",
    "MLPModel",
    "PilotRunRecord",
    "PolyRModel",
    "RankDeficient",
    "SignatureMismatch",
    "Standardizer",
    "TIME_FEATURES",
    "TrainConfig",
    "ZeroMeanTruth",
    "fit_external",
    "fit_knn",
    "fit_method",
    "fit_mlp",
    "fit_polyr",
    "grid_search",
    "learn_externals",
    "learn_time_model",
    "load_model",
    "min_train_fraction_sweep",
    "mlp_loss_and_gradients",
    "model_from_dict",
    "model_to_dict",
    "nmae",
    "predict_knn",
    "predict_method",
    "predict_mlp",
    "predict_polyr",
    "read_pilot_csv",
    "register_externals",
    "save_model",
    "time_model_frame",
    "train_test_split",
    "training_frame",
    "write_pilot_csv",
]
