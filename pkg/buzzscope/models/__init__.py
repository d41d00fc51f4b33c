from buzzscope.models.split import MODES, ROLES, Part, Fold, SplitPlan, split
from buzzscope.models.logreg import LogisticModel, LogRegConfig, logreg_fit
from buzzscope.models.forest import FlatTree, ForestModel, rf_fit
from buzzscope.models.unet import UNetConfig, UNetModel, EpochStats, TrainResult
from buzzscope.models.unet import unet_build, unet_train, unet_grid_search
from buzzscope.models.unet import FILTER_GRID, BATCH_GRID, LR_GRID
from buzzscope.models.predict import THRESHOLD, Prediction, binarize, predict
from buzzscope.models.predict import expand_window_labels, expand_window_probability
from buzzscope.models.checkpoint import checkpoint_save, checkpoint_load, checkpoint_bytes, checkpoint_parse
