__version__ = "0.1.0"

from buzzscope.errors import BuzzScopeError
from buzzscope.record import RawChannels, WhaleRecord, build_record, read_raw, positive_rate
from buzzscope.synth import SynthConfig, synth_generate
from buzzscope.dives import Dive, DivePhase, detect_dives, annotate_phases
from buzzscope.features import WindowSpec, featurize
from buzzscope.models import UNetConfig, UNetModel, LogisticModel, ForestModel
from buzzscope.models import split, logreg_fit, rf_fit, unet_build, unet_train, predict
from buzzscope.models import checkpoint_save, checkpoint_load
from buzzscope.jerk import compute_jerk, rms_jerk, sweep
from buzzscope.evaluation import extract_events, match_report, dive_report
