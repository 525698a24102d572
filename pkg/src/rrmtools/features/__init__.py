from rrmtools.features.binning import BinAssignment, decile_bins
from rrmtools.features.covariates import MenuCovariates, cdf_distance, menu_covariates
from rrmtools.features.gate_features import GATE_FEATURE_NAMES, RAW_FEATURE_NAMES, gate_features, raw_encoding, \
    rescale_factor
