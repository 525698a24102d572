from rrmtools.lottery.lottery import Lottery, Menu, canonicalize, mode
from rrmtools.lottery.dominance import DominanceResult, fsd_compare, survival
from rrmtools.lottery.numeric import contrast, product_arrays, product_state_space, weighted_median
