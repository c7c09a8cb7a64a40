import math
from functools import lru_cache

from hillkrein.stability import full_report
from hillkrein.waves import BMode, ModelParams

L = 2 * math.pi
MULTIPLE = {
    "I": ModelParams(2.0, 3.0, 1.0),
    "II": ModelParams(2.0, 3.0, 5.0),
    "III": ModelParams(2.0, 3.0, 0.0),
    "IV": ModelParams(1.0, 1.0, 1.0, BMode.FREE, 0.7),
}
SEMI = {g: ModelParams(2.0, 3.0, g, BMode.SEMITRIVIAL) for g in (1.0, 2.0, 4.0, 6.0)}


@lru_cache(maxsize=None)
def cached_report(params, family, parity="full", k=0.8, N=256):
    return full_report(params, family, L, k=k, parity=parity, N=N, check_agreement=False)
