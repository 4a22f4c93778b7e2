"""Power unit conversions."""

import numpy as np


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watt_to_dbm(watt):
    return 10.0 * np.log10(np.asarray(watt, dtype=float)) + 30.0
