import numpy as np

from mpslc.core import Metric, PointSet

FLOAT_METRICS = (Metric.L1, Metric.L2, Metric.LINF)


def uniform_points(n, d, seed, metric=Metric.L2, lo=0.0, hi=1.0):
    pts = np.random.default_rng(seed).uniform(lo, hi, (n, d))
    return PointSet(points=pts, metric=metric)


def integer_points(n, d, seed, alphabet=3):
    pts = np.random.default_rng(seed).integers(0, alphabet, (n, d))
    return PointSet(points=pts.astype(float), metric=Metric.L0)
