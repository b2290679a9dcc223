import numpy as np

from muxq import DenseMatrix, Layout


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def random_activation(rows, cols, seed, scale=1.0) -> DenseMatrix:
    data = philox(seed).standard_normal((rows, cols), dtype=np.float32) * np.float32(scale)
    return DenseMatrix(data, Layout.ACTIVATION)


def random_weight(rows, cols, seed, scale=1.0) -> DenseMatrix:
    data = philox(seed).standard_normal((rows, cols), dtype=np.float32) * np.float32(scale)
    return DenseMatrix(data, Layout.WEIGHT)
