from enum import Enum

from .attitude import build_attitude
from .quad2d import build_quad2d


class BenchmarkId(str, Enum):
    QUAD2D = "quad2d"
    ATTITUDE = "attitude"


BUILDERS = {
    BenchmarkId.QUAD2D: build_quad2d,
    BenchmarkId.ATTITUDE: build_attitude,
}


def build_model(benchmark):
    return BUILDERS[BenchmarkId(benchmark)]()
