"""共享夹具。"""

import numpy as np
import pytest

from src.core.classical_models import urn_event
from src.core.event_core import EventStructure
from src.core.interfaces import ISampler
from src.core.quantum_twoslit import SlitGeometry, reference_geometry


class FirstLabelSampler(ISampler):
    """总是返回下标 0 的偏置采样器，用于故障注入。"""

    def draw(self, cdf: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
        return np.zeros(len(uniforms), dtype=np.int64)


@pytest.fixture
def fair_urn() -> EventStructure:
    return urn_event(5, 5)


@pytest.fixture
def geometry() -> SlitGeometry:
    return reference_geometry()


@pytest.fixture
def biased_sampler() -> ISampler:
    return FirstLabelSampler()
