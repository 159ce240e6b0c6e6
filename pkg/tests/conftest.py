import math

import pytest

from snn_energy.energy import TechProfile
from snn_energy.network import ConvLayer, FcLayer


def conv(c_in, c_out, h, w=None, k=3, stride=1, bias=True, kw=None):
    """Shape-resolved conv layer with same padding."""
    w = h if w is None else w
    kw = k if kw is None else kw
    return ConvLayer(c_out=c_out, h_kernel=k, w_kernel=kw, stride=stride, c_in=c_in, h_in=h, w_in=w,
                     h_out=math.ceil(h / stride), w_out=math.ceil(w / stride), has_bias=bias)


def fc(n_in, n_out, bias=True):
    return FcLayer(n_out=n_out, n_in=n_in, has_bias=bias)


@pytest.fixture
def profile():
    return TechProfile()
