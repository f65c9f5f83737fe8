import pytest

from slidekit import kernels

BACKENDS = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    with kernels.backend(request.param):
        yield request.param
