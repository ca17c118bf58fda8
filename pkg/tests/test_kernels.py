import numpy as np
import pytest

from bathsynth import _kernels
from bathsynth.lindblad import FockDensityMatrix, build_generators
from bathsynth.network import DimerSpec

needs_core = pytest.mark.skipif("cython" not in _kernels.BACKENDS,
                                reason="compiled kernels not built")


def test_fallback_always_available():
    assert "python" in _kernels.BACKENDS
    assert _kernels.get("python").permanents is not None
    with pytest.raises(ValueError):
        _kernels.get("fortran")


@needs_core
@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_permanents_agree(n):
    rng = np.random.default_rng(n)
    mats = rng.normal(size=(50, n, n)) + 1j * rng.normal(size=(50, n, n))
    a = _kernels.get("python").permanents(mats)
    b = _kernels.get("cython").permanents(mats)
    np.testing.assert_allclose(b, a, rtol=1e-13, atol=1e-14)


@pytest.mark.parametrize("backend", sorted(_kernels.BACKENDS))
def test_permanent_rejects_large(backend):
    with pytest.raises(ValueError):
        _kernels.get(backend).permanents(np.ones((1, 4, 4)))
    with pytest.raises(ValueError):
        _kernels.get(backend).permanents(np.ones((2, 3)))


@pytest.mark.parametrize("backend", sorted(_kernels.BACKENDS))
def test_known_permanents(backend):
    per = _kernels.get(backend).permanents
    assert per(np.ones((1, 3, 3)))[0] == 6
    assert per(np.array([[[1, 2], [3, 4]]]))[0] == 10


@needs_core
def test_rk4_agree_and_report_failure_alike():
    gen = build_generators(DimerSpec(0.3, 0.25))
    rho = FockDensityMatrix.pure(gen.basis, (1, 1)).rho
    args = (rho, gen.h_eff, gen.jump, gen.rate)
    a, fa = _kernels.get("python").lindblad_rk4(*args, 0.01, 500, 50, 1e-6)
    b, fb = _kernels.get("cython").lindblad_rk4(*args, 0.01, 500, 50, 1e-6)
    assert fa == fb == -1
    np.testing.assert_allclose(b, a, atol=1e-14)
    a, fa = _kernels.get("python").lindblad_rk4(*args, 5.0, 40, 1, 1e-6)
    b, fb = _kernels.get("cython").lindblad_rk4(*args, 5.0, 40, 1, 1e-6)
    assert fa > 0 and fb > 0
    assert len(a) == fa and len(b) == fb


def test_pure_python_env_switch():
    import subprocess
    import sys
    out = subprocess.run([sys.executable, "-c", "import bathsynth; print(bathsynth.KERNEL_BACKEND)"],
                         env={"BATHSYNTH_PURE_PYTHON": "1", "PATH": ""}, capture_output=True,
                         text=True, check=True)
    assert out.stdout.strip() == "python"
