import random
import subprocess
import sys

import pytest

from flowlab import _kernels_py, kernels
from flowlab.lattice import LatticeSet, QuasiRect, dissipation_units, perimeter_count
from flowlab.oracle import Canvas, Window
from flowlab.steiner import rearrange

compiled = pytest.importorskip("flowlab._kernels")


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_env_forces_fallback():
    code = "from flowlab import kernels; print(kernels.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={"FLOWLAB_PURE": "1", "PATH": ""}, check=True)
    assert out.stdout.strip() == "python"


@pytest.fixture(scope="module")
def canvas():
    return Canvas(-3, 4, -3, 4)


def _random_masks(canvas, count, seed):
    rng = random.Random(seed)
    cells = [(i, j) for j in range(-1, 3) for i in range(-1, 3)]
    for _ in range(count):
        yield canvas.mask([c for c in cells if rng.random() < 0.5])


@pytest.mark.parametrize("impl", [compiled, _kernels_py], ids=["cython", "python"])
def test_perimeter_matches_lattice(impl, canvas):
    for mask in _random_masks(canvas, 200, 1):
        assert impl.perimeter(mask, canvas.w) == perimeter_count(canvas.cells(mask))


@pytest.mark.parametrize("impl", [compiled, _kernels_py], ids=["cython", "python"])
def test_weighted_matches_dissipation(impl, canvas):
    old = QuasiRect(1, 3, 2, 1).cells()
    weights = canvas.weights(old)
    ref = canvas.mask(old)
    for mask in _random_masks(canvas, 200, 2):
        assert impl.weighted(mask ^ ref, weights) == dissipation_units(canvas.cells(mask), old)


@pytest.mark.parametrize("impl", [compiled, _kernels_py], ids=["cython", "python"])
def test_steiner_matches_reference(impl, canvas):
    qr = QuasiRect(1, 3, 2, 1)
    for mask in _random_masks(canvas, 200, 3):
        if not mask:
            continue
        mid, out = impl.steiner(mask, canvas.w, canvas.h, canvas.i0, canvas.j0, True)
        rep = rearrange(LatticeSet(1, canvas.cells(mask)), qr)
        assert canvas.cells(mid) == rep.after_rows.cells
        assert canvas.cells(out) == rep.output.cells


def test_backends_agree_on_min_energy():
    w = Window.centred(4)
    old = QuasiRect(1, 2, 2).cells()
    canvas = Canvas.covering(w.cells(), old)
    args = ([canvas.bit(c) for c in w.cells()], 4, canvas.mask(old),
            canvas.weights(old), canvas.w, 3, 2)
    assert tuple(compiled.min_energy(*args)) == tuple(_kernels_py.min_energy(*args))


def test_canvas_size_limit():
    with pytest.raises(ValueError):
        Canvas(0, 8, 0, 8)
