import sys

import numpy as np
import pytest

from spinordeform.connection import Geometry
from spinordeform.expr import parse, parse_matrix
from spinordeform.frame_geometry import Field, FrameField, coordinate_frame

EXP_FRAME_ROWS = [
    ["1", "0", "0", "0"],
    ["0", "exp(-x0)", "0", "0"],
    ["0", "0", "exp(-x0)", "0"],
    ["0", "0", "0", "exp(-x0)"],
]

H_ROWS = [
    ["0.3*sin(x1)+0.2", "0.1*x0", "0.05*cos(x2)", "0"],
    ["0.1*x0", "0.2*x3", "0.1", "0.02*x1*x2"],
    ["0.05*cos(x2)", "0.1", "-0.1*exp(0.2*x0)", "0"],
    ["0", "0.02*x1*x2", "0", "0.1*sin(x0+x3)"],
]

PSI_COMPONENTS = [
    ["cos(x1)+0.5", "0.1*x2"],
    ["0.3*x0", "exp(0.1*x1)"],
    ["sin(x2*x3)", "0.4"],
    ["0.2", "x0*x1"],
]


def diag_rows(entry):
    return [[entry if i == j else "0" for j in range(4)] for i in range(4)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def exp_frame():
    return FrameField.from_expressions(EXP_FRAME_ROWS, "exp-scale")


@pytest.fixture
def exp_geom(exp_frame):
    return Geometry.orthonormal_frame(exp_frame, "exp-scale")


@pytest.fixture
def conformal_geom():
    tetrad = Field.from_expressions(parse_matrix(diag_rows("exp(x0)")), "tetrad")
    return Geometry.from_tetrad(coordinate_frame(), tetrad, "conformal")


@pytest.fixture
def flat_geom():
    return Geometry.orthonormal_frame(coordinate_frame(), "flat")


@pytest.fixture
def h_field():
    return Field.from_expressions(parse_matrix(H_ROWS), "h")


@pytest.fixture
def psi_field():
    re = np.array([parse(c[0]) for c in PSI_COMPONENTS], dtype=object)
    im = np.array([parse(c[1]) for c in PSI_COMPONENTS], dtype=object)
    return Field.from_complex_expressions(re, im, "psi")


@pytest.fixture(params=["exp", "conformal"])
def curved_geom(request, exp_geom, conformal_geom):
    return exp_geom if request.param == "exp" else conformal_geom


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
