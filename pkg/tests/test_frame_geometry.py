import numpy as np
import pytest
from numpy.testing import assert_allclose

from spinordeform.expr import parse_matrix
from spinordeform.frame_geometry import (
    ChartPoint,
    CommutationCoeffs,
    DegenerateFrame,
    Field,
    FieldNotDifferentiable,
    FrameField,
    commutation_coefficients,
    coordinate_frame,
    directional_derivative,
    frame_admissibility,
    frame_derivatives,
)

P = [0.3, -0.2, 0.5, 0.1]


def test_chart_point_validation():
    assert ChartPoint([1, 2, 3, 4]).x == (1.0, 2.0, 3.0, 4.0)
    with pytest.raises(ValueError):
        ChartPoint([1, 2, 3])
    with pytest.raises(ValueError):
        ChartPoint([1, 2, np.nan, 4])


def test_field_fd_matches_analytic():
    f = Field.from_expressions(parse_matrix([["exp(x0)*x1", "sin(x2)"], ["x3^2", "1"]], (2, 2)))
    assert_allclose(f.without_grad().partials(P), f.partials(P), atol=1e-9)


def test_central_difference_error_quarters_when_step_halves():
    f = Field.from_expressions(parse_matrix([["exp(2*x0)*sin(3*x1)"]], (1, 1)))
    exact = f.partials(P)
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        fd = Field(f.fn, f.shape, None, fd_step=h).partials(P)
        errs.append(np.max(np.abs(fd - exact)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)


def test_non_differentiable_field_raises():
    f = Field(lambda x: np.sqrt(x[0]) if x[0] >= 0 else np.nan, ())
    with pytest.raises(FieldNotDifferentiable):
        f.partials([0.0, 0, 0, 0])


def test_coordinate_frame_is_holonomic():
    assert np.all(commutation_coefficients(coordinate_frame(), P).c == 0.0)


def test_exp_scale_commutators(exp_frame):
    # [d0, e^{-x0} di] = -e^{-x0} di
    c = commutation_coefficients(exp_frame, P).c
    expected = np.zeros((4, 4, 4))
    for i in (1, 2, 3):
        expected[i, 0, i] = -1.0
        expected[i, i, 0] = 1.0
    assert_allclose(c, expected, atol=1e-14)


def _nested_fd(frame, f, p, h=1e-4):
    """Upsilon_i(Upsilon_j f) by central differences of the inner derivative."""

    def inner(x):
        E = frame.coeffs(x)
        return E @ f.partials(x)

    outer = Field(inner, (4,), None, fd_step=h).partials(p)  # [nu, j]
    return np.einsum("in,nj->ij", frame.matrix(p), outer)


def test_commutators_act_on_test_function():
    # independent oracle: apply both sides of the bracket to a scalar function
    frame = FrameField.from_expressions(
        [
            ["1", "0.2*x1", "0", "0"],
            ["0", "exp(-x0)", "0.1*sin(x2)", "0"],
            ["0.1*x3", "0", "1 + 0.2*x0^2", "0"],
            ["0", "0", "0.3*cos(x1)", "exp(x2/4)"],
        ]
    )
    f = Field.from_expressions(parse_matrix([["sin(x0)*exp(x1) + x2*x3^2 + cos(x1*x2)"]], (1, 1)).reshape(()))
    LL = _nested_fd(frame, f, P)
    lhs = LL - LL.T
    c = commutation_coefficients(frame, P).c
    rhs = np.einsum("kij,k->ij", c, frame_derivatives(f, frame, P))
    assert_allclose(lhs, rhs, atol=1e-6)


def test_commutation_coeffs_antisymmetrized():
    c = CommutationCoeffs(np.arange(64.0).reshape(4, 4, 4)).c
    assert_allclose(c, -c.transpose(0, 2, 1))
    with pytest.raises(ValueError):
        c[0, 0, 0] = 1.0


def test_directional_derivative_agrees_with_stack(exp_frame):
    f = Field.from_expressions(parse_matrix([["x0*x1", "exp(x2)"]], (1, 2)).reshape(2))
    stack = frame_derivatives(f, exp_frame, P)
    for i in range(4):
        assert_allclose(directional_derivative(f, exp_frame, i, P), stack[i])


def test_degenerate_frame_rejected():
    frame = FrameField.from_expressions([["1", "0", "0", "0"], ["x0", "0", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]])
    with pytest.raises(DegenerateFrame):
        frame.matrix(P)


def test_frame_admissibility_flags():
    assert frame_admissibility(np.eye(4)).admissible
    flip = np.diag([1.0, -1.0, 1.0, 1.0])
    flags = frame_admissibility(flip)
    assert not flags.det_positive and flags.time_component_positive
    flags = frame_admissibility(np.diag([-1.0, -1.0, 1.0, 1.0]))
    assert flags.det_positive and not flags.time_component_positive
    with pytest.raises(ValueError):
        frame_admissibility(np.full((4, 4), np.inf))
