import numpy as np
import pytest

from phwell import HamiltonianDensity, validate_system
from phwell.corpus import build_wave
from phwell.errors import GridTooCoarse, SingularP1
from phwell.halfline import (
    BoundaryFactorization,
    FactorizationFailure,
    HalfLineDecomposition,
    analyze_halfline,
    decompose_P1,
    factorize_boundary,
    solve_resolvent_halfline,
)

P1_WAVE = np.array([[0.0, 1.0], [1.0, 0.0]])


def halfline_system(P1, WB, P0=None, field="real"):
    d = P1.shape[0]
    return validate_system({
        "field": field,
        "interval": "half_line",
        "N": 1,
        "d": d,
        "P": [P0 if P0 is not None else np.zeros((d, d)), P1],
        "H": HamiltonianDensity.constant(np.eye(d)),
        "WB_hat": WB,
    })


def test_decompose_wave_matrix():
    dec = decompose_P1(P1_WAVE)
    assert (dec.n1, dec.n2) == (1, 1)
    np.testing.assert_allclose(dec.Lambda, [[1.0]], atol=1e-14)
    np.testing.assert_allclose(dec.Theta, [[-1.0]], atol=1e-14)
    np.testing.assert_allclose(np.abs(dec.S), np.full((2, 2), 1 / np.sqrt(2)),
                               atol=1e-14)
    np.testing.assert_allclose(dec.S.conj().T @ dec.delta @ dec.S, P1_WAVE,
                               atol=1e-14)


def test_decompose_negative_definite():
    dec = decompose_P1(-np.eye(3))
    assert (dec.n1, dec.n2) == (0, 3)
    np.testing.assert_allclose(np.abs(dec.S), np.eye(3), atol=1e-14)


def test_decompose_diagonal_permutation():
    dec = decompose_P1(np.diag([2.0, -3.0, -5.0]))
    assert (dec.n1, dec.n2) == (1, 2)
    np.testing.assert_allclose(np.diag(dec.Lambda), [2.0])
    np.testing.assert_allclose(np.diag(dec.Theta), [-3.0, -5.0])
    # rows of S are permutation rows up to sign
    np.testing.assert_allclose(np.sort(np.abs(dec.S), axis=None)[-3:], [1, 1, 1])


def test_decompose_rejects_zero_eigenvalue():
    with pytest.raises(SingularP1):
        decompose_P1(np.diag([1.0, 0.0]))


def test_factorize_wave_boundary():
    dec = decompose_P1(P1_WAVE)
    for u in (0.5, 2.0, -1.0):
        WB = 0.5 * np.array([[u - 1.0, u + 1.0]])
        fact = factorize_boundary(WB, dec)
        assert isinstance(fact, BoundaryFactorization)
        assert fact.residual < 1e-12
        # Lambda + U* Theta U = 1 - |u|^2 regardless of eigenvector signs
        M = dec.Lambda + fact.U.conj().T @ dec.Theta @ fact.U
        assert M[0, 0] == pytest.approx(1.0 - abs(u) ** 2, abs=1e-12)


def test_factorize_full_clamp_negative_p1():
    dec = decompose_P1(-np.eye(3))
    fact = factorize_boundary(np.eye(3), dec)
    assert isinstance(fact, BoundaryFactorization)
    assert fact.U.shape == (3, 0)


def test_factorize_empty_boundary_positive_p1():
    dec = decompose_P1(np.eye(3))
    fact = factorize_boundary(np.zeros((0, 3)), dec)
    assert isinstance(fact, BoundaryFactorization)
    assert fact.B.shape == (0, 0) and fact.U.shape == (0, 3)


def test_factorize_wrong_row_count():
    dec = decompose_P1(np.diag([1.0, -1.0, -2.0]))  # n2 = 2
    fact = factorize_boundary(np.array([[1.0, 0.0, 0.0]]), dec)
    assert isinstance(fact, FactorizationFailure)
    assert fact.reason == "wrong_row_count"


def test_factorize_singular_trailing_block():
    dec = decompose_P1(np.diag([1.0, -1.0]))  # S = I, columns (pos, neg)
    fact = factorize_boundary(np.array([[1.0, 0.0]]), dec)  # hits only Lambda block
    assert isinstance(fact, FactorizationFailure)
    assert fact.reason == "singular_trailing_block"


@pytest.mark.parametrize("u,contraction,unitary", [
    (0.0, True, False),
    (0.5, True, False),
    (1.0, True, True),
    (-1.0, True, True),
    (0.9j, True, False),
    (1.01, False, False),
    (2.0, False, False),
    (-3.0, False, False),
])
def test_wave_family_verdicts(u, contraction, unitary):
    sys = build_wave("half_line", u)
    v = analyze_halfline(sys)
    assert (v.consensus == "contraction") == contraction
    assert (v.unitary is True) == unitary
    assert not v.discrepancy


def test_wave_u2_kernel_agrees():
    # condition 3 route: kernel vector (3, -1) gives y* P1 y = -6 < 0
    sys = build_wave("half_line", 2.0)
    v = analyze_halfline(sys)
    assert not v["TA.3"].holds and not v["TA.4"].holds
    y = np.array([3.0, -1.0])
    assert y @ P1_WAVE @ y == pytest.approx(-6.0)


def test_full_clamp_negative_p1_contracts():
    v = analyze_halfline(halfline_system(-np.eye(2), np.eye(2)))
    assert v.consensus == "contraction"
    assert v["TA.3"].diagnostics["kernel_dim"] == 0.0


def test_no_conditions_positive_p1_contracts():
    v = analyze_halfline(halfline_system(np.eye(2), np.zeros((0, 2))))
    assert v.consensus == "contraction"


def test_too_many_conditions_dissipative_only():
    # P1 < 0 with full clamp leaves k > min(n1, n2) = 0 for the unitary family
    v = analyze_halfline(halfline_system(-np.eye(2), np.eye(2)))
    assert v["TA2.4"].applicable is False
    assert v.unitary is None  # conservative on a trivial kernel, not certifiable


def test_balanced_transmission_unitary():
    v = analyze_halfline(halfline_system(np.diag([1.0, -1.0]),
                                         np.array([[1.0, 1.0]])))
    assert v.unitary is True
    assert v.consensus == "contraction"


def test_re_p0_gates_contraction():
    sys = halfline_system(-np.eye(2), np.eye(2), P0=0.3 * np.eye(2))
    v = analyze_halfline(sys)
    assert v.consensus == "not_contraction"


def test_rank_deficient_rows_are_reduced():
    WB = np.array([[1.0, 1.0], [2.0, 2.0]])
    v = analyze_halfline(halfline_system(np.diag([1.0, -1.0]), WB))
    assert v.warnings
    assert v.consensus == "contraction"
    assert v.unitary is True


def test_unitary_flip_gives_contraction():
    # conservative system stays contractive after flipping the sign of P1, P0
    for u in (1.0, -1.0):
        sys = build_wave("half_line", u)
        v = analyze_halfline(sys)
        assert v.unitary is True
        flipped = validate_system({
            "field": sys.field, "interval": "half_line", "N": 1, "d": 2,
            "P": [-sys.P[0], -sys.P[1]],
            "H": sys.H, "WB_hat": sys.WB_hat,
        })
        assert analyze_halfline(flipped).consensus == "contraction"


def unit_decomp(n1, n2):
    d = n1 + n2
    lam = np.eye(n1) if n1 else np.zeros((0, 0))
    theta = -np.eye(n2) if n2 else np.zeros((0, 0))
    return HalfLineDecomposition(S=np.eye(d, dtype=complex), Lambda=lam,
                                 Theta=theta, n1=n1, n2=n2)


def test_resolvent_closed_form():
    decomp = unit_decomp(1, 0)
    L = 30.0
    n = 30000
    t = np.linspace(0, L, n + 1)
    y = np.exp(-t)[None, :]
    x, res = solve_resolvent_halfline(decomp, np.zeros((0, 1)), y, L=L)
    assert res <= 1e-6
    assert np.max(np.abs(x[0] - np.exp(-t) / 2)) <= 1e-5


def test_resolvent_zero_rhs():
    decomp = unit_decomp(1, 1)
    y = np.zeros((2, 2001))
    x, res = solve_resolvent_halfline(decomp, np.zeros((1, 1)), y, L=30.0)
    np.testing.assert_allclose(x, 0.0, atol=1e-14)
    assert res <= 1e-12


def test_resolvent_negative_block_residual():
    decomp = unit_decomp(0, 1)
    L = 30.0
    t = np.linspace(0, L, 6001)
    y = np.exp(-t)[None, :]
    x, res = solve_resolvent_halfline(decomp, np.zeros((1, 0)), y, L=L)
    assert res <= 1e-6
    assert abs(x[0, 0]) < 1e-14  # x2(0) = -U x1(0) with empty positive block


def test_resolvent_coupling_and_refinement():
    decomp = unit_decomp(1, 1)
    U = np.array([[0.7]])
    L = 30.0
    resids = []
    for n in (1500, 3000, 6000):
        t = np.linspace(0, L, n + 1)
        y1 = (1.0 + 0.5 * t) * np.exp(-t)
        y = np.vstack([y1, np.exp(-t)])
        x, res = solve_resolvent_halfline(decomp, U, y, L=L)
        assert abs(x[1, 0] + 0.7 * x[0, 0]) < 1e-13
        resids.append(res)
    for a, b in zip(resids, resids[1:]):
        assert b < a / 1.8  # at least first order (measured ~ second)


def test_resolvent_grid_too_coarse():
    decomp = unit_decomp(1, 0)
    t = np.linspace(0, 30.0, 101)
    y = np.exp(-t)[None, :]
    with pytest.raises(GridTooCoarse):
        solve_resolvent_halfline(decomp, np.zeros((0, 1)), y, L=30.0,
                                 residual_threshold=1e-9)


def test_resolvent_callable_rhs_default_grid():
    decomp = unit_decomp(1, 0)
    x, res = solve_resolvent_halfline(decomp, np.zeros((0, 1)),
                                      lambda t: np.array([np.exp(-t)]))
    assert x.shape == (1, 3001)  # default step L / 3000
    assert res <= 5e-5  # trapezoid at the default step
    assert abs(x[0, 0] - 0.5) <= 5e-5
