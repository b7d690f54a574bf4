import json
import pathlib

import numpy as np
import pytest

from phwell.cli import analyze
from phwell.config import system_to_dict, verdict_to_json
from phwell.corpus import (
    CORPUS,
    build_binary_tree,
    build_path_graph,
    build_wave,
    random_system,
    shift_matrix,
    tree_coupling,
)
from phwell.interval import extract_v, sigma_form
from phwell.model import build_q_for_system, split_boundary_operator

GOLDEN = pathlib.Path(__file__).parent / "golden"


def test_path_graph_structure():
    sys = build_path_graph(4)
    L = shift_matrix(4)
    np.testing.assert_allclose(sys.WB_hat.real, np.hstack([np.eye(4), -L]))
    assert np.all(sys.WB_hat.imag == 0)


def test_path_graph_sigma_form_d2():
    sys = build_path_graph(2)
    W1, W2 = split_boundary_operator(sys.WB_hat, build_q_for_system(sys))
    np.testing.assert_allclose(sigma_form(W1, W2),
                               0.5 * np.diag([0.0, 1.0]), atol=1e-14)


def test_path_graph_v_is_shift():
    sys = build_path_graph(8)
    W1, W2 = split_boundary_operator(sys.WB_hat, build_q_for_system(sys))
    ext = extract_v(W1, W2)
    np.testing.assert_allclose(ext.V, shift_matrix(8), atol=1e-13)


def test_tree_coupling_row_pattern():
    T = tree_coupling(6)
    assert T[0, 2] == T[0, 3] == -0.5  # children of edge 1 are edges 3, 4
    assert T[1, 4] == T[1, 5] == -0.5
    assert np.all(T[2:] == 0.0)  # leaf edges absorb


def test_binary_tree_sigma_form_quarter_identity():
    sys = build_binary_tree(2)  # d = 6
    W1, W2 = split_boundary_operator(sys.WB_hat, build_q_for_system(sys))
    sf = sigma_form(W1, W2)
    np.testing.assert_allclose(sf, 0.25 * np.diag([1, 1, 2, 2, 2, 2]), atol=1e-14)
    # fully-interior rows carry exactly 1/4
    np.testing.assert_allclose(sf[:2, :2], 0.25 * np.eye(2), atol=1e-14)


def test_binary_tree_l3_interior_rows():
    sys = build_binary_tree(3)  # d = 14; edges 1..6 have both children present
    W1, W2 = split_boundary_operator(sys.WB_hat, build_q_for_system(sys))
    sf = sigma_form(W1, W2)
    np.testing.assert_allclose(sf[:6, :6], 0.25 * np.eye(6), atol=1e-14)


def test_wave_builder_piecewise_material():
    sys = build_wave("unit_interval", 0.7, rho=([0.4], [1.0, 4.0]), T_mod=2.0)
    np.testing.assert_allclose(sys.H.at(0.2), np.diag([1.0, 2.0]))
    np.testing.assert_allclose(sys.H.at(0.8), np.diag([0.25, 2.0]))


def test_wave_builder_complex_parameter_switches_field():
    assert build_wave("half_line", 0.9j).field == "complex"
    assert build_wave("half_line", 0.5).field == "real"


def test_corpus_expected_verdicts():
    for name, entry in CORPUS.items():
        v = analyze(entry.system())
        assert (v.consensus == "contraction") == entry.contraction, name
        assert (v.unitary is True) == entry.unitary, name
        assert not v.discrepancy, name


def test_random_system_deterministic():
    a = random_system(1, N=1, d=2, klass="interval_square")
    b = random_system(1, N=1, d=2, klass="interval_square")
    for Pa, Pb in zip(a.P, b.P):
        np.testing.assert_array_equal(Pa, Pb)
    np.testing.assert_array_equal(a.WB_hat, b.WB_hat)


def test_random_system_golden_fixture():
    doc = system_to_dict(random_system(1, N=1, d=2, klass="interval_square"))
    frozen = json.loads((GOLDEN / "random_seed1_n1_d2.json").read_text())
    assert json.loads(json.dumps(doc)) == frozen


def test_random_systems_all_validate():
    # constructive symmetrization: every draw passes validation
    rng = np.random.default_rng(123)
    for klass, count in (("interval_square", 500), ("interval_rect", 250),
                         ("halfline", 250)):
        for _ in range(count):
            sys = random_system(int(rng.integers(0, 2**31 - 1)), klass=klass)
            assert sys.dim_d >= 1  # construction implies validate_system passed


def test_random_rect_class_is_never_square():
    rng = np.random.default_rng(7)
    for _ in range(20):
        sys = random_system(int(rng.integers(0, 2**31 - 1)), klass="interval_rect")
        assert sys.n_conditions != sys.nd


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_golden_reports_are_stable(name):
    entry = CORPUS[name]
    text = verdict_to_json(analyze(entry.system())) + "\n"
    frozen = (GOLDEN / f"{name}.json").read_text()
    assert text == frozen
