import numpy as np
import pytest
import sympy

from oracles import numeric_inertia
from spineforge.coxeter import (CUBE, SIMPLEX, CoxeterDiagram, CoxeterError, class_index,
                                classify, gram_matrix, inertia, table_csv)


def numeric_class(labels):
    """Classification from floating-point eigenvalues of the Gram matrix and its minors."""
    n = len(labels) + 1
    p, q, z = numeric_inertia(labels)
    if q == 0 and z == 0:
        return "spherical"
    if q == 0:
        return "euclidean"
    assert (p, q, z) == (n - 1, 1, 0)
    figs = [numeric_inertia(labels, drop=i) for i in range(n)]
    if any(f[1] for f in figs):
        return "superideal"
    if any(f[2] for f in figs):
        return "ideal"
    return "compact"


def test_gram_entries():
    g = gram_matrix(CoxeterDiagram(CUBE, 5, 3))
    assert g.labels == [5, 3, 4]
    assert g.size == 4
    assert g.entries[0][1] == -sympy.cos(sympy.pi / 5)
    assert g.entries[2][3] == -sympy.sqrt(2) / 2
    assert g.entries[1][2] == sympy.Rational(-1, 2)
    assert g.entries[0][2] == 0 and all(g.entries[i][i] == 1 for i in range(4))
    assert np.allclose(g.numeric(), g.numeric().T)


def test_bad_diagrams():
    with pytest.raises(CoxeterError):
        CoxeterDiagram("prism", 5, 3)
    with pytest.raises(CoxeterError):
        CoxeterDiagram(SIMPLEX, 2, 3)
    with pytest.raises(CoxeterError):
        CoxeterDiagram(SIMPLEX, 5, 1)


@pytest.mark.parametrize("kind", [SIMPLEX, CUBE])
@pytest.mark.parametrize("d", range(2, 9))
def test_inertia_matches_numerics(kind, d):
    for m in range(3, 13):
        labels = CoxeterDiagram(kind, m, d).labels()
        assert inertia(labels, m) == numeric_inertia(labels)
        for i in range(d + 1):
            assert inertia(labels, m, drop=i) == numeric_inertia(labels, drop=i)


@pytest.mark.parametrize("kind", [SIMPLEX, CUBE])
def test_classify_matches_numerics(kind):
    for d in range(2, 8):
        for m in range(3, 16):
            diag = CoxeterDiagram(kind, m, d)
            assert classify(diag) == numeric_class(diag.labels()), (kind, m, d)


@pytest.mark.parametrize("d", range(2, 11))
def test_m3_is_spherical(d):
    assert classify(CoxeterDiagram(SIMPLEX, 3, d)) == "spherical"
    assert classify(CoxeterDiagram(CUBE, 3, d)) == "spherical"


@pytest.mark.parametrize("d", range(2, 11))
def test_m4_simplex_spherical_cube_euclidean(d):
    assert classify(CoxeterDiagram(SIMPLEX, 4, d)) == "spherical"
    assert classify(CoxeterDiagram(CUBE, 4, d)) == "euclidean"


def test_triangle_groups_are_compact():
    for m in range(7, 51):
        assert classify(CoxeterDiagram(SIMPLEX, m, 2)) == "compact"
    assert classify(CoxeterDiagram(SIMPLEX, 6, 2)) == "euclidean"


@pytest.mark.parametrize("kind", [SIMPLEX, CUBE])
def test_class_is_monotone_in_m(kind):
    for d in range(2, 8):
        idx = [class_index(classify(CoxeterDiagram(kind, m, d))) for m in range(3, 20)]
        assert idx == sorted(idx), (kind, d, idx)


def test_rows_that_differ_from_the_listed_facts():
    # [5,3,3,3]: every vertex figure ([5,3,3] or a spherical product) is spherical
    assert classify(CoxeterDiagram(SIMPLEX, 5, 4)) == "compact"
    # [6,3,4]: the vertex figure [6,3] is Euclidean and no minor is indefinite
    assert classify(CoxeterDiagram(CUBE, 6, 3)) == "ideal"
    assert numeric_class([5, 3, 3, 3]) == "compact"
    assert numeric_class([6, 3, 4]) == "ideal"


def test_table_csv():
    text = table_csv(kinds=(SIMPLEX,), ms=[3, 7], ds=[2])
    assert text == "kind,m,d,class\nsimplex,3,2,spherical\nsimplex,7,2,compact\n"
