import numpy as np
import pytest

from hardy_forge.poly import parse, sum_sq_partials
from hardy_forge.strata import (TubeSpec, class_gH_check, in_tube, smooth_cutoff, stratify, tube_ladder)


@pytest.fixture(scope="module")
def cross_strat():
    return stratify(parse("x1*x2", 2), sample_budget=32, seed=0)


@pytest.fixture(scope="module")
def cubic_strat():
    return stratify(parse("x1*(x2^2+x3^2)+x2^3", 3), sample_budget=32, seed=0)


def test_cross_strata(cross_strat):
    s1, s2 = cross_strat.stratum(1), cross_strat.stratum(2)
    assert s1.witnesses and s2.witnesses
    for w in s1.witnesses:
        assert min(abs(w[0]), abs(w[1])) < 1e-8 and max(abs(w[0]), abs(w[1])) > 1e-6
    assert all(np.linalg.norm(w) < 1e-6 for w in s2.witnesses)
    assert s1.codim == 1 and s2.codim == 2
    assert cross_strat.max_mult == 2


def test_circle_only_origin():
    strat = stratify(parse("x1^2+x2^2", 2), sample_budget=32, seed=1)
    assert not strat.stratum(1).witnesses
    assert strat.stratum(1).empty_at_budget
    assert [np.linalg.norm(w) < 1e-6 for w in strat.stratum(2).witnesses] == [True] * len(strat.stratum(2).witnesses)
    assert strat.stratum(2).witnesses


def test_cubic_singular_line(cubic_strat):
    s2 = cubic_strat.stratum(2)
    assert any(abs(w[0]) > 1e-3 and np.linalg.norm(w[1:]) < 1e-6 for w in s2.witnesses)
    assert s2.codim == 2
    assert cubic_strat.max_mult <= 3


def test_constant_gives_empty():
    assert stratify(parse("3", 2)).strata == []


def test_zero_budget_empty_witnesses():
    strat = stratify(parse("x1*x2", 2), sample_budget=0)
    assert all(not s.witnesses and s.empty_at_budget for s in strat.strata)


def test_witness_residuals_and_levels(cubic_strat):
    P = cubic_strat.P
    for st in cubic_strat.strata:
        below = sum_sq_partials(P, st.k - 1)
        at = sum_sq_partials(P, st.k)
        for w in st.witnesses:
            assert below.numeric(w) < 1e-8
            assert at.numeric(w) > 1e-10


def test_nesting_of_witnesses(cubic_strat):
    P = cubic_strat.P
    for st in cubic_strat.strata[1:]:
        spec = TubeSpec(P, 1e-3, k=st.k - 2) if st.k >= 2 else None
        for w in st.witnesses:
            assert sum_sq_partials(P, st.k - 1).numeric(w) < 1e-8
            if spec is not None:
                assert in_tube(spec, w)


def test_closure_relation(cross_strat, cubic_strat):
    # every witness of the deeper stratum has lower-stratum witnesses nearby after sampling near it
    for strat in (cross_strat, cubic_strat):
        P = strat.P
        for k in range(2, strat.max_mult + 1):
            for w in strat.stratum(k).witnesses[:3]:
                near = w + 1e-3 * np.eye(P.nvars)[0]
                assert abs(P.numeric(w)) < 1e-8
                assert sum_sq_partials(P, k - 1).numeric(near) < 1e-4


def test_homogeneous_scaling_equivariance(cubic_strat):
    P = cubic_strat.P
    for st in cubic_strat.strata:
        for w in st.witnesses[:5]:
            for lam in (0.5, 2.0):
                v = lam * np.asarray(w)
                for j in range(st.k):
                    # P^j is homogeneous of degree 2 (d - j)
                    tol = 1e-8 * max(lam, 1 / lam) ** (2 * (3 - j))
                    assert sum_sq_partials(P, j).numeric(v) < tol


# --- tubes -------------------------------------------------------------------------

def test_in_tube_examples():
    assert in_tube(TubeSpec(parse("x1", 2), 1.0), (0.5, 0))
    assert not in_tube(TubeSpec(parse("x1", 2), 1.0), (2, 0))
    assert in_tube(TubeSpec(parse("x1*x2", 2), 0.1, k=1), (0, 0))
    with pytest.raises(ValueError):
        TubeSpec(parse("x1", 1), 0.0)


def test_stratum_tube_polynomial_nonnegative():
    spec = TubeSpec(parse("x1*(x2^2+x3^2)+x2^3", 3), 0.1, k=2)
    x = np.random.default_rng(0).uniform(-2, 2, (500, 3))
    assert np.all(spec.Qk_def.numeric(x) >= 0)


def test_tube_ladder_geometric():
    lad = tube_ladder(0.01, 2)
    assert lad[2] == pytest.approx(0.01) and lad[1] == pytest.approx(0.1)


def test_smooth_cutoff_regions():
    c = smooth_cutoff(TubeSpec(parse("x1", 2), 1.0))
    assert c.value(np.array([0.5, 0.0])) == 1 and np.all(c.gradient(np.array([0.5, 0.0])) == 0)
    assert c.value(np.array([3.0, 0.0])) == 0 and np.all(c.gradient(np.array([3.0, 0.0])) == 0)


@pytest.mark.parametrize("poly,k", [("x1", None), ("x1*x2", None), ("x1*x2", 1), ("x1^2+x2^3", 1)])
def test_smooth_cutoff_gradient_matches_finite_differences(poly, k):
    spec = TubeSpec(parse(poly, 2), 0.3, k=k)
    c = smooth_cutoff(spec)
    rng = np.random.default_rng(3)
    checked = 0
    for x in rng.uniform(-1, 1, (200, 2)):
        g = c.gradient(x)
        if np.linalg.norm(g) < 1e-3:
            continue
        h = 1e-6
        fd = np.array([(c.value(x + h * e) - c.value(x - h * e)) / (2 * h) for e in np.eye(2)])
        assert np.allclose(g, fd, rtol=1e-5, atol=1e-7 * np.linalg.norm(g))
        checked += 1
    assert checked > 5


# --- class gH ---------------------------------------------------------------------

def test_gh_vacuous_without_codim_two():
    strat = stratify(parse("x1", 2), sample_budget=16)
    assert set(class_gH_check(strat.P, strat).values()) == {"passes"}


def test_gh_budget_zero_inconclusive(cross_strat):
    assert set(class_gH_check(cross_strat.P, cross_strat, sample_budget=0).values()) == {"inconclusive"}


def test_gh_cross_in_three_variables_passes():
    P = parse("x1*x2", 3)
    strat = stratify(P, sample_budget=16)
    verdicts = class_gH_check(P, strat, sample_budget=16)
    assert verdicts[2] == "passes"


def test_gh_never_fails():
    P = parse("x1^2+x2^2", 3)
    strat = stratify(P, sample_budget=16)
    verdicts = class_gH_check(P, strat, sample_budget=8)
    assert "fails" not in verdicts.values()
    assert verdicts[2] == "inconclusive"
