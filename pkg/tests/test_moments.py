import itertools
import math
import random
from fractions import Fraction as F

import pytest

from homsum.kernels import (
    build_kernel,
    contraction,
    lift,
    offdiag_kernel,
    slice_kernel,
    star_kernel,
)
from homsum.laws import (
    centered_poisson,
    free_poisson_centered,
    free_rademacher,
    gaussian,
    rademacher,
    semicircle,
    tetilla,
)
from homsum.moments import (
    AssumptionError,
    FeasibilityError,
    SumSpec,
    fmt_report,
    fourth_moment_formula,
    hypercontractivity_bound,
    joint_moment,
    moment_exact,
    moment_oracle,
    noncentral_report,
    quadratic_fourth_moment_gap,
    stein_wasserstein_bound,
    wick_moment,
)
from homsum.partitions import respectful_pairings

HALF = build_kernel(2, 2, [((1, 2), F(1, 2)), ((2, 1), F(1, 2))])
ONE2 = build_kernel(2, 2, [((1, 2), F(1)), ((2, 1), F(1))])


def full_offdiag(n, d):
    return build_kernel(n, d, [(p, F(1)) for p in itertools.permutations(range(1, n + 1), d)])


def symmetric_random(n, d, rnd, density=0.7):
    entries = {}
    for comb in itertools.combinations(range(1, n + 1), d):
        if rnd.random() < density:
            v = F(rnd.randint(-3, 3), rnd.randint(1, 4))
            if v:
                for perm in itertools.permutations(comb):
                    entries[perm] = v
    return build_kernel(n, d, entries.items())


def test_spec_requires_diagonal_vanishing():
    bad = build_kernel(2, 2, [((1, 1), F(1))])
    with pytest.raises(ValueError):
        SumSpec(bad, gaussian(1, 8))


def test_half_kernel_is_product_statistic():
    spec = SumSpec(HALF, gaussian(1, 10))
    assert moment_exact(spec, 1) == 0
    assert moment_exact(spec, 2) == 1
    assert moment_exact(spec, 3) == 0
    assert moment_exact(spec, 4) == 9  # (E N^4)^2
    assert moment_oracle(spec, 4) == 9
    # E[Q^2] = d! sum f^2 for symmetric diagonal-vanishing kernels
    assert moment_exact(spec, 2) == math.factorial(2) * HALF.norm_sq()


def test_free_second_moment_is_norm():
    spec = SumSpec(ONE2, semicircle(1, 10))
    assert moment_exact(spec, 2) == ONE2.norm_sq()


def test_tetilla_two_routes():
    # Q_S(f) with f = 1/sqrt(2) off-diagonal on two letters has the Tetilla law;
    # scale the unnormalized kernel by c^m with c^2 = 1/2
    spec = SumSpec(ONE2, semicircle(1, 10))
    assert moment_exact(spec, 4) * F(1, 4) == F(5, 2)
    assert moment_oracle(spec, 4) * F(1, 4) == F(5, 2)
    assert moment_exact(spec, 6) * F(1, 8) == tetilla(8).moment(6)


@pytest.mark.parametrize("law_fn", [gaussian, lambda *a, **k: centered_poisson(1, 10), lambda *a, **k: rademacher(10)])
def test_oracle_equivalence_classical_sample(law_fn):
    law = law_fn(1, 10) if law_fn is gaussian else law_fn()
    for n, d in [(2, 2), (3, 2)]:
        spec = SumSpec(full_offdiag(n, d), law)
        for m in (1, 2, 3, 4):
            assert moment_exact(spec, m) == moment_oracle(spec, m)


@pytest.mark.parametrize("law_fn", [lambda: semicircle(1, 10), lambda: free_poisson_centered(1, 10), lambda: free_rademacher(10)])
def test_oracle_equivalence_free_sample(law_fn):
    law = law_fn()
    for n, d in [(2, 2), (3, 2)]:
        spec = SumSpec(full_offdiag(n, d), law)
        for m in (1, 2, 3, 4):
            assert moment_exact(spec, m) == moment_oracle(spec, m)


def test_oracle_equivalence_property_random_kernels():
    from hypothesis import given, settings
    from hypothesis import strategies as st

    @given(st.randoms(use_true_random=False), st.integers(min_value=2, max_value=3),
           st.integers(min_value=1, max_value=2), st.integers(min_value=1, max_value=3))
    @settings(max_examples=25, deadline=None)
    def check(rnd, n, d, m):
        entries = []
        for idx in itertools.permutations(range(1, n + 1), d):
            if rnd.random() < 0.6:
                v = F(rnd.randint(-4, 4), rnd.randint(1, 5))
                if v:
                    entries.append((idx, v))
        k = build_kernel(n, d, entries)
        if not k.values:
            return
        for law in (gaussian(1, 10), centered_poisson(1, 10), semicircle(1, 10),
                    free_poisson_centered(1, 10)):
            spec = SumSpec(k, law)
            assert moment_exact(spec, m) == moment_oracle(spec, m)

    check()


def test_float_mode_contraction_tracks_exact():
    f = full_offdiag(3, 2)
    g = f.to_float()
    exact = contraction(f, f, 1)
    approx = contraction(g, g, 1)
    for idx, v in exact.support():
        assert abs(approx(idx) - float(v)) < 1e-12
    assert abs(float(exact.norm_sq()) - approx.norm_sq()) < 1e-9


def test_oracle_guard():
    big = full_offdiag(4, 2)
    with pytest.raises(FeasibilityError):
        moment_oracle(SumSpec(big, gaussian(1, 10)), 9, guard=10)
    with pytest.raises(FeasibilityError):
        moment_exact(SumSpec(big, gaussian(1, 10)), 8)  # 16 positions > cap


def test_wick_moment_single_index_lift():
    base = build_kernel(1, 1, [((1,), F(1))])
    for d, m in [(2, 2), (2, 3), (2, 4), (3, 2), (1, 6), (4, 2)]:
        lk = lift(base, (d,))
        assert wick_moment(lk, m, "free") == respectful_pairings(d, m, "noncrossing")
        assert wick_moment(lk, m, "classical") == respectful_pairings(d, m, "classical")


def test_wick_moment_tetilla_and_odd():
    lk = lift(ONE2, (1, 1))
    assert wick_moment(lk, 4, "free") * F(1, 4) == F(5, 2)
    assert wick_moment(lk, 3, "free") == 0
    assert wick_moment(lk, 2, "classical") == moment_exact(SumSpec(ONE2, gaussian(1, 8)), 2)


def test_cross_engine_chi_square_and_free_poisson_identities():
    # H2(N) = N^2 - 1 has the centered chi-square(1) law and U2(S) the centered
    # free Poisson(1) law, so Wick moments of the order-2 lift must equal
    # lattice moments of the degree-1 sum driven by those laws: two fully
    # independent code paths per value.
    from homsum.laws import gamma_f, transformed_law

    assert transformed_law("gaussian", 2, 6).moments == gamma_f(1, 6).moments
    f = build_kernel(3, 1, [((1,), F(1, 2)), ((2,), F(1, 3)), ((3,), F(-1, 4))])
    lk = lift(f, (2,))
    gf1 = gamma_f(1, 10)
    fp1 = free_poisson_centered(1, 10)
    for m in (1, 2, 3, 4, 5):
        assert wick_moment(lk, m, "classical") == moment_exact(SumSpec(f, gf1), m)
        assert wick_moment(lk, m, "free") == moment_exact(SumSpec(f, fp1), m)


def test_wick_matches_transformed_law_hermite_sum():
    # Hermite-sum second moment via the lifted kernel equals the lifted Wick value
    f = build_kernel(2, 1, [((1,), F(1, 2)), ((2,), F(1, 3))])
    lk = lift(f, (2,))
    # Q = sum_i f(i) H_2(N_i): E[Q^2] = sum f^2 * E[H_2(N)^2] = 2 sum f^2
    assert wick_moment(lk, 2, "classical") == 2 * f.norm_sq()


def test_joint_moment_consistency_and_covariance():
    s = semicircle(1, 10)
    assert joint_moment([ONE2, ONE2], (0, 1), s) == moment_exact(SumSpec(ONE2, s), 2)
    g = gaussian(1, 10)
    f2 = full_offdiag(3, 2)
    h2 = build_kernel(3, 2, [((1, 2), F(2)), ((2, 1), F(2)), ((1, 3), F(1)), ((3, 1), F(1))])
    cov = joint_moment([f2, h2], (0, 1), g)
    assert cov == math.factorial(2) * sum(f2(k) * h2(k) for k in f2.values)


def test_joint_moment_free_word_order():
    s = semicircle(1, 10)
    a = build_kernel(2, 1, [((1,), F(1)), ((2,), F(2))])
    b = build_kernel(2, 1, [((1,), F(3)), ((2,), F(1))])
    got = joint_moment([a, b], (0, 1, 0, 1), s)
    want = F(0)
    for i, j, k, l in itertools.product((1, 2), repeat=4):
        coeff = a((i,)) * b((j,)) * a((k,)) * b((l,))
        e = (1 if (i == j and k == l) else 0) + (1 if (i == l and j == k) else 0)
        want += coeff * e
    assert got == want


def test_third_moment_matches_reference_law():
    # E[Q_X^3] = E[Q_N^3] under vanishing third moments; phi(Q_Y^3) = phi(Q_S^3)
    rnd = random.Random(2)
    for _ in range(6):
        k = symmetric_random(3, 2, rnd)
        if not k.values:
            continue
        assert moment_exact(SumSpec(k, rademacher(10)), 3) == moment_exact(SumSpec(k, gaussian(1, 10)), 3)
        assert moment_exact(SumSpec(k, free_poisson_centered(1, 10)), 3) == \
            moment_exact(SumSpec(k, semicircle(1, 10)), 3)


def test_free_fourth_moment_formula_free_poisson():
    rec = fourth_moment_formula(SumSpec(ONE2, free_poisson_centered(1, 8)))
    assert rec["semicircular_term"] * F(1, 4) == F(5, 2)
    assert rec["correction"] * F(1, 4) == 1
    assert rec["total"] * F(1, 4) == F(7, 2)
    assert rec["total"] == moment_exact(SumSpec(ONE2, free_poisson_centered(1, 8)), 4)


def test_free_fourth_moment_linearity_random_symmetric():
    rnd = random.Random(3)
    s = semicircle(1, 10)
    for _ in range(6):
        n, d = rnd.choice([(3, 2), (4, 2), (4, 3)])
        k = symmetric_random(n, d, rnd)
        if not k.values:
            continue
        for law in (free_poisson_centered(1, 10), free_rademacher(10)):
            lhs = moment_exact(SumSpec(k, law), 4) - moment_exact(SumSpec(k, s), 4)
            rhs = law.cumulant(4) * sum(
                (moment_exact(SumSpec(slice_kernel(k, (j,)), s), 4)
                 if slice_kernel(k, (j,)).d > 0 and slice_kernel(k, (j,)).values
                 else slice_kernel(k, (j,))(()) ** 4 if slice_kernel(k, (j,)).d == 0 else F(0))
                for j in range(1, n + 1))
            assert lhs == rhs


def test_classical_fourth_moment_formula_and_discrepancy():
    # totals agree with the lattice engine for m3 = 0 laws
    for law in (gaussian(1, 10), rademacher(10)):
        rec = fourth_moment_formula(SumSpec(HALF, law))
        assert rec["total"] == moment_exact(SumSpec(HALF, law), 4)
    rec = fourth_moment_formula(SumSpec(HALF, rademacher(10)))
    # d = m = 2: enumeration finds 8 respectful class-(4,4) partitions, not 16;
    # the closed-form coefficient binom(2,2)^4 2!^4 would double the term
    assert rec["class_counts"] == (48, 8)
    assert rec["class_terms"][1] == 1
    assert rec["closed_form_terms"][1] == 2
    assert rec["closed_form_matches"] == (True, False)
    # oracle arbitration: E[Q^4] = (3 + chi4)^2 at n = 2
    chi4 = rademacher(10).cumulant(4)
    assert moment_oracle(SumSpec(HALF, rademacher(10)), 4) == (3 + chi4) ** 2


def test_classical_formula_rejects_nonzero_third_moment():
    with pytest.raises(AssumptionError):
        fourth_moment_formula(SumSpec(HALF, centered_poisson(1, 10)))


def test_fmt_report_values_and_verdicts():
    rep = fmt_report(SumSpec(HALF, gaussian(1, 10)))
    assert rep["variance"] == 1
    assert rep["fourth_moment"] == 9
    assert rep["fourth_cumulant"] == 6
    assert rep["contraction_norms_sq"][1] == contraction(HALF, HALF, 1).norm_sq()
    assert not rep["verdicts"]["np_contraction"]["holds"]
    assert not rep["verdicts"]["de_jong"]["holds"]
    assert rep["spec_hash"] and rep["mode"] == "exact"
    # free fourth cumulant uses the semicircular target
    repf = fmt_report(SumSpec(ONE2, semicircle(1, 10)))
    assert repf["fourth_cumulant"] == repf["fourth_moment"] - 2 * repf["variance"] ** 2


def test_positive_fourth_cumulant_for_gaussian_sums():
    rnd = random.Random(8)
    for _ in range(8):
        k = symmetric_random(3, 2, rnd)
        if not k.values:
            continue
        rep = fmt_report(SumSpec(k, gaussian(1, 10)))
        assert rep["fourth_cumulant"] > 0


def test_noncentral_reports():
    nr = noncentral_report(SumSpec(HALF, gaussian(1, 10)), "gamma", F(1, 2))
    assert nr["statistic"] == 9 - 12 * 0
    assert nr["target_value"] == 12 * F(1, 4) - 48 * F(1, 2)
    assert nr["midpoint_norm_sq"] == (contraction(HALF, HALF, 1) - HALF).norm_sq()
    with pytest.raises(AssumptionError):
        d3 = build_kernel(3, 3, [(p, F(1)) for p in itertools.permutations((1, 2, 3))])
        noncentral_report(SumSpec(d3, gaussian(1, 12)), "gamma", 1)
    # free rearrangement: stat_Y - stat_S == kappa4(Y) * slice sum
    Y = free_poisson_centered(1, 8)
    S = semicircle(1, 8)
    nY = noncentral_report(SumSpec(ONE2, Y), "free_poisson", 1)
    nS = noncentral_report(SumSpec(ONE2, S), "free_poisson", 1)
    rec = fourth_moment_formula(SumSpec(ONE2, Y))
    assert nY["statistic"] - nS["statistic"] == rec["correction"]


def test_quadratic_inequalities_on_random_kernels():
    rnd = random.Random(13)
    checked = 0
    for _ in range(30):
        n = rnd.choice([3, 4])
        k = symmetric_random(n, 2, rnd)
        if not k.values:
            continue
        nsq = k.norm_sq()
        c2 = F(1, 2) / nsq  # classical admissible scaling: 2 c^2 nsq = 1
        alpha = sum((contraction(k, k, 1)((i, i)) ** 2 for i in range(1, n + 1)), F(0)) * c2**2
        for law in (gaussian(1, 10), rademacher(10), centered_poisson(1, 10)):
            chi4 = law.cumulant(4)
            if chi4 <= -1 or law.moment(3) != 0:
                continue
            m4 = moment_exact(SumSpec(k, law), 4) * c2**2
            assert m4 - 3 >= 48 * alpha * (1 + chi4)
        # free side: kappa4 > -1/2, unit variance scaling c2f = 1/nsq
        c2f = 1 / nsq
        alpha_f = sum(
            (sum((k((i, j)) ** 2 for j in range(1, n + 1)), F(0)) ** 2 for i in range(1, n + 1)),
            F(0),
        ) * c2f**2
        for law in (semicircle(1, 10), free_poisson_centered(1, 10), tetilla(10)):
            kappa4 = law.cumulant(4)
            if kappa4 <= F(-1, 2):
                continue
            m4 = moment_exact(SumSpec(k, law), 4) * c2f**2
            assert m4 >= 2 + alpha_f * (1 + 2 * kappa4)
        checked += 1
    assert checked >= 20


def test_quadratic_gap_closed_form():
    rnd = random.Random(4)
    for _ in range(5):
        k = symmetric_random(4, 2, rnd)
        if not k.values:
            continue
        for a, b in [(gaussian(1, 10), rademacher(10)), (rademacher(10), gaussian(1, 10))]:
            assert quadratic_fourth_moment_gap(k, a, b) == \
                moment_exact(SumSpec(k, a), 4) - moment_exact(SumSpec(k, b), 4)


def test_stein_bound():
    e_abs3 = math.sqrt(8 / math.pi)  # E|N|^3
    rep = stein_wasserstein_bound(SumSpec(HALF, gaussian(1, 10)), abs_third_moment=e_abs3)
    assert rep["bound"] > 0
    # both drivers vanish -> zero bound
    zero = build_kernel(2, 2, [])
    rep0 = stein_wasserstein_bound(SumSpec(zero, gaussian(1, 10)), abs_third_moment=e_abs3)
    assert rep0["bound"] == 0.0
    with pytest.raises(AssumptionError):
        d3 = build_kernel(3, 3, [(p, F(1)) for p in itertools.permutations((1, 2, 3))])
        stein_wasserstein_bound(SumSpec(d3, gaussian(1, 12)), abs_third_moment=1.0)


def test_hypercontractivity_bound():
    spec = SumSpec(HALF, gaussian(1, 10))
    assert abs(hypercontractivity_bound(spec, 4, 3.0) - 186624) < 1e-6
    # q = 2 reduces to gamma^d 2^{2d} E[Q^2]
    assert abs(hypercontractivity_bound(spec, 2, 3.0) - 9 * 16 * 1) < 1e-9
    zero = build_kernel(2, 2, [])
    assert hypercontractivity_bound(SumSpec(zero, gaussian(1, 10)), 4, 3.0) == 0.0


def test_non_iid_fourth_moment_bound():
    from homsum.laws import LawSpec, convert
    from homsum.moments import fourth_moment_bound_non_iid

    moms = tuple(F(0) if k % 2 else F(4) ** (k // 2) * F(1, 4) for k in range(11))
    moms = (F(1),) + moms[1:]
    three_point = LawSpec("three_point", "classical", moms,
                          convert(moms, "moments_to_cumulants", "classical"))
    rnd = random.Random(6)
    checked = 0
    for _ in range(6):
        n = rnd.choice([2, 3])
        k = symmetric_random(n, 2, rnd)
        if not k.values:
            continue
        laws = tuple(rnd.choice([gaussian(1, 10), three_point]) for _ in range(n))
        rep = fourth_moment_bound_non_iid(SumSpec(k, laws))
        assert rep["holds"], rep
        assert rep["fourth_cumulant"] >= rep["lower_bound"]
        checked += 1
    assert checked >= 3
    with pytest.raises(AssumptionError):
        fourth_moment_bound_non_iid(SumSpec(HALF, gaussian(1, 10)))
    with pytest.raises(AssumptionError):
        # negative fourth cumulant is outside the bound's hypotheses
        fourth_moment_bound_non_iid(SumSpec(HALF, (rademacher(10), gaussian(1, 10))))


def test_non_iid_law_lists():
    laws = (rademacher(10), gaussian(1, 10))
    spec = SumSpec(HALF, laws)
    # Q = X1 X2 with X1 rademacher, X2 gaussian: E[Q^4] = 1 * 3
    assert moment_exact(spec, 4) == 3
    assert moment_oracle(spec, 4) == 3
    assert moment_exact(spec, 2) == 1


def test_star_family_tau_does_not_vanish():
    for n in (4, 8):
        f = star_kernel(n)
        rep = fmt_report(SumSpec(f, gaussian(1, 10)))
        # normalized by sum f^2 = 2(n-1): tau = 1
        assert rep["tau_max"] * F(1, 2 * (n - 1)) == 1


def test_fmt_family_report_trajectory():
    from homsum.moments import fmt_family_report

    specs = [(n, SumSpec(offdiag_kernel(n), gaussian(1, 10))) for n in (3, 4, 5)]
    rows = fmt_family_report(specs)
    assert [r["n"] for r in rows] == [3, 4, 5]
    # normalized tau = 2/n decays along the family
    taus = [r["tau_max"] * F(1, n * (n - 1)) for r, n in zip(rows, (3, 4, 5))]
    assert taus == [F(2, 3), F(1, 2), F(2, 5)]
    assert all(r["fourth_cumulant"] > 0 for r in rows)


def test_fmt_report_states_influence_normalization():
    rep = fmt_report(SumSpec(HALF, gaussian(1, 10)))
    assert "slot_summed" in rep["influence_normalization"]
    assert sum(rep["influences"]) == 2 * HALF.norm_sq()
    assert sum(rep["influences_first_slot"]) == HALF.norm_sq()
