import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ambiguity_lab.errors import DomainError
from ambiguity_lab.game import (
    A,
    C,
    PROFILES,
    AmbiguityGame,
    DeviationSet,
    Regime,
    VoterUtility,
    analytic_regime,
    canonical_game,
    contest_win_probabilities,
    lottery_expected_utility,
    payoff_matrix,
    pure_nash_equilibria,
    solve,
)


def brute_force_win_prob(game, profile):
    """Independent float enumeration of the centrist's win probability."""
    def options(party, action):
        amb = [float(v) for v in getattr(game, f"ambiguous_set_{party}")]
        if action is A:
            return [sum(-(x * x) for x in amb) / len(amb)]
        return [-(float(v) ** 2) for v in getattr(game, f"commit_set_{party}")]

    oc, oe = options("C", profile[0]), options("E", profile[1])
    total = 0.0
    for a, b in itertools.product(oc, oe):
        total += 1.0 if a > b + 1e-12 else 0.5 if abs(a - b) <= 1e-12 else 0.0
    return total / (len(oc) * len(oe))


rational_kl = st.tuples(
    st.fractions(min_value=Fraction(101, 100), max_value=Fraction(4), max_denominator=200),
    st.fractions(min_value=Fraction(1, 100), max_value=Fraction(3), max_denominator=200),
).map(lambda t: (t[0], t[0] + t[1])).filter(lambda kl: kl[0] ** 2 != Fraction(3, 2))


class TestCanonicalGame:
    def test_sets(self):
        g = canonical_game(2, 3)
        assert g.commit_set_C.values == (-2, -1, 0, 1, 2)
        assert g.ambiguous_set_C == g.commit_set_C == g.commit_set_E
        assert g.ambiguous_set_E.values == (-3, -2, -1, 0, 1, 2, 3)
        assert len(g.ambiguous_set_C) == 5 and len(g.ambiguous_set_E) == 7
        assert g.utility.risk_exponent == 2
        assert g.centrist_less_uncertain
        assert g.canonical_parameters() == (2, 3)

    @pytest.mark.parametrize("k,l", [(1, 2), (2, 2), (Fraction(1, 2), 3), (3, 2)])
    def test_domain(self, k, l):
        with pytest.raises(DomainError):
            canonical_game(k, l)

    def test_float_inputs_use_decimal_spelling(self):
        assert canonical_game(1.2, 2).canonical_parameters() == (Fraction(6, 5), 2)

    def test_commit_must_be_subset(self):
        big = DeviationSet.of([-3, 0, 3])
        small = DeviationSet.of([0])
        with pytest.raises(DomainError):
            AmbiguityGame(big, small, small, small)

    def test_deviation_set_validation(self):
        with pytest.raises(DomainError):
            DeviationSet(())
        with pytest.raises(DomainError):
            DeviationSet((1, 0))
        with pytest.raises(DomainError):
            DeviationSet.of([1, 1])
        assert DeviationSet.symmetric(2, 1).values == (-2, -1, 0, 1, 2)

    def test_utility_exponent_bound(self):
        with pytest.raises(DomainError):
            VoterUtility(Fraction(1, 2))


class TestLottery:
    def test_values(self):
        g = canonical_game(2, 3)
        assert lottery_expected_utility(g.ambiguous_set_C, g.utility) == -2
        assert lottery_expected_utility(g.ambiguous_set_E, g.utility) == -4
        assert lottery_expected_utility(DeviationSet((0,))) == 0

    @given(rational_kl)
    @settings(max_examples=200, deadline=None)
    def test_closed_forms(self, kl):
        k, l = kl
        g = canonical_game(k, l)
        u_c = lottery_expected_utility(g.ambiguous_set_C, g.utility)
        u_e = lottery_expected_utility(g.ambiguous_set_E, g.utility)
        assert isinstance(u_c, Fraction) and isinstance(u_e, Fraction)
        assert u_c == -2 * (k * k + 1) / 5
        assert u_e == -2 * (l * l + k * k + 1) / 7
        assert u_c > u_e

    def test_non_integer_exponent_is_float(self):
        u = VoterUtility(Fraction(3, 2))
        val = lottery_expected_utility(DeviationSet.of([0, 4]), u)
        assert isinstance(val, float)
        assert val == pytest.approx(-4.0, abs=1e-12)


class TestContest:
    @pytest.mark.parametrize("k,e_wins", [(Fraction(6, 5), Fraction(1, 5)), (Fraction(13, 10), Fraction(3, 5))])
    def test_ambiguous_vs_commit(self, k, e_wins):
        pc, pe = contest_win_probabilities(canonical_game(k, 2), (A, C))
        assert pe == e_wins and pc == 1 - e_wins

    @given(rational_kl)
    @settings(max_examples=100, deadline=None)
    def test_symmetric_profiles(self, kl):
        g = canonical_game(*kl)
        assert contest_win_probabilities(g, (A, A)) == (1, 0)
        assert contest_win_probabilities(g, (C, C)) == (Fraction(1, 2), Fraction(1, 2))

    @given(rational_kl)
    @settings(max_examples=100, deadline=None)
    def test_matches_float_brute_force(self, kl):
        g = canonical_game(*kl)
        for prof in PROFILES:
            assert float(contest_win_probabilities(g, prof)[0]) == pytest.approx(brute_force_win_prob(g, prof), abs=1e-12)

    def test_tie_splits_half(self):
        # k^2 = 3/2 is not rational in k; use a generalized game with an exact tie instead
        base = DeviationSet.of([-1, 0, 1])
        g = AmbiguityGame(base, base, base, DeviationSet.of([-2, -1, 0, 1, 2]))
        # C ambiguous EU = -2/3; E commits: 0 wins, +-1 lose -> E wins 1/3
        assert contest_win_probabilities(g, (A, C)) == (Fraction(2, 3), Fraction(1, 3))
        tied = AmbiguityGame(base, base, base, base)
        assert contest_win_probabilities(tied, (A, A)) == (Fraction(1, 2), Fraction(1, 2))

    def test_commit_vs_ambiguous_can_exceed_three_fifths(self):
        # with 5k^2 < 2l^2 + 2 even the +-k realizations beat the extremist's lottery
        pc, _ = contest_win_probabilities(canonical_game(Fraction(6, 5), 2), (C, A))
        assert pc == 1
        pc, _ = contest_win_probabilities(canonical_game(Fraction(3), Fraction(31, 10)), (C, A))
        assert pc == Fraction(3, 5)
        pc, _ = contest_win_probabilities(canonical_game(Fraction(21, 20), Fraction(11, 10)), (C, A))
        assert pc == Fraction(1, 5)

    @given(rational_kl, st.lists(st.fractions(min_value=0, max_value=10, max_denominator=50), min_size=1, max_size=4))
    @settings(max_examples=100, deadline=None)
    def test_wider_extremist_lottery_never_helps_extremist(self, kl, extra):
        g = canonical_game(*kl)
        top = max(abs(v) for v in g.ambiguous_set_E)
        extra = {top + x for x in extra if x > 0}
        if not extra:
            return
        wider = DeviationSet.of(set(g.ambiguous_set_E.values) | extra | {-x for x in extra})
        g2 = AmbiguityGame(g.commit_set_C, g.commit_set_E, g.ambiguous_set_C, wider, g.utility)
        assert contest_win_probabilities(g2, (C, A))[1] <= contest_win_probabilities(g, (C, A))[1]


class TestEquilibria:
    def test_payoff_matrix_entries(self):
        assert payoff_matrix(canonical_game(Fraction(6, 5), 2))[(A, C)] == (Fraction(4, 5), Fraction(1, 5))
        assert payoff_matrix(canonical_game(Fraction(13, 10), 2))[(A, C)] == (Fraction(2, 5), Fraction(3, 5))

    def test_regimes(self):
        assert pure_nash_equilibria(payoff_matrix(canonical_game(Fraction(6, 5), 2))) == ((A, C),)
        assert pure_nash_equilibria(payoff_matrix(canonical_game(Fraction(13, 10), 2))) == ((C, C),)
        assert analytic_regime(1.2, 2) is Regime.CENTRIST_AMBIGUITY
        assert analytic_regime(1.3, 2) is Regime.FULL_COMMITMENT

    def test_boundary(self):
        # exact equality needs an irrational k; the rational check is on k^2 directly
        assert analytic_regime(Fraction(1224744871, 10**9), 2, eps_b=1e-6) is Regime.BOUNDARY
        assert analytic_regime(Fraction(1224744871, 10**9), 2) is not Regime.BOUNDARY
        with pytest.raises(DomainError):
            analytic_regime(1, 2)

    @given(rational_kl)
    @settings(max_examples=300, deadline=None)
    def test_enumeration_matches_analytic(self, kl):
        report = solve(canonical_game(*kl))
        assert len(report.pure_equilibria) == 1
        assert report.consistent()
        assert (A, A) not in report.pure_equilibria and (C, A) not in report.pure_equilibria

    def test_indifference_does_not_exclude(self):
        base = DeviationSet.of([0])
        g = AmbiguityGame(base, base, base, base)
        m = payoff_matrix(g)
        assert pure_nash_equilibria(m) == PROFILES

    def test_extension_game_has_no_regime(self):
        base = DeviationSet.of([-1, 0, 1])
        report = solve(AmbiguityGame(base, base, base, DeviationSet.of([-3, -1, 0, 1, 3])))
        assert report.extension and report.thresholds is None

    def test_report_thresholds(self):
        rep = solve(canonical_game(Fraction(6, 5), 2))
        assert rep.thresholds["k2_minus_3/2"] == Fraction(36, 25) - Fraction(3, 2)
        assert rep.thresholds["k2_plus_l2_minus_5/2"] == Fraction(36, 25) + 4 - Fraction(5, 2)
