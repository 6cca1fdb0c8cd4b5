"""Exact solver for the two-party centrist/extremist ambiguity game.

Evaluation semantics
--------------------
A party that *commits* ends up at a deviation drawn uniformly from its commit
set; the voter sees the realized deviation ``d`` and scores it ``-|d|**p``.
An *ambiguous* party is scored at the expected utility of the uniform lottery
over its ambiguous set. The voter elects the higher score and splits exact
ties 1/2-1/2. Win probabilities are obtained by enumerating every joint
realization, so with integer risk exponents every number is an exact
:class:`fractions.Fraction`.

Committing parties do not *choose* where to land: the commit set is a lottery
over where the median voter turns out to be relative to the announced
platform. This is the reading under which the well known 1/5, 3/5 and 1/2
contest outcomes come out of the arithmetic.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from numbers import Rational

from ambiguity_lab.errors import DomainError

# float comparisons (non-integer exponents only)
FLOAT_TOL = 1e-12

THRESHOLD_K2 = Fraction(3, 2)
THRESHOLD_K2_L2 = Fraction(5, 2)


def as_rational(x):
    """Convert ``x`` to a Fraction using its decimal spelling for floats.

    ``as_rational(1.2) == Fraction(6, 5)``; the binary expansion of the float
    would otherwise leak in.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, (str, Decimal)):
        return Fraction(str(x).strip())
    raise TypeError(f"cannot interpret {x!r} as a rational number")


@dataclass(frozen=True)
class DeviationSet:
    """Finite, strictly increasing set of policy deviations from the median voter."""

    values: tuple

    def __post_init__(self):
        vals = tuple(as_rational(v) for v in self.values)
        if not vals:
            raise DomainError("a deviation set cannot be empty")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise DomainError(f"deviation values must be strictly increasing: {vals}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, values):
        """Build from any iterable, sorting and rejecting duplicates."""
        vals = [as_rational(v) for v in values]
        if len(set(vals)) != len(vals):
            raise DomainError(f"duplicate deviation values in {vals}")
        return cls(tuple(sorted(vals)))

    @classmethod
    def symmetric(cls, *magnitudes):
        """``{0} ∪ {±m for m in magnitudes}``."""
        mags = {abs(as_rational(m)) for m in magnitudes}
        mags.discard(Fraction(0))
        return cls.of([0, *mags, *(-m for m in mags)])

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __contains__(self, item):
        return as_rational(item) in self.values

    def issubset(self, other):
        return set(self.values) <= set(other.values)


@dataclass(frozen=True)
class VoterUtility:
    """Utility ``-|x| ** risk_exponent`` of a realized deviation ``x``."""

    risk_exponent: Fraction = Fraction(2)

    def __post_init__(self):
        p = as_rational(self.risk_exponent)
        if p < 1:
            raise DomainError(f"risk exponent must be >= 1, got {p}")
        object.__setattr__(self, "risk_exponent", p)

    @property
    def exact(self):
        return self.risk_exponent.denominator == 1

    def __call__(self, x):
        x = as_rational(x)
        p = self.risk_exponent
        if self.exact:
            return -(abs(x) ** int(p))
        return -(float(abs(x)) ** float(p))


class MetaAction(enum.Enum):
    AMBIGUOUS = "A"
    COMMIT = "C"

    def __str__(self):
        return self.value


A = MetaAction.AMBIGUOUS
C = MetaAction.COMMIT
PROFILES = ((A, A), (A, C), (C, A), (C, C))


def profile_label(profile):
    """``(A, C) -> "A:C"`` (centrist action first)."""
    return f"{profile[0].value}:{profile[1].value}"


def parse_profile(text):
    c, e = text.strip().upper().replace(",", ":").split(":")
    return MetaAction(c), MetaAction(e)


class Regime(enum.Enum):
    CENTRIST_AMBIGUITY = "CentristAmbiguity"
    FULL_COMMITMENT = "FullCommitment"
    BOUNDARY = "Boundary"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class AmbiguityGame:
    commit_set_C: DeviationSet
    commit_set_E: DeviationSet
    ambiguous_set_C: DeviationSet
    ambiguous_set_E: DeviationSet
    utility: VoterUtility = field(default_factory=VoterUtility)

    def __post_init__(self):
        for party in "CE":
            commit = getattr(self, f"commit_set_{party}")
            amb = getattr(self, f"ambiguous_set_{party}")
            if not commit.issubset(amb):
                raise DomainError(f"commit set of {party} must be contained in its ambiguous set")

    @property
    def centrist_less_uncertain(self):
        """Whether the centrist's ambiguous set is strictly smaller (canonical ordering)."""
        return len(self.ambiguous_set_C) < len(self.ambiguous_set_E)

    def canonical_parameters(self):
        """Return ``(k, l)`` if this is the canonical game, else ``None``."""
        if self.utility.risk_exponent != 2:
            return None
        base = self.ambiguous_set_C.values
        if len(base) != 5 or base[1:4] != (-1, 0, 1) or base[0] != -base[4]:
            return None
        k = base[4]
        if not (self.commit_set_C.values == self.commit_set_E.values == base):
            return None
        ext = self.ambiguous_set_E.values
        if len(ext) != 7 or ext[0] != -ext[6] or ext[1:6] != base:
            return None
        l = ext[6]
        if not 1 < k < l:
            return None
        return k, l


def canonical_game(k, l):
    """Canonical game: commit sets and the centrist's ambiguous set are
    ``{-k, -1, 0, 1, k}``; the extremist's ambiguous set adds ``±l``."""
    k, l = as_rational(k), as_rational(l)
    _check_kl(k, l)
    base = DeviationSet((-k, Fraction(-1), Fraction(0), Fraction(1), k))
    ext = DeviationSet((-l, -k, Fraction(-1), Fraction(0), Fraction(1), k, l))
    return AmbiguityGame(base, base, base, ext, VoterUtility(Fraction(2)))


def _check_kl(k, l):
    if not k > 1:
        raise DomainError(f"canonical game needs 1 < k < l, got k={k}")
    if not l > k:
        raise DomainError(f"canonical game needs 1 < k < l, got k={k}, l={l}")


def lottery_expected_utility(values, utility=None):
    """Mean of ``utility`` over a uniform lottery on ``values``.

    Exact (Fraction) for integer exponents, float otherwise.
    """
    utility = utility or VoterUtility()
    vals = values.values if isinstance(values, DeviationSet) else tuple(values)
    if not vals:
        raise DomainError("empty lottery")
    total = sum(utility(v) for v in vals)
    if utility.exact:
        return Fraction(total) / len(vals)
    return total / len(vals)


def _scores(game, party, action):
    """Possible voter scores of ``party`` under ``action``, each equally likely."""
    if action is MetaAction.AMBIGUOUS:
        return (lottery_expected_utility(getattr(game, f"ambiguous_set_{party}"), game.utility),)
    return tuple(game.utility(d) for d in getattr(game, f"commit_set_{party}"))


def voter_choice(score_c, score_e, exact=True):
    """Centrist's share of the vote-choice: 1, 1/2 or 0."""
    if exact:
        if score_c > score_e:
            return Fraction(1)
        if score_c == score_e:
            return Fraction(1, 2)
        return Fraction(0)
    diff = float(score_c) - float(score_e)
    if abs(diff) <= FLOAT_TOL:
        return 0.5
    return 1.0 if diff > 0 else 0.0


def outcome_table(game, profile):
    """Matrix of centrist win shares over all (C realization, E realization) pairs."""
    sc = _scores(game, "C", profile[0])
    se = _scores(game, "E", profile[1])
    exact = game.utility.exact
    return [[voter_choice(a, b, exact) for b in se] for a in sc]


def contest_win_probabilities(game, profile):
    """``(P(C wins), P(E wins))`` for an action profile ``(centrist, extremist)``."""
    profile = tuple(MetaAction(p) if not isinstance(p, MetaAction) else p for p in profile)
    table = outcome_table(game, profile)
    n = len(table) * len(table[0])
    if game.utility.exact:
        p_c = sum(itertools.chain.from_iterable(table), Fraction(0)) / n
        return p_c, 1 - p_c
    p_c = math.fsum(itertools.chain.from_iterable(table)) / n
    return p_c, 1.0 - p_c


@dataclass(frozen=True)
class PayoffMatrix:
    """Win probabilities keyed by ``(centrist action, extremist action)``."""

    entries: dict

    def __post_init__(self):
        if set(self.entries) != set(PROFILES):
            raise DomainError("payoff matrix needs all four action profiles")
        for prof, (pc, pe) in self.entries.items():
            if not (0 <= pc <= 1 and 0 <= pe <= 1):
                raise DomainError(f"probability outside [0, 1] at {profile_label(prof)}")
            s = pc + pe
            if (s != 1) if isinstance(s, Fraction) else abs(s - 1) > FLOAT_TOL:
                raise DomainError(f"win probabilities at {profile_label(prof)} sum to {s}")

    def __getitem__(self, profile):
        return self.entries[profile]

    def centrist(self, profile):
        return self.entries[profile][0]

    def extremist(self, profile):
        return self.entries[profile][1]


def payoff_matrix(game):
    return PayoffMatrix({prof: contest_win_probabilities(game, prof) for prof in PROFILES})


def _other(action):
    return C if action is A else A


def pure_nash_equilibria(matrix):
    """Profiles where neither party strictly gains by switching its action.

    Returned in the fixed order (A,A), (A,C), (C,A), (C,C) as a tuple.
    """
    out = []
    for c_act, e_act in PROFILES:
        c_gain = matrix.centrist((_other(c_act), e_act)) > matrix.centrist((c_act, e_act))
        e_gain = matrix.extremist((c_act, _other(e_act))) > matrix.extremist((c_act, e_act))
        if not (c_gain or e_gain):
            out.append((c_act, e_act))
    return tuple(out)


def analytic_regime(k, l, eps_b=0):
    """Closed-form regime of the canonical game.

    ``eps_b = 0`` compares exactly and reports ``BOUNDARY`` only at k² = 3/2;
    a positive ``eps_b`` widens the boundary band to ``|k² - 3/2| <= eps_b``.
    """
    k, l = as_rational(k), as_rational(l)
    _check_kl(k, l)
    gap = k * k - THRESHOLD_K2
    if eps_b:
        if abs(gap) <= as_rational(eps_b):
            return Regime.BOUNDARY
    elif gap == 0:
        return Regime.BOUNDARY
    return Regime.CENTRIST_AMBIGUITY if gap < 0 else Regime.FULL_COMMITMENT


REGIME_EQUILIBRIA = {
    Regime.CENTRIST_AMBIGUITY: ((A, C),),
    Regime.FULL_COMMITMENT: ((C, C),),
}


@dataclass(frozen=True)
class EquilibriumReport:
    game: AmbiguityGame
    payoffs: PayoffMatrix
    pure_equilibria: tuple
    regime: Regime | None
    thresholds: dict | None

    @property
    def extension(self):
        """True for games outside the canonical family (no analytic regime)."""
        return self.regime is None

    def consistent(self):
        """Whether the enumerated equilibria match the analytic regime."""
        if self.regime is None or self.regime is Regime.BOUNDARY:
            return True
        return self.pure_equilibria == REGIME_EQUILIBRIA[self.regime]


def solve(game, eps_b=0):
    """Payoffs, pure equilibria and (for canonical games) the analytic regime."""
    payoffs = payoff_matrix(game)
    eqs = pure_nash_equilibria(payoffs)
    params = game.canonical_parameters()
    if params is None:
        return EquilibriumReport(game, payoffs, eqs, None, None)
    k, l = params
    thresholds = {"k2_minus_3/2": k * k - THRESHOLD_K2, "k2_plus_l2_minus_5/2": k * k + l * l - THRESHOLD_K2_L2}
    return EquilibriumReport(game, payoffs, eqs, analytic_regime(k, l, eps_b), thresholds)
