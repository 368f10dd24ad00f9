"""Closed-form statistics of the swap-test decision problem.

Probability/overlap/distance conversions, the epsilon thresholds, the exact
false-negative tail, Bernoulli KL divergence, the Chernoff-Hoeffding bound
pair, the sharpness point, and the two scaling curves.

Conventions.  The swap test succeeds ("0" on the ancilla) with probability
p; a pair is declared an epsilon-neighbour iff the estimate p_hat exceeds
the threshold alpha strictly; the false-negative event is p_hat <= alpha
when truly p > alpha.  With X ~ Bin(N, 1-p) counting failures,

    xi(N, alpha, p) = P(X >= ceil(N*(1-alpha))).

Caveat on the bound pair: the upper bound exp(-N*KL(alpha||p)) holds for
every N whenever alpha < p, but the matching lower bound
exp(-N*KL)/sqrt(2N) is only guaranteed when N*(1-alpha) is an integer (the
ceiling in xi otherwise shifts the realized threshold above alpha, and the
exact tail can drop below the bound -- e.g. N=1, alpha=0.5, p=0.9 gives
xi=0.1 versus a "lower bound" of 0.424).

All functions are pure; safe for unrestricted parallel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np
from scipy.special import logsumexp

SQRT2 = math.sqrt(2.0)

_HALF_LN_2PI = 0.5 * math.log(2.0 * math.pi)

# stirlerr(n) = ln n! - [n ln n - n + ln(2 pi n)/2]; exact (via lgamma) for
# n <= 15, asymptotic series above.  The saddle-point probability form built
# on it keeps the tail accurate to ~1e-13 relative up to N = 10^6, where
# differencing large log-gamma values alone would lose ~7 digits.
_STIRLERR_SMALL = np.array(
    [0.0]
    + [
        math.lgamma(n + 1) - (n + 0.5) * math.log(n) + n - _HALF_LN_2PI
        for n in range(1, 16)
    ]
)


def _stirlerr(n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    small = n < 15.5
    safe = np.where(small, 1.0, n)
    series = (
        1.0 / (12.0 * safe)
        - 1.0 / (360.0 * safe**3)
        + 1.0 / (1260.0 * safe**5)
        - 1.0 / (1680.0 * safe**7)
        + 1.0 / (1188.0 * safe**9)
    )
    idx = np.clip(n.astype(int), 0, 15)
    return np.where(small, _STIRLERR_SMALL[idx], series)


def _bd0(x: np.ndarray, m: float) -> np.ndarray:
    """Binomial deviance x*ln(x/m) + m - x, stable for x near m."""
    x = np.asarray(x, dtype=float)
    close = np.abs(x - m) < 0.1 * (x + m)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0) / m), 0.0) + m - x
    v = (x - m) / (x + m)
    s = (x - m) * v
    ej = 2.0 * x * v
    v2 = v * v
    j = 1
    while True:
        ej = ej * v2
        s_new = s + ej / (2 * j + 1)
        if np.all(np.where(close, s_new == s, True)):
            s = s_new
            break
        s = s_new
        j += 1
    return np.where(close, s, direct)


def _binom_logpmf(k: np.ndarray, n: int, q: float) -> np.ndarray:
    """ln P(Bin(n, q) = k), saddle-point form, vectorized over integer k."""
    k = np.asarray(k, dtype=float)
    p = 1.0 - q
    interior = (k > 0) & (k < n)
    kk = np.where(interior, k, 0.5 * n)  # dummy interior value at the endpoints
    lf = (
        _stirlerr(n)
        - _stirlerr(kk)
        - _stirlerr(n - kk)
        - _bd0(kk, n * q)
        - _bd0(n - kk, n * p)
        + 0.5 * (math.log(n) - math.log(2.0 * math.pi) - np.log(kk) - np.log(n - kk))
    )
    lf = np.where(k == 0, n * math.log1p(-q), lf)
    lf = np.where(k == n, n * math.log(q) if q > 0 else -math.inf, lf)
    return lf


def _check_open_unit(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie strictly inside (0, 1), got {value}")


def _check_ordering(alpha: float, p: float) -> None:
    _check_open_unit("alpha", alpha)
    _check_open_unit("p", p)
    if alpha >= p:
        raise ValueError(f"need alpha < p, got alpha={alpha}, p={p}")


def prob_to_overlap_sq(p: float) -> float:
    """Invert p = (1 + |<phi|psi>|^2)/2; result clamped to [0, 1]."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return min(1.0, max(0.0, 2.0 * p - 1.0))


def overlap_to_distance(overlap_abs: float) -> float:
    """Euclidean distance of unit vectors with |<phi|psi>| = overlap_abs:
    sqrt(2*(1 - overlap))."""
    if not 0.0 <= overlap_abs <= 1.0:
        raise ValueError(f"overlap modulus must lie in [0, 1], got {overlap_abs}")
    return math.sqrt(2.0 * (1.0 - overlap_abs))


def alpha_eps_standard(eps: float) -> float:
    """Success-probability threshold equivalent to distance < eps:
    ((1 - eps^2/2)^2 + 1) / 2."""
    if not 0.0 < eps <= SQRT2:
        raise ValueError(f"eps must lie in (0, sqrt(2)], got {eps}")
    c = 1.0 - eps * eps / 2.0
    return (c * c + 1.0) / 2.0


def alpha_eps_multi(eps: float, n: int) -> float:
    """Multi-swap analogue of alpha_eps_standard, scaled by 2^4/n^3 to match
    the nominal per-pair probability (1 + overlap^2) * 2^3 / n^3."""
    from .circuits import mid_ancilla_count  # argument validation for n

    mid_ancilla_count(n)
    return alpha_eps_standard(eps) * 16.0 / float(n) ** 3


def p0ij_theory(overlap_sq: float, n: int) -> float:
    """Nominal per-pair joint probability 2^3*(1 + overlap_sq)/n^3.

    This is the multiplicity-2 case of the exact per-pair law
    multiplicity * (1 + overlap_sq) / 2^{d_n+1}; see circuits.PairMap.
    """
    from .circuits import mid_ancilla_count

    mid_ancilla_count(n)
    if not 0.0 <= overlap_sq <= 1.0:
        raise ValueError(f"overlap_sq must lie in [0, 1], got {overlap_sq}")
    return 8.0 * (1.0 + overlap_sq) / float(n) ** 3


def kl_bernoulli(a: float, p: float) -> float:
    """KL(Ber(a) || Ber(p)) = a*ln(a/p) + (1-a)*ln((1-a)/(1-p)).

    Evaluated through log1p of the parameter gap, which stays positive and
    accurate for nearly equal arguments where the textbook form cancels.
    """
    _check_open_unit("a", a)
    _check_open_unit("p", p)
    delta = p - a
    return -a * math.log1p(delta / a) - (1.0 - a) * math.log1p(-delta / (1.0 - a))


def _exact_n_one_minus_alpha(N: int, alpha: float) -> Fraction:
    return Fraction(N) * (1 - Fraction(alpha))


def tail_threshold(N: int, alpha: float) -> int:
    """ceil(N*(1-alpha)), evaluated in exact rational arithmetic and snapped
    to the nearest integer when within N*1e-12 of one.

    The snap honours decimal intent: a threshold like 0.95 is not exactly
    representable in binary, and without it N*(1-alpha) can land a hair above
    the integer the caller meant, silently excluding a boundary count that the
    float decision rule p_hat <= alpha would include.
    """
    frac = _exact_n_one_minus_alpha(N, alpha)
    x = float(frac)
    nearest = round(x)
    if abs(x - nearest) <= 1e-12 * max(1, N):
        return int(nearest)
    return int(-((-frac) // 1))


def threshold_aligned(N: int, alpha: float) -> bool:
    """True when N*(1-alpha) lands on an integer (same snap tolerance as
    tail_threshold).  This is the regime in which the exp(-N*KL)/sqrt(2N)
    lower bound on the exact tail is guaranteed."""
    x = float(_exact_n_one_minus_alpha(N, alpha))
    return abs(x - round(x)) <= 1e-12 * max(1, N)


def false_negative_exact(N: int, alpha: float, p: float) -> float:
    """Exact false-negative probability: the upper binomial tail
    sum_{i=ceil(N(1-alpha))}^{N} C(N,i) (1-p)^i p^{N-i}.

    Relative error <= 1e-12 for N up to 10^6 (within double range).
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    _check_open_unit("alpha", alpha)
    _check_open_unit("p", p)
    k = tail_threshold(N, alpha)
    if k <= 0:
        return 1.0
    if k > N:
        return 0.0
    i = np.arange(k, N + 1)
    log_terms = _binom_logpmf(i, N, 1.0 - p)
    return float(min(1.0, math.exp(logsumexp(log_terms))))


def n_gamma(gamma: float, alpha: float, p: float) -> float:
    """Repetition count at which the Chernoff upper bound equals gamma:
    ln(1/gamma) / KL(alpha||p).  Real-valued; take the ceiling only when
    planning actual shot counts (the sharpness point lands at N = 1/2)."""
    _check_open_unit("gamma", gamma)
    _check_ordering(alpha, p)
    return math.log(1.0 / gamma) / kl_bernoulli(alpha, p)


def chernoff_upper(N: float, alpha: float, p: float) -> float:
    """exp(-N*KL(alpha||p)): upper bound on the false-negative tail for
    alpha < p, any N > 0."""
    if N <= 0:
        raise ValueError(f"N must be positive, got {N}")
    _check_ordering(alpha, p)
    return math.exp(-N * kl_bernoulli(alpha, p))


def chernoff_lower(N: float, alpha: float, p: float) -> float:
    """exp(-N*KL(alpha||p)) / sqrt(2N).

    A valid lower bound on the exact tail when N*(1-alpha) is an integer;
    see the module docstring for the non-aligned caveat.
    """
    if N <= 0:
        raise ValueError(f"N must be positive, got {N}")
    _check_ordering(alpha, p)
    return math.exp(-N * kl_bernoulli(alpha, p)) / math.sqrt(2.0 * N)


def gamma_tilde(alpha: float, p: float) -> float:
    """Error level at which the lower bound is sharp: exp(-KL(alpha||p)/2),
    i.e. the gamma solving KL = 2*ln(1/gamma)."""
    _check_ordering(alpha, p)
    return math.exp(-kl_bernoulli(alpha, p) / 2.0)


def theorem1_calls(n: int, gamma: float) -> float:
    """Oracle-call scaling curve n^6 / (2^6 * gamma^2) for estimating all
    pairwise overlaps to expected L2 accuracy gamma (constant factor is the
    nominal 2^{2 d_n}; no absolute calibration is claimed)."""
    from .circuits import mid_ancilla_count

    mid_ancilla_count(n)
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    return float(n) ** 6 / (64.0 * gamma * gamma)


def proposition1_lower(n: int, gamma_t: float) -> float:
    """Stated repetition lower-bound curve n^3 * ln(1/gamma_t) / ln(n)."""
    from .circuits import mid_ancilla_count

    mid_ancilla_count(n)
    _check_open_unit("gamma_t", gamma_t)
    return float(n) ** 3 * math.log(1.0 / gamma_t) / math.log(n)


@dataclass(frozen=True)
class BoundsQuery:
    """One (alpha, p, N, gamma) cell of the bound machinery; requires the
    false-negative regime 0 < alpha < p < 1."""

    alpha: float
    p: float
    N: int
    gamma: float

    def __post_init__(self):
        _check_ordering(self.alpha, self.p)
        _check_open_unit("gamma", self.gamma)
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")

    def kl(self) -> float:
        return kl_bernoulli(self.alpha, self.p)

    def xi_exact(self) -> float:
        return false_negative_exact(self.N, self.alpha, self.p)

    def upper(self) -> float:
        return chernoff_upper(self.N, self.alpha, self.p)

    def lower(self) -> float:
        return chernoff_lower(self.N, self.alpha, self.p)

    def n_gamma(self) -> float:
        return n_gamma(self.gamma, self.alpha, self.p)


@dataclass(frozen=True)
class OverlapEstimate:
    """Per-pair estimate assembled from measurement counts.

    p_hat is exactly hits/shots_total; overlap_sq_hat and distance_hat are
    clamped to their valid domains, with ``clamped`` flagging records whose
    raw inversion fell outside.  Exact-probability records (infinite-shot
    mode) carry shots_total = 0 and hits = 0 with p_hat set directly.
    """

    pair: tuple[int, int] | None
    shots_total: int
    hits: int
    p_hat: float
    overlap_sq_hat: float
    distance_hat: float
    clamped: bool = False


EstimateMode = Literal["standard", "multi"]


def _estimate_fields(
    p_hat: float, mode: EstimateMode, n: int | None, constant: float | None
) -> tuple[float, float, bool]:
    if mode == "standard":
        raw = 2.0 * p_hat - 1.0
    elif mode == "multi":
        if constant is not None:
            c = constant
        else:
            if n is None:
                raise ValueError("multi mode needs n (or an explicit constant)")
            c = 8.0 / float(n) ** 3
        raw = p_hat / c - 1.0
    else:
        raise ValueError(f"unknown estimate mode {mode!r}")
    overlap_sq = min(1.0, max(0.0, raw))
    clamped = not (0.0 <= raw <= 1.0)
    distance = overlap_to_distance(math.sqrt(overlap_sq))
    return overlap_sq, distance, clamped


def estimate_from_counts(
    hits: int,
    shots: int,
    mode: EstimateMode,
    n: int | None = None,
    constant: float | None = None,
    pair: tuple[int, int] | None = None,
) -> OverlapEstimate:
    """Turn qualifying-outcome counts into an overlap/distance estimate.

    standard: p_hat inverted through p = (1 + o^2)/2.
    multi: p_hat inverted through p = constant * (1 + o^2), where constant
    defaults to the nominal 2^3/n^3 and may be overridden with a calibrated
    per-pair coefficient (circuits.PairMap.pair_constant).
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if not 0 <= hits <= shots:
        raise ValueError(f"hits must lie in [0, {shots}], got {hits}")
    p_hat = hits / shots
    overlap_sq, distance, clamped = _estimate_fields(p_hat, mode, n, constant)
    return OverlapEstimate(pair, shots, hits, p_hat, overlap_sq, distance, clamped)


def estimate_from_probability(
    p: float,
    mode: EstimateMode,
    n: int | None = None,
    constant: float | None = None,
    pair: tuple[int, int] | None = None,
) -> OverlapEstimate:
    """Infinite-shot variant of estimate_from_counts (shots_total = 0)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    overlap_sq, distance, clamped = _estimate_fields(p, mode, n, constant)
    return OverlapEstimate(pair, 0, 0, p, overlap_sq, distance, clamped)
