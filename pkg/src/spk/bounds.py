"""Mixing-time bounds from profiles, the spectral gap and functional constants.

All integrals over step profiles are closed form (sums of logarithms); the
profile-derived mass scale V(t), defined by t = integral from the lower
limit to V(t) of dv/(v * profile(v)), is inverted exactly piece by piece.

Every bound is packaged as a BoundReport carrying the inputs it consumed
and assumption flags.  When a theorem hypothesis fails the value is still
computed and the report flagged `hypothesis_violated`, so diagnostics stay
available without silently certifying anything.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlphaOutOfRange,
    EpsilonTooLarge,
    GridTooCoarse,
    NonpositiveProfile,
    NotReversible,
    RegularityFailed,
    ValidationFailed,
    ZeroHolding,
)

FLAG_EMPTY_RANGE = "empty_integration_range"
FLAG_HYPOTHESIS = "hypothesis_violated"
FLAG_BAND_EDGE = "band_lower_edge+gap_floor"
FLAG_ENVELOPE = "profile_lower_envelope"
FLAG_ESTIMATED_RHO = "estimated_rho"
FLAG_REVERSIBLE_ONLY = "reversible_only"

_UNCERTIFIED = (FLAG_HYPOTHESIS, FLAG_ESTIMATED_RHO)


@dataclass(frozen=True)
class BoundReport:
    """One named bound: its value, accuracy target, inputs and provenance.

    ``validity`` is "upper" or "lower" (for the mixing time), ``anchor`` a
    stable identifier of the formula family, ``assumptions`` flags recording
    checked hypotheses and non-certified inputs.
    """

    name: str
    value: float
    epsilon: float
    validity: str
    inputs: dict = field(default_factory=dict)
    assumptions: tuple = ()
    anchor: str = ""

    def __post_init__(self):
        if self.validity not in ("upper", "lower"):
            raise ValidationFailed(f"validity {self.validity!r}")
        if self.value < 0:
            raise ValidationFailed(f"negative bound value {self.value!r}")

    @property
    def certified(self):
        return not any(f.startswith(p) for f in self.assumptions
                       for p in _UNCERTIFIED)

    def to_json(self):
        return {
            "name": self.name,
            "value": self.value,
            "epsilon": self.epsilon,
            "validity": self.validity,
            "inputs": dict(self.inputs),
            "assumptions": list(self.assumptions),
            "anchor": self.anchor,
        }


def profile_integral(profile, lo, hi):
    """Closed-form integral of dv/(v * profile(v)) over [lo, hi]."""
    if hi <= lo:
        return 0.0
    bps = profile.breakpoints
    vals = profile.values
    if np.any(vals <= 0):
        raise NonpositiveProfile("profile has nonpositive steps")
    knots = np.concatenate([[lo], bps[(bps > lo) & (bps < hi)], [hi]])
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        total += math.log(b / a) / profile(a)
    return total


@dataclass(frozen=True)
class MassScale:
    """Exact inverse of t = integral_{lower}^{V(t)} dv/(v * profile(v)).

    Piecewise exponential: within a constant-profile piece,
    V(t) = v_i * exp(value_i * (t - t_i)).  Strictly increasing and
    continuous with V(0) = lower.
    """

    knots_t: np.ndarray
    knots_v: np.ndarray
    rates: np.ndarray
    lower: float

    def value(self, t):
        """V(t) for scalar t >= 0."""
        if t < 0:
            raise ValidationFailed(f"t={t!r} must be >= 0")
        i = int(np.searchsorted(self.knots_t, t, side="right") - 1)
        i = max(i, 0)
        return float(self.knots_v[i] * math.exp(self.rates[i] *
                                                (t - self.knots_t[i])))

    def time_to_reach(self, v):
        """Inverse map: the t with V(t) = v (v >= lower)."""
        if v <= self.lower:
            return 0.0
        i = int(np.searchsorted(self.knots_v, v, side="right") - 1)
        i = min(max(i, 0), len(self.rates) - 1)
        return float(self.knots_t[i] +
                     math.log(v / self.knots_v[i]) / self.rates[i])


def mass_scale(profile, lower):
    """Build the MassScale of a positive step profile from a lower limit."""
    vals = profile.values
    if np.any(vals <= 0):
        raise NonpositiveProfile("profile has nonpositive steps")
    bps = profile.breakpoints
    knots_v = [lower]
    knots_t = [0.0]
    rates = []
    for b in bps[bps > lower]:
        rate = profile(knots_v[-1])
        rates.append(rate)
        knots_t.append(knots_t[-1] + math.log(b / knots_v[-1]) / rate)
        knots_v.append(float(b))
    rates.append(profile(knots_v[-1]))
    return MassScale(knots_t=np.array(knots_t), knots_v=np.array(knots_v),
                     rates=np.array(rates), lower=float(lower))


def _epsilon_window(eps, pi_star):
    lo, hi = 4.0 * pi_star, 4.0 / eps
    if eps <= 0:
        raise EpsilonTooLarge(f"epsilon={eps!r} must be positive")
    return lo, hi


# -- continuous-time upper bounds ------------------------------------------------

def tau_upper_spectral(profile, eps, pi_star, profile_flag=FLAG_BAND_EDGE):
    """Uniform-distance mixing bound 2 * integral of dv/(v*profile) over
    [4 pi_*, 4/eps], with `profile` a certified lower bound of the spectral
    profile."""
    lo, hi = _epsilon_window(eps, pi_star)
    flags = [profile_flag] if profile_flag else []
    if hi <= lo:
        flags.append(FLAG_EMPTY_RANGE)
        value = 0.0
    else:
        value = 2.0 * profile_integral(profile, lo, hi)
    return BoundReport(
        name="tau_inf_upper_spectral_profile",
        value=value, epsilon=eps, validity="upper",
        inputs={"pi_star": pi_star},
        assumptions=tuple(flags),
        anchor="spectral-profile-integral",
    )


def tau_upper_conductance(phi_star, eps, pi_star, profile_flag=None):
    """Conductance-profile mixing bound: integral of 4 dv/(v * Phi*^2)."""
    lo, hi = _epsilon_window(eps, pi_star)
    flags = [profile_flag] if profile_flag else []
    if phi_star.kind == "upper_envelope":
        raise ValidationFailed("conductance bound needs exact or lower Phi*")
    if phi_star.kind == "lower_envelope":
        flags.append(FLAG_ENVELOPE)
    if hi <= lo:
        flags.append(FLAG_EMPTY_RANGE)
        value = 0.0
    else:
        squared = phi_star.transform(lambda r, v: v * v / 4.0)
        value = profile_integral(squared, lo, hi)
    return BoundReport(
        name="tau_inf_upper_conductance_profile",
        value=value, epsilon=eps, validity="upper",
        inputs={"pi_star": pi_star},
        assumptions=tuple(flags),
        anchor="conductance-profile-integral",
    )


def l2_decay_upper(profile, t, pi_star):
    """Upper bound 4/V(t) on the worst-start squared L2 distance at time t."""
    scale = mass_scale(profile, 4.0 * pi_star)
    return 4.0 / scale.value(t)


def tau_upper_spectral_gap(lam1, pi_star, eps):
    """The classical gap bounds: tau_2(eps) and tau_inf at target 1/e.

    Returns (l2 report at the requested eps, uniform report at 1/e).
    """
    if lam1 <= 0:
        raise ValidationFailed(f"lam1={lam1!r} must be positive")
    tau2 = max(0.0, math.log(1.0 / (eps * math.sqrt(pi_star)))) / lam1
    tau_inf = (1.0 + math.log(1.0 / pi_star)) / lam1
    rep2 = BoundReport(
        name="tau_2_upper_spectral_gap",
        value=tau2, epsilon=eps, validity="upper",
        inputs={"lambda_1": lam1, "pi_star": pi_star},
        anchor="gap-l2-log",
    )
    repinf = BoundReport(
        name="tau_inf_upper_spectral_gap",
        value=tau_inf, epsilon=math.exp(-1), validity="upper",
        inputs={"lambda_1": lam1, "pi_star": pi_star},
        anchor="gap-uniform-log",
    )
    return rep2, repinf


# -- discrete-time upper bounds ---------------------------------------------------

def tau_discrete_upper(profile, alpha, eps, pi_star,
                       profile_flag=FLAG_BAND_EDGE):
    """Discrete steps 2*ceil(integral dv/(alpha v profile)) via the holding
    probability alpha = min_x K(x,x) of the kernel the profile belongs to."""
    if alpha <= 0:
        raise ZeroHolding(f"alpha={alpha!r}; the holding route needs alpha > 0")
    lo, hi = _epsilon_window(eps, pi_star)
    flags = [profile_flag] if profile_flag else []
    if hi <= lo:
        flags.append(FLAG_EMPTY_RANGE)
        value = 0
    else:
        value = 2 * math.ceil(profile_integral(profile, lo, hi) / alpha)
    return BoundReport(
        name="tau_inf_discrete_upper_holding",
        value=value, epsilon=eps, validity="upper",
        inputs={"alpha": alpha, "pi_star": pi_star, "route": "holding"},
        assumptions=tuple(flags),
        anchor="discrete-holding-integral",
    )


def tau_discrete_upper_symmetrized(profile_kkstar, profile_kstark, eps,
                                   pi_star, irreducible=(True, True),
                                   profile_flag=FLAG_BAND_EDGE):
    """Discrete steps from the profiles of the products KK* and K*K."""
    from .errors import ReducibleSymmetrization

    if not all(irreducible):
        raise ReducibleSymmetrization("KK* or K*K is reducible")
    lo, hi = _epsilon_window(eps, pi_star)
    flags = [profile_flag] if profile_flag else []
    if hi <= lo:
        flags.append(FLAG_EMPTY_RANGE)
        value = 0
    else:
        ints = [profile_integral(p, lo, hi)
                for p in (profile_kkstar, profile_kstark)]
        value = 2 * math.ceil(max(ints))
    return BoundReport(
        name="tau_inf_discrete_upper_symmetrized",
        value=value, epsilon=eps, validity="upper",
        inputs={"pi_star": pi_star, "route": "multiplicative_symmetrization"},
        assumptions=tuple(flags),
        anchor="discrete-symmetrization-integral",
    )


def tau_discrete_conductance(phi_star, alpha, eps, pi_star,
                             profile_flag=None):
    """Discrete conductance bounds: the rescaled form with factor
    alpha/(1-alpha) and the Morris-Peres comparator with factor
    min{alpha^2/(1-alpha)^2, 1}.  Returns (rescaled, comparator)."""
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha={alpha!r} must be in (0, 1)")
    if phi_star.kind == "upper_envelope":
        raise ValidationFailed("conductance bound needs exact or lower Phi*")
    lo, hi = _epsilon_window(eps, pi_star)
    flags = [profile_flag] if profile_flag else []
    if phi_star.kind == "lower_envelope":
        flags.append(FLAG_ENVELOPE)
    squared = phi_star.transform(lambda r, v: v * v / 2.0)
    if hi <= lo:
        flags = flags + [FLAG_EMPTY_RANGE]
        base = 0.0
    else:
        base = profile_integral(squared, lo, hi)
    factor_rescaled = alpha / (1.0 - alpha)
    factor_mp = min((alpha / (1.0 - alpha)) ** 2, 1.0)
    rescaled = BoundReport(
        name="tau_inf_discrete_upper_conductance_rescaled",
        value=2 * math.ceil(base / factor_rescaled) if base else 0,
        epsilon=eps, validity="upper",
        inputs={"alpha": alpha, "pi_star": pi_star},
        assumptions=tuple(flags),
        anchor="discrete-conductance-rescaled",
    )
    comparator = BoundReport(
        name="tau_inf_discrete_upper_morris_peres",
        value=2 * math.ceil(base / factor_mp) if base else 0,
        epsilon=eps, validity="upper",
        inputs={"alpha": alpha, "pi_star": pi_star},
        assumptions=tuple(flags),
        anchor="morris-peres-comparator",
    )
    return rescaled, comparator


# -- combined functional bounds ----------------------------------------------------

def tau_upper_combined(lam1, pi_star, eps, rho=None, nash=None,
                       rho_estimated=False):
    """Mixing bounds from the gap plus log-Sobolev and/or Nash constants.

    Emits up to four reports: log-Sobolev-only, Nash-only, the mixed form,
    and the Aldous-Fill comparator.  Hypotheses (DC >= T, D >= 1,
    pi_* <= 1/4e, eps <= 8) are checked and recorded; a violated hypothesis
    flags the report instead of suppressing it.
    """
    if lam1 <= 0:
        raise ValidationFailed(f"lam1={lam1!r} must be positive")
    reports = []
    common_flags = []
    if pi_star > 1.0 / (4.0 * math.e):
        common_flags.append(FLAG_HYPOTHESIS + ":pi_star>1/(4e)")
    if eps > 8.0:
        common_flags.append(FLAG_HYPOTHESIS + ":epsilon>8")
    if rho_estimated:
        common_flags.append(FLAG_ESTIMATED_RHO)

    if rho is not None and rho > 0:
        value = (2.0 / rho) * math.log(max(math.log(1.0 / (4.0 * pi_star)),
                                           1e-300)) \
            + (2.0 / lam1) * math.log(8.0 / eps)
        reports.append(BoundReport(
            name="tau_inf_upper_logsob",
            value=max(value, 0.0), epsilon=eps, validity="upper",
            inputs={"rho": rho, "lambda_1": lam1, "pi_star": pi_star},
            assumptions=tuple(common_flags),
            anchor="logsob-gap-combination",
        ))

    nash_flags = list(common_flags)
    if nash is not None:
        C, D, T = nash
        if D * C < T:
            nash_flags.append(FLAG_HYPOTHESIS + ":DC<T")
        if D < 1.0:
            nash_flags.append(FLAG_HYPOTHESIS + ":D<1")
        value = 4.0 * T + (2.0 / lam1) * (
            2.0 * D * math.log(2.0 * D * C / T) + math.log(4.0 / eps))
        reports.append(BoundReport(
            name="tau_inf_upper_nash",
            value=max(value, 0.0), epsilon=eps, validity="upper",
            inputs={"C": C, "D": D, "T": T, "lambda_1": lam1,
                    "pi_star": pi_star},
            assumptions=tuple(nash_flags),
            anchor="nash-gap-combination",
        ))
        if rho is not None and rho > 0:
            mixed = 4.0 * T + (2.0 / rho) * math.log(
                max(2.0 * D * math.log(2.0 * D * C / T), 1e-300)) \
                + (2.0 / lam1) * math.log(8.0 / eps)
            reports.append(BoundReport(
                name="tau_inf_upper_nash_logsob",
                value=max(mixed, 0.0), epsilon=eps, validity="upper",
                inputs={"rho": rho, "C": C, "D": D, "T": T,
                        "lambda_1": lam1, "pi_star": pi_star},
                assumptions=tuple(nash_flags),
                anchor="nash-logsob-combination",
            ))
            af = 2.0 * T + (1.0 / rho) * math.log(
                max(D * math.log(D * C / T), 1e-300)) \
                + (1.0 / lam1) * (4.0 + math.log(1.0 / eps))
            reports.append(BoundReport(
                name="tau_inf_upper_aldous_fill",
                value=max(af, 0.0), epsilon=eps, validity="upper",
                inputs={"rho": rho, "C": C, "D": D, "T": T,
                        "lambda_1": lam1},
                assumptions=tuple(nash_flags),
                anchor="aldous-fill-comparator",
            ))
    return reports


# -- lower bounds --------------------------------------------------------------------

def heat_diag_lower(lambda0_S, pi_S, t):
    """exp(-t * lambda0(S)) / (2 pi(S)): a floor on sup_x h_t(x,x) for
    reversible chains."""
    return math.exp(-t * lambda0_S) / (2.0 * pi_S)


def delta_regularity(ts, values, delta, window=None, slack=1e-9):
    """Check f'(s)/f(s) >= delta * f'(t)/f(t) for all t < s <= 2t.

    Logarithmic derivatives come from centered differences on the (log-t)
    grid; the grid must carry at least 32 points per decade.  Returns
    (ok, witness) with the first violating (t, s) pair.
    """
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if ts.ndim != 1 or ts.shape != values.shape or ts.size < 3:
        raise ValidationFailed("need matching 1-d grids with >= 3 points")
    if np.any(np.diff(ts) <= 0) or np.any(values <= 0):
        raise ValidationFailed("grid must be increasing, values positive")
    decades = math.log10(ts[-1] / ts[0])
    if decades > 0 and (ts.size - 1) / decades < 32:
        raise GridTooCoarse(
            f"{(ts.size - 1) / decades:.1f} points/decade < 32")
    if window is not None:
        mask = (ts >= window[0]) & (ts <= window[1])
        ts, values = ts[mask], values[mask]
        if ts.size < 3:
            raise GridTooCoarse("window leaves fewer than 3 grid points")
    logt = np.log(ts)
    logv = np.log(values)
    slope = np.empty(ts.size)
    slope[1:-1] = (logv[2:] - logv[:-2]) / (logt[2:] - logt[:-2])
    slope[0] = (logv[1] - logv[0]) / (logt[1] - logt[0])
    slope[-1] = (logv[-1] - logv[-2]) / (logt[-1] - logt[-2])
    logderiv = slope / ts

    for i in range(ts.size):
        j_hi = np.searchsorted(ts, 2.0 * ts[i], side="right")
        for j in range(i + 1, j_hi):
            if logderiv[j] < delta * logderiv[i] - slack * abs(logderiv[i]):
                return False, (float(ts[i]), float(ts[j]))
    return True, None


def tau_lower_anti_fk(anti_fk, pi_star, eps, delta=1.0 / 6.0,
                      reversible=True, grid_per_decade=64,
                      source_flag=None):
    """Mixing-time lower bound from an anti-Faber-Krahn profile.

    The mass scale Gamma(t) solves t = integral_{pi_*}^{Gamma} dv/(v L(v));
    if Gamma is delta-regular on (0, T) then sup_x h_t(x,x) is at least
    1/(2 Gamma(2t/delta)) for t < delta*T/2, and the mixing time is at
    least any t in that window where the floor still exceeds 1 + eps.
    """
    if not reversible:
        raise NotReversible("the diagonal heat-kernel floor needs K = K*")
    scale = mass_scale(anti_fk, pi_star)
    T = scale.time_to_reach(1.0)
    if T <= 0:
        raise RegularityFailed("mass scale reaches full mass instantly")
    ts = np.geomspace(T * 1e-4, T, int(4 * grid_per_decade) + 1)
    gam = np.array([scale.value(t) for t in ts])
    ok, witness = delta_regularity(ts, gam, delta)
    if not ok:
        raise RegularityFailed(f"delta-regularity fails at t={witness[0]:.3g},"
                               f" s={witness[1]:.3g}")
    t_hi = delta * T / 2.0
    grid = np.geomspace(t_hi * 1e-6, t_hi * (1.0 - 1e-12), 4096)
    best = 0.0
    for t in grid:
        floor = 1.0 / (2.0 * scale.value(2.0 * t / delta))
        if floor - 1.0 > eps:
            best = t
    flags = [FLAG_REVERSIBLE_ONLY]
    if source_flag:
        flags.append(source_flag)
    return BoundReport(
        name="tau_inf_lower_anti_faber_krahn",
        value=float(best), epsilon=eps, validity="lower",
        inputs={"delta": delta, "pi_star": pi_star, "T": T},
        assumptions=tuple(flags),
        anchor="anti-faber-krahn-floor",
    )


def tau_lower_spectral_gap(lam1, eps, reversible=True):
    """Lower bounds log(1/eps)/lambda_1 on the uniform mixing time and
    1/lambda_1 on the total-variation time at 1/e (reversible chains).

    Returns (uniform report, l1 report)."""
    if not reversible:
        raise NotReversible("the eigenfunction floor needs K = K*")
    if lam1 <= 0:
        raise ValidationFailed(f"lam1={lam1!r} must be positive")
    value = max(0.0, math.log(1.0 / eps)) / lam1
    rep_inf = BoundReport(
        name="tau_inf_lower_spectral_gap",
        value=value, epsilon=eps, validity="lower",
        inputs={"lambda_1": lam1},
        assumptions=(FLAG_REVERSIBLE_ONLY,),
        anchor="gap-eigenfunction-floor",
    )
    rep_l1 = BoundReport(
        name="tau_1_lower_spectral_gap",
        value=1.0 / lam1, epsilon=math.exp(-1), validity="lower",
        inputs={"lambda_1": lam1},
        assumptions=(FLAG_REVERSIBLE_ONLY,),
        anchor="gap-l1-floor",
    )
    return rep_inf, rep_l1


def dsc_moderate_growth_lower(A, d, gamma):
    """Diameter-squared mixing floor gamma^2/(4^(2d+1) A^2) for group walks
    of (A, d)-moderate growth; hypothesis gamma >= A * 4^(d+1)."""
    flags = []
    if gamma < A * 4.0 ** (d + 1.0):
        flags.append(FLAG_HYPOTHESIS + ":gamma<A*4^(d+1)")
    value = gamma ** 2 / (4.0 ** (2.0 * d + 1.0) * A ** 2)
    return BoundReport(
        name="tau_inf_lower_moderate_growth",
        value=value, epsilon=math.exp(-1), validity="lower",
        inputs={"A": A, "d": d, "gamma": gamma},
        assumptions=tuple(flags),
        anchor="moderate-growth-diameter-floor",
    )
