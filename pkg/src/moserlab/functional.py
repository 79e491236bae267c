"""Exponential-growth functional on normalized radial profiles.

Two independent evaluators are provided for

    J(u) = integral_B (exp(4 pi u^2) - 1) dx,   N = 2,

both exact in the plateau tail.  `j_direct` integrates the radial integrand
2 pi (exp(4 pi u(t)^2) - 1) exp(-2t) segment by segment; `j_representation`
goes through the ramp-pairing coefficient c(t) and integrates
2 pi exp(-2t (1 - c(t)^2)) minus the constant part.  The two expressions are
algebraically equal but share no integrand code, so their agreement is a
genuine cross-check of the pairing identity and of the quadrature.

Concentration experiments: `moser_limit_experiment` tabulates J along the
concentrating ramp family (the limit value is 2 pi, approached from above
like 2 pi (1 + 1/L)), and `weak_discontinuity_demo` builds translated
concentrating sequences on the disc, confirming that weak-convergence proxies
decay while J stays bounded away from J(0) = 0 exactly when the gradient
budget is critical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy import integrate

from . import disc
from .radial import (
    RadialProfile,
    _pairing_closed,
    critical_exponent,
    gauge_apply,
    grad_norm,
    moser_annular,
    scale,
)

__all__ = [
    "QuadratureSpec",
    "FunctionalReport",
    "OverflowGuardError",
    "j_direct",
    "j_representation",
    "evaluate_functional",
    "MoserLimitRow",
    "moser_limit_experiment",
    "WeakDiscontinuityReport",
    "weak_discontinuity_demo",
    "dilation_concentration_demo",
]

ALPHA_2 = critical_exponent(2)  # 4*pi


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    tail_cutoff: float | None = None  # t beyond which the analytic tail is used
    exp_cap: float = 700.0  # natural-log overflow guard

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.max_subdivisions < 10:
            raise ValueError("quadrature tolerances must be positive")


class OverflowGuardError(ArithmeticError):
    """Raised when exp(4 pi u^2 - 2t) would overflow; identifies the bad interval."""

    def __init__(self, t_lo: float, t_hi: float, exponent: float):
        self.t_lo, self.t_hi, self.exponent = t_lo, t_hi, exponent
        super().__init__(
            f"exponent {exponent:.1f} exceeds the cap on t in "
            f"[{t_lo:.6g}, {t_hi:.6g}]; the profile is outside the "
            "subcritical regime this evaluator supports"
        )


def _exponent_max(u: RadialProfile):
    """Max of 4 pi u(t)^2 - 2t per segment (quadratic in t) and on the plateau."""
    nodes, vals = u.nodes, u.values
    worst = (-math.inf, 0.0, 0.0)
    for i in range(len(nodes) - 1):
        t0, t1 = nodes[i], nodes[i + 1]
        b = (vals[i + 1] - vals[i]) / (t1 - t0)
        a = vals[i] - b * t0
        cands = [t0, t1]
        if b != 0.0:
            tc = (1.0 / (2.0 * ALPHA_2 * b) - a) / b
            if t0 < tc < t1:
                cands.append(tc)
        for t in cands:
            g = ALPHA_2 * (a + b * t) ** 2 - 2.0 * t
            if g > worst[0]:
                worst = (g, t0, t1)
    T = nodes[-1]
    g_plateau = ALPHA_2 * vals[-1] ** 2 - 2.0 * T
    if g_plateau > worst[0]:
        worst = (g_plateau, T, math.inf)
    return worst


def _guard(u: RadialProfile, spec: QuadratureSpec) -> None:
    g, t_lo, t_hi = _exponent_max(u)
    if g > spec.exp_cap:
        raise OverflowGuardError(t_lo, t_hi, g)


def _tail_start(u: RadialProfile, spec: QuadratureSpec) -> float:
    T = float(u.nodes[-1])
    if spec.tail_cutoff is None:
        return T
    if spec.tail_cutoff < T:
        raise ValueError("tail cutoff must not precede the last grid node")
    return float(spec.tail_cutoff)


def _const_piece(c: float, a: float, b: float) -> float:
    # integral_a^b (exp(4 pi c^2) - 1) exp(-2t) dt, closed form
    return (math.expm1(ALPHA_2 * c * c)) * 0.5 * (math.exp(-2.0 * a) - math.exp(-2.0 * b))


def j_direct(u: RadialProfile, spec: QuadratureSpec | None = None) -> float:
    """Adaptive segment quadrature of 2 pi (e^{4 pi u^2} - 1) e^{-2t} plus exact tail."""
    spec = spec or QuadratureSpec()
    if u.n != 2:
        raise ValueError("the functional is evaluated in dimension 2 only")
    _guard(u, spec)
    nodes, vals = u.nodes, u.values
    total = 0.0
    for i in range(len(nodes) - 1):
        t0, t1 = float(nodes[i]), float(nodes[i + 1])
        b = (vals[i + 1] - vals[i]) / (t1 - t0)
        a = vals[i] - b * t0

        def f(t, a=a, b=b):
            w = a + b * t
            return math.exp(ALPHA_2 * w * w - 2.0 * t) - math.exp(-2.0 * t)

        val, _err = integrate.quad(
            f, t0, t1, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
        )
        total += val
    T = _tail_start(u, spec)
    c = float(vals[-1])
    total += _const_piece(c, float(nodes[-1]), T)  # constant stretch before the cutoff
    total += _const_piece(c, T, math.inf)
    return max(0.0, 2.0 * math.pi * total)


def j_representation(u: RadialProfile, spec: QuadratureSpec | None = None) -> float:
    """Evaluate J through the pairing coefficient c(t); independent of j_direct.

    Uses 2 pi ( integral_0^inf exp(-2t (1 - c(t)^2)) dt - 1/2 ) with
    c(t) the closed-form ramp pairing of the profile.  The pointwise identity
    behind it holds without a normalization hypothesis, so no unit-norm
    requirement is imposed here; callers who care record the flag in
    FunctionalReport.
    """
    spec = spec or QuadratureSpec()
    if u.n != 2:
        raise ValueError("the functional is evaluated in dimension 2 only")
    _guard(u, spec)
    nodes = u.nodes
    total = 0.0
    for i in range(len(nodes) - 1):
        t0, t1 = float(nodes[i]), float(nodes[i + 1])

        def f(t):
            if t <= 0.0:
                return 1.0
            cpair = _pairing_closed(u, t)
            return math.exp(-2.0 * t * (1.0 - cpair * cpair))

        val, _err = integrate.quad(
            f, t0, t1, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
        )
        total += val
    T_last = float(nodes[-1])
    c = float(u.values[-1])
    # on the plateau the exponent is 4 pi c^2 - 2t, integrable in closed form
    total += 0.5 * math.exp(ALPHA_2 * c * c) * math.exp(-2.0 * T_last)
    return max(0.0, 2.0 * math.pi * (total - 0.5))


@dataclass(frozen=True)
class FunctionalReport:
    j_direct: float
    j_repr: float
    alpha: float
    normalized: bool
    rel_gap: float

    def __post_init__(self):
        if self.j_direct < 0 or self.j_repr < 0:
            raise ValueError("functional values must be nonnegative")


def evaluate_functional(
    u: RadialProfile, spec: QuadratureSpec | None = None, cross_tol: float = 1e-6
) -> FunctionalReport:
    """Run both evaluators and enforce their agreement to cross_tol (relative)."""
    jd = j_direct(u, spec)
    jr = j_representation(u, spec)
    ref = max(jd, jr, 1e-12)
    gap = abs(jd - jr) / ref
    if gap > cross_tol:
        raise ArithmeticError(
            f"functional evaluators disagree: direct={jd!r} repr={jr!r}"
        )
    return FunctionalReport(
        j_direct=jd,
        j_repr=jr,
        alpha=ALPHA_2,
        normalized=bool(grad_norm(u, 2) <= 1.0 + 1e-9),
        rel_gap=gap,
    )


@dataclass(frozen=True)
class MoserLimitRow:
    L: float
    s: float
    j_direct: float
    j_repr: float
    plateau: float
    ramp: float


def moser_limit_experiment(
    L_list, spec: QuadratureSpec | None = None
) -> list[MoserLimitRow]:
    """Tabulate J along the concentrating ramp family m_{e^-L}.

    The plateau region contributes pi (1 - e^{-2L}) in closed form; the ramp
    carries the rest.  J(0) = 0 while the values here stay above pi for
    L >= 1, which is the whole weak-discontinuity mechanism in one table.
    """
    from .radial import moser_from_exponent

    L_arr = [float(L) for L in L_list]
    if any(L <= 0 for L in L_arr) or any(b <= a for a, b in zip(L_arr, L_arr[1:])):
        raise ValueError("exponents must be positive and increasing")
    rows = []
    for L in L_arr:
        u = moser_from_exponent(L)
        rep = evaluate_functional(u, spec)
        plateau = math.pi * (-math.expm1(-2.0 * L))
        rows.append(
            MoserLimitRow(
                L=L,
                s=math.exp(-L),
                j_direct=rep.j_direct,
                j_repr=rep.j_repr,
                plateau=plateau,
                ramp=rep.j_direct - plateau,
            )
        )
    return rows


# -- disc-level concentration demos -----------------------------------------

@dataclass(frozen=True)
class WeakDiscontinuityReport:
    rows: list
    classification: str
    max_discrete_grad_norm: float
    notes: dict = field(default_factory=dict)


def _pairing_table(members, probes):
    table = []
    for u in members:
        table.append(max(abs(disc.grad_inner(u, phi)) for phi in probes))
    return table


def _classify(pairings, j_values, decay_factor=0.7, j_floor=0.1) -> str:
    # decay is judged against the peak pairing: for slowly spreading ramps the
    # probe overlap saturates after a few members before the decay law sets in
    peak = max(pairings)
    tail_monotone = all(b < a for a, b in zip(pairings[-3:], pairings[-2:]))
    strong_decay = pairings[-1] <= 0.05 * peak
    decayed = strong_decay or (
        pairings[-1] <= max(decay_factor * peak, 1e-12) and tail_monotone
    )
    if not decayed:
        return "non-concentrating"
    if j_values[-1] >= j_floor:
        return "moser-concentrating"
    return "subcritical-vanishing"


def weak_discontinuity_demo(
    s_list,
    centers,
    grid: "disc.PolarGrid | None" = None,
    gradient_budget: float = 1.0,
    probe_count: int = 6,
    spec: QuadratureSpec | None = None,
) -> WeakDiscontinuityReport:
    """Translated concentrating sequence: weak-limit proxies vs. J values.

    Members are u_k = (translate by center_k of the subordinated ramp profile
    with exponent L_k = log(1/s_k)), scaled by `gradient_budget`, sampled on
    a polar grid.  The report tabulates, per member, the maximal discrete
    pairing against a fixed probe set and the exact J value carried by the
    radial profile (J is translation invariant for supports inside the disc).
    """
    s_arr = [float(s) for s in s_list]
    zetas = [complex(z) for z in centers]
    if len(s_arr) != len(zetas):
        raise ValueError("need one center per concentration parameter")
    if any(not (0.0 < s < 1.0) for s in s_arr):
        raise ValueError("concentration parameters must lie in (0,1)")
    for z in zetas:
        if abs(z) > 0.5:
            raise ValueError(
                f"center {z} too close to the boundary: translates must stay "
                "inside the disc (|center| <= 1/2)"
            )
    L_arr = [-math.log(s) for s in s_arr]
    if grid is None:
        grid = disc.PolarGrid(
            n_r=512, n_theta=256, spacing="geometric",
            s_max=max(L_arr) + max(-math.log1p(-abs(z)) for z in zetas) + 2.0,
        )
    probes = disc.make_probes(grid, probe_count)

    members, j_values, rows = [], [], []
    max_energy = 0.0
    for s, L, z in zip(s_arr, L_arr, zetas):
        inner = -math.log1p(-abs(z)) if abs(z) > 0 else 0.0
        prof = scale(moser_annular(L, inner), gradient_budget)
        member = disc.inflate(prof, disc.DislocationParam(1, z), grid)
        members.append(member)
        j_values.append(j_direct(prof, spec))
        max_energy = max(max_energy, disc.energy(member))
    pairings = _pairing_table(members, probes)
    for s, z, p, jv in zip(s_arr, zetas, pairings, j_values):
        rows.append({"s": s, "center": [z.real, z.imag], "pairing": p, "J": jv})
    return WeakDiscontinuityReport(
        rows=rows,
        classification=_classify(pairings, j_values),
        max_discrete_grad_norm=math.sqrt(max_energy),
        notes={"gradient_budget": gradient_budget},
    )


def dilation_concentration_demo(
    base: RadialProfile,
    j_list,
    grid: "disc.PolarGrid | None" = None,
    probe_count: int = 6,
    spec: QuadratureSpec | None = None,
) -> WeakDiscontinuityReport:
    """Radial concentration by integer dilations of a fixed profile.

    For a base profile with gradient norm strictly below 1 the J values decay
    to zero along the schedule; at the critical budget they stay bounded away
    from zero.  Members are exact radial dilations, so J is evaluated on the
    dilated profiles directly; pairings use the sampled disc functions.
    """
    js = [int(j) for j in j_list]
    if any(j < 1 for j in js) or any(b < a for a, b in zip(js, js[1:])):
        raise ValueError("dilation schedule must be nondecreasing positive integers")
    if grid is None:
        grid = disc.PolarGrid(
            n_r=512, n_theta=128, spacing="geometric",
            s_max=float(base.nodes[-1]) * max(js) + 2.0,
        )
    probes = disc.make_probes(grid, probe_count)
    members, j_values, rows = [], [], []
    max_energy = 0.0
    for j in js:
        prof = gauge_apply(base, 1.0 / j)
        member = disc.inflate(base, disc.DislocationParam(j, 0.0), grid)
        members.append(member)
        j_values.append(j_direct(prof, spec))
        max_energy = max(max_energy, disc.energy(member))
    pairings = _pairing_table(members, probes)
    for j, p, jv in zip(js, pairings, j_values):
        rows.append({"j": j, "pairing": p, "J": jv})
    return WeakDiscontinuityReport(
        rows=rows,
        classification=_classify(pairings, j_values),
        max_discrete_grad_norm=math.sqrt(max_energy),
        notes={"base_grad_norm": grad_norm(base, 2)},
    )
