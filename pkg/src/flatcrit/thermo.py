"""Induced partition sums, geometric pressure and equilibrium-state statistics.

The first-return scheme is full-branch, so depth-n cylinder sums factorize
from the one-level table.  Per-branch derivatives are represented by the
mean-value quantity |I|/|J| (an exact interior value of |Df^R| on each
branch); the two-sided cylinder widening is a single Koebe factor per
cylinder, which puts the bracket width at |t| log K_tau / depth plus
truncation.  Truncation beyond the enumerated return times is bounded by
empirical envelopes fitted to the observed branch counts and derivative
growth, inflated by a safety margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .maps import Chart, ChartPoint, FlatUnimodalMap, MapError
from .inducing import (
    Branch,
    InducingScheme,
    OutsideBranch,
    branch_fixed_point,
    first_return_trace,
)


class ThermoError(MapError):
    pass


class Divergent(ThermoError):
    pass


class NoSignChange(ThermoError):
    pass


class TailDominated(ThermoError):
    pass


# ---------------------------------------------------------------------------
# truncation envelopes


@dataclass
class TailModel:
    """Empirical bounds for branches beyond the enumeration cutoff.

    Branch counts are bounded by c_gamma * gamma^n (gamma from the observed
    growth, widened by 10% of its excess over 1).  log|Df^R| is enclosed
    between envelopes that are linear either in R or in log R, whichever
    fits the deep half better, shifted to bound every observed branch.
    """

    gamma: float
    log_c_gamma: float
    lo_kind: str  # "exp" or "power"
    lo_a: float
    lo_b: float
    hi_kind: str
    hi_a: float
    hi_b: float
    n_max: int

    def log_env_lo(self, n: np.ndarray) -> np.ndarray:
        x = n if self.lo_kind == "exp" else np.log(n)
        return self.lo_a + self.lo_b * x

    def log_env_hi(self, n: np.ndarray) -> np.ndarray:
        x = n if self.hi_kind == "exp" else np.log(n)
        return self.hi_a + self.hi_b * x


def fit_tail_model(scheme: InducingScheme) -> TailModel:
    if getattr(scheme, "_tail_model", None) is not None:
        return scheme._tail_model
    arr = scheme.arrays()
    R = arr["R"].astype(float)
    n_max = scheme.n_max
    counts = np.bincount(arr["R"], minlength=n_max + 1)[1:]
    ns = np.arange(1, n_max + 1)[counts > 0].astype(float)
    cs = counts[counts > 0].astype(float)
    slope = np.polyfit(ns, np.log(cs), 1)[0] if len(ns) > 1 else 0.0
    gamma_obs = math.exp(max(slope, 0.0))
    gamma = 1.0 + 1.1 * (gamma_obs - 1.0)
    log_c_gamma = math.log(1.1) + float(np.max(np.log(cs) - ns * math.log(gamma)))

    sel = R >= max(4.0, 0.5 * n_max)
    if sel.sum() < 8:
        sel = R >= np.median(R)

    def envelope(y: np.ndarray, side: str):
        best = None
        for kind, x_all in (("exp", R), ("power", np.log(R))):
            b, a = np.polyfit(x_all[sel], y[sel], 1)
            resid = y - (a + b * x_all)
            shift = resid.min() if side == "lo" else resid.max()
            score = float(np.var(resid[sel]))
            if best is None or score < best[0]:
                best = (score, kind, a + shift, b)
        return best[1], best[2], best[3]

    lo_kind, lo_a, lo_b = envelope(arr["logd_min"], "lo")
    hi_kind, hi_a, hi_b = envelope(arr["logd_max"], "hi")
    model = TailModel(gamma=gamma, log_c_gamma=log_c_gamma,
                      lo_kind=lo_kind, lo_a=lo_a, lo_b=lo_b,
                      hi_kind=hi_kind, hi_a=hi_a, hi_b=hi_b, n_max=n_max)
    scheme._tail_model = model
    return model


def truncation_bound(scheme: InducingScheme, t: float, p: float) -> float:
    """Upper bound for the level sum over branches with R > n_max."""
    model = fit_tail_model(scheme)
    n0 = scheme.n_max + 1
    log_gamma = math.log(model.gamma)
    # asymptotic per-step log-ratio of the bounding terms
    rate = log_gamma - p
    if t >= 0.0:
        if model.lo_kind == "exp":
            rate -= t * model.lo_b
    else:
        if model.hi_kind == "exp":
            rate -= t * model.hi_b
    if rate >= -1e-12:
        return math.inf
    poly_b = 0.0
    if t >= 0.0 and model.lo_kind == "power":
        poly_b = abs(t * model.lo_b)
    if t < 0.0 and model.hi_kind == "power":
        poly_b = abs(t * model.hi_b)
    block = 4096
    total = 0.0
    n = n0
    while True:
        ns = np.arange(n, n + block, dtype=float)
        env = model.log_env_lo(ns) if t >= 0.0 else model.log_env_hi(ns)
        logs = model.log_c_gamma + ns * log_gamma - p * ns - t * env
        chunk = float(np.exp(logsumexp(logs)))
        total += chunk
        r = math.exp(rate + poly_b / ns[-1])
        if r < 1.0 and chunk * r / (1.0 - r) < 1e-14 * max(total, 1e-300):
            break
        n += block
        if n > n0 + 3_000_000:
            total *= 2.0  # give up refining; double for safety
            break
    return total


# ---------------------------------------------------------------------------
# level sums and pressure brackets


def _branch_logd(scheme: InducingScheme, t: float, table: str) -> np.ndarray:
    arr = scheme.arrays()
    if table == "mvt":
        return arr["logd_mvt"]
    if table == "sup":
        return arr["logd_max"] if t >= 0.0 else arr["logd_min"]
    if table == "inf":
        return arr["logd_min"] if t >= 0.0 else arr["logd_max"]
    raise ValueError(table)


def level_sum(scheme: InducingScheme, t: float, p: float,
              table: str = "sup") -> tuple[float, float]:
    """One-level sum T(t,p) over enumerated branches plus a truncation bound.

    Per-branch |Df^R| representatives follow the requested table: "sup"
    (sampled extreme appropriate for the sign of t), "inf", or "mvt"
    (|I|/|J|).  Raises Divergent when the truncation bound is infinite.
    """
    arr = scheme.arrays()
    logd = _branch_logd(scheme, t, table)
    logs = -p * arr["R"].astype(float) - t * logd
    with np.errstate(over="ignore"):
        value = float(np.exp(logsumexp(logs)))
    trunc = truncation_bound(scheme, t, p)
    if math.isinf(trunc):
        raise Divergent(f"truncation series diverges at (t={t}, p={p})")
    return value, trunc


@dataclass
class PressureBracket:
    lo: float
    hi: float
    truncation_error: float
    distortion_width: float
    depth: int
    t: float
    p: float

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo


def pressure_bracket(scheme: InducingScheme, t: float, p: float,
                     depth: int = 64) -> PressureBracket:
    """Two-sided enclosure of the two-variable pressure at (t, p).

    The depth-n cylinder sum factorizes into the one-level mean-value table
    to the n-th power; the per-cylinder derivative spread contributes one
    composed-Koebe factor, so the width scales as |t| log K_tau / depth
    plus truncation terms.
    """
    if depth < 1:
        raise ThermoError("depth must be >= 1")
    value, trunc = level_sum(scheme, t, p, table="mvt")
    log_t = math.log(value)
    trunc_err = math.log1p(trunc / value)
    halfwidth = abs(t) * math.log(scheme.interval.k_tau) / depth
    return PressureBracket(
        lo=log_t - halfwidth,
        hi=log_t + trunc_err + halfwidth,
        truncation_error=trunc_err,
        distortion_width=2.0 * halfwidth,
        depth=depth, t=t, p=p,
    )


P_SEARCH_DEFAULT = (-1.0, math.log(4.0) + 1.0)


def solve_pressure(scheme: InducingScheme, t: float, depth: int = 64,
                   p_search: tuple[float, float] = P_SEARCH_DEFAULT) -> PressureBracket:
    """Bracket of the geometric pressure P(t): the root in p of the
    two-variable pressure, solved separately for the upper and lower bounds
    (both strictly decreasing in p)."""

    def bound(p: float, which: str) -> float:
        try:
            pb = pressure_bracket(scheme, t, p, depth)
        except Divergent:
            return math.inf
        return pb.hi if which == "hi" else pb.lo

    p_min, p_max = p_search
    roots = {}
    for which in ("hi", "lo"):
        f_hi = bound(p_max, which)
        if f_hi > 0.0:
            raise NoSignChange(
                f"pressure {which}-bound still {f_hi:.4g} at p={p_max}")
        f_lo = bound(p_min, which)
        if f_lo < 0.0:
            raise NoSignChange(
                f"pressure {which}-bound already {f_lo:.4g} at p={p_min}; "
                f"bound at p={p_max}: {f_hi:.4g}")
        lo, hi = p_min, p_max
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if bound(mid, which) > 0.0:
                lo = mid
            else:
                hi = mid
        roots[which] = 0.5 * (lo + hi)
    try:
        pb_ref = pressure_bracket(scheme, t, roots["hi"], depth)
        trunc_err, dist_w = pb_ref.truncation_error, pb_ref.distortion_width
    except Divergent:
        trunc_err, dist_w = math.nan, 2.0 * abs(t) * math.log(scheme.interval.k_tau) / depth
    return PressureBracket(
        lo=roots["lo"], hi=roots["hi"],
        truncation_error=trunc_err,
        distortion_width=dist_w,
        depth=depth, t=t, p=math.nan,
    )


# ---------------------------------------------------------------------------
# cylinders and Gibbs weights


def _pull_back_u(m: FlatUnimodalMap, iv, b: Branch, target_x: float,
                 u_lo: float, u_hi: float) -> float:
    """u in [u_lo, u_hi] within branch b with induced-map image target_x."""

    def val(u: float) -> float:
        _, landing, _ = first_return_trace(m, iv, b.endpoint(u, m.c))
        return m.to_plain(landing) - target_x

    glo, ghi = val(u_lo), val(u_hi)
    if glo == 0.0:
        return u_lo
    if ghi == 0.0:
        return u_hi
    if glo * ghi > 0.0:
        # target marginally outside the nudged image range: clamp
        return u_lo if abs(glo) < abs(ghi) else u_hi
    lo, hi = u_lo, u_hi
    for _ in range(52):
        mid = 0.5 * (lo + hi)
        if val(mid) * glo > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4e-16 * hi:
            break
    return 0.5 * (lo + hi)


def _cylinders(scheme: InducingScheme, depth: int, max_words: int):
    """Depth-n cylinders as (branch index word, u-interval in the top branch,
    total return time, log|Df^n| and visit count at the cylinder midpoint)."""
    cache = getattr(scheme, "_cylinder_cache", None)
    if cache is None:
        cache = scheme._cylinder_cache = {}
    if depth in cache:
        return cache[depth]
    m, iv = scheme.map, scheme.interval
    nb = len(scheme.branches)
    if nb ** depth > max_words:
        raise ThermoError(
            f"{nb}^{depth} cylinders exceed the word cap {max_words}; "
            "reduce depth or n_max")
    from .inducing import _interior_nudge

    def rec(d: int):
        if d == 1:
            out = []
            for i, b in enumerate(scheme.branches):
                nn = _interior_nudge(b.u_in, b.u_in - b.u_out)
                out.append(((i,), b.u_out + nn, b.u_in - nn))
            return out
        inner = rec(d - 1)
        out = []
        for i, b in enumerate(scheme.branches):
            nn = _interior_nudge(b.u_in, b.u_in - b.u_out)
            lo_u, hi_u = b.u_out + nn, b.u_in - nn
            for word, su_lo, su_hi in inner:
                sb = scheme.branches[word[0]]
                x_a = m.to_plain(sb.endpoint(su_lo, m.c))
                x_b = m.to_plain(sb.endpoint(su_hi, m.c))
                ua = _pull_back_u(m, iv, b, x_a, lo_u, hi_u)
                ub = _pull_back_u(m, iv, b, x_b, lo_u, hi_u)
                out.append(((i,) + word, min(ua, ub), max(ua, ub)))
        return out

    words = rec(depth)
    rows = []
    for word, u_lo, u_hi in words:
        b0 = scheme.branches[word[0]]
        pt = b0.endpoint(0.5 * (u_lo + u_hi), m.c)
        logd = 0.0
        r_total = 0
        matched = 0
        for j, idx in enumerate(word):
            r, pt, ld = first_return_trace(m, iv, pt, accumulate=True)
            logd += ld
            r_total += r
            ok = r == scheme.branches[idx].R
            if ok and j + 1 < len(word):
                ok = scheme.branches[word[j + 1]].contains(m, pt)
            if ok:
                matched += 1
        rows.append((word, u_lo, u_hi, r_total, logd, matched))
    cache[depth] = rows
    return rows


@dataclass
class GibbsCylinderMeasure:
    depth: int
    t: float
    p: float
    words: list
    weights: np.ndarray
    R: np.ndarray
    log_deriv: np.ndarray
    log_norm: float
    gibbs_ratio_lo: float   # observed spread of weight / formula, after
    gibbs_ratio_hi: float   # factoring out the pressure at (t, p)

    def marginal_on_first(self, n_branches: int) -> np.ndarray:
        w = np.zeros(n_branches)
        for word, wt in zip(self.words, self.weights):
            w[word[0]] += wt
        return w


def gibbs_cylinders(scheme: InducingScheme, t: float, p: float,
                    depth: int = 1, max_words: int = 250_000,
                    spread: bool = False) -> GibbsCylinderMeasure:
    """Normalized cylinder weights e^{-pR} |Df^n(mid)|^{-t} at depth n.

    With ``spread=True`` the observed Gibbs-constant spread is measured by
    refinement: depth-n weights are compared against the marginals of
    depth-(n+1) weights, the two-sided comparability the Gibbs property
    asserts.  Refinement costs a depth-(n+1) enumeration.
    """
    _check_finite(scheme, t, p)
    rows = _cylinders(scheme, depth, max_words)
    R = np.array([r[3] for r in rows], dtype=float)
    logd = np.array([r[4] for r in rows])
    logs = -p * R - t * logd
    log_norm = float(logsumexp(logs))
    weights = np.exp(logs - log_norm)
    ratio_lo = ratio_hi = math.nan
    if spread and len(scheme.branches) ** (depth + 1) <= max_words:
        ratio_lo, ratio_hi = gibbs_refinement_spread(scheme, t, p, depth,
                                                     max_words)
    return GibbsCylinderMeasure(
        depth=depth, t=t, p=p,
        words=[r[0] for r in rows], weights=weights, R=R, log_deriv=logd,
        log_norm=log_norm,
        gibbs_ratio_lo=ratio_lo, gibbs_ratio_hi=ratio_hi,
    )


def gibbs_refinement_spread(scheme: InducingScheme, t: float, p: float,
                            depth: int, max_words: int = 250_000):
    """(min, max) over depth-n words of (refined marginal weight)/(weight)."""
    rows_n = _cylinders(scheme, depth, max_words)
    rows_n1 = _cylinders(scheme, depth + 1, max_words)
    logs_n = np.array([-p * r[3] - t * r[4] for r in rows_n])
    logs_n -= logsumexp(logs_n)
    logs_n1 = np.array([-p * r[3] - t * r[4] for r in rows_n1])
    logs_n1 -= logsumexp(logs_n1)
    marg: dict[tuple, list] = {}
    for r, lw in zip(rows_n1, logs_n1):
        marg.setdefault(r[0][:depth], []).append(lw)
    ratios = []
    for r, lw in zip(rows_n, logs_n):
        refs = marg.get(r[0])
        if refs:
            ratios.append(logsumexp(np.array(refs)) - lw)
    ratios = np.array(ratios)
    return float(np.exp(ratios.min())), float(np.exp(ratios.max()))


def _check_finite(scheme: InducingScheme, t: float, p: float) -> None:
    level_sum(scheme, t, p)  # raises Divergent when the tail blows up


# ---------------------------------------------------------------------------
# lift quadrature: spreading induced mass along excursions


Z_CUT = 41.0  # orbit samples below e^-41 are indistinguishable from 0.0


def _node_summary(m: FlatUnimodalMap, iv, pt: ChartPoint, r_expected: int):
    """Samples pt, f(pt), ..., f^{R-1}(pt) along the excursion, split into
    explicitly stored values and a count of effectively-zero ones (deeper
    than e^-41 below 0).  Order-free: meant for sums of observables."""
    from .inducing import _collapse_near0

    explicit = [m.to_plain(pt)]
    zeros = 0
    q = pt
    emitted = 1
    while emitted < r_expected:
        q = m.eval(q)
        if q.chart is Chart.NEAR_0:
            s = q.value
            k_col, _ = _collapse_near0(m, s)
            batch = min(1 + k_col, r_expected - emitted)
            ss = s - m.log_df0 * np.arange(batch, dtype=float)
            deep = ss > Z_CUT
            zeros += int(np.count_nonzero(deep))
            if (~deep).any():
                explicit.extend(np.exp(-ss[~deep]).tolist())
            emitted += batch
            q = ChartPoint.near_0(s - m.log_df0 * (batch - 1))
            continue
        explicit.append(m.to_plain(q))
        emitted += 1
    return np.array(explicit), zeros


def branch_node_summaries(scheme: InducingScheme, nodes: int = 5):
    """Per-branch quadrature nodes (uniform in depth, Lebesgue weights) with
    their excursion sample summaries; cached on the scheme."""
    cache = getattr(scheme, "_node_cache", None)
    if cache is None:
        cache = scheme._node_cache = {}
    if nodes in cache:
        return cache[nodes]
    m, iv = scheme.map, scheme.interval
    from .inducing import _interior_nudge
    out = []
    for b in scheme.branches:
        nn = _interior_nudge(b.u_in, b.u_in - b.u_out)
        us = np.linspace(b.u_out + nn, b.u_in - nn, nodes)
        wq = np.exp(-us)
        wq /= wq.sum()
        rows = []
        for u, w in zip(us, wq):
            expl, zeros = _node_summary(m, iv, b.endpoint(u, m.c), b.R)
            rows.append((w, expl, zeros))
        out.append(rows)
    cache[nodes] = out
    return out


def lift_expectation(scheme: InducingScheme, branch_weights: np.ndarray,
                     phi, nodes: int = 5) -> float:
    """integral of phi against the spread measure sum_J w_J sum_{k<R} phi(f^k .),
    normalized by sum_J w_J R_J (the projection of an induced measure)."""
    summaries = branch_node_summaries(scheme, nodes)
    arr = scheme.arrays()
    phi0 = float(phi(np.array([0.0]))[0])
    num = 0.0
    for w_b, rows in zip(branch_weights, summaries):
        if w_b == 0.0:
            continue
        acc = 0.0
        for wq, expl, zeros in rows:
            acc += wq * (float(np.sum(phi(expl))) + zeros * phi0)
        num += w_b * acc
    den = float(np.sum(branch_weights * arr["R"]))
    return num / den


# ---------------------------------------------------------------------------
# equilibrium reports


@dataclass
class EquilibriumReport:
    t: float
    pressure: PressureBracket
    chi: float
    entropy: float
    identity_defect: float
    mean_return: float
    kac_defect: float
    observable_expectations: dict
    gibbs_ratio: tuple[float, float]
    depth: int


def equilibrium_report(scheme: InducingScheme, t: float, depth: int = 2,
                       observables: dict | None = None,
                       pressure_depth: int = 64, nodes: int = 5,
                       max_words: int = 250_000,
                       spread: bool = False) -> EquilibriumReport:
    """Equilibrium statistics at parameter t from depth-n Gibbs weights.

    chi is the induced Lyapunov integral over the mean return time;
    entropy is estimated independently via the Shannon sum of the cylinder
    weights, so the identity h = P + t chi is a genuine residual check.
    """
    pb = solve_pressure(scheme, t, depth=pressure_depth)
    p_mid = pb.mid
    gm = gibbs_cylinders(scheme, t, p_mid, depth=depth, max_words=max_words,
                         spread=spread)
    w = gm.weights
    mean_r = float(np.sum(w * gm.R))
    mean_logd = float(np.sum(w * gm.log_deriv))
    shannon = -float(np.sum(w * np.log(np.maximum(w, 1e-300))))
    if depth >= 2:
        # difference quotients between consecutive depths cancel the O(1)
        # boundary term of cylinder sums
        gm_prev = gibbs_cylinders(scheme, t, p_mid, depth=depth - 1,
                                  max_words=max_words)
        wp = gm_prev.weights
        r_prev = float(np.sum(wp * gm_prev.R))
        logd_prev = float(np.sum(wp * gm_prev.log_deriv))
        shannon_prev = -float(np.sum(wp * np.log(np.maximum(wp, 1e-300))))
        mean_r1 = mean_r - r_prev
        chi = (mean_logd - logd_prev) / mean_r1
        entropy = (shannon - shannon_prev) / mean_r1
    else:
        mean_r1 = mean_r / depth
        chi = mean_logd / mean_r
        entropy = shannon / depth / mean_r1
    identity_defect = abs(entropy - (p_mid + t * chi))
    # Kac honesty check: each excursion of a cylinder midpoint must visit I
    # exactly once; truncated mass beyond n_max is added as a defect.
    rows = _cylinders(scheme, depth, max_words)
    visits = np.array([r[5] for r in rows], dtype=float)
    value, trunc = level_sum(scheme, t, p_mid, table="mvt")
    tail_frac = trunc / (value + trunc)
    kac_defect = abs(float(np.sum(w * visits)) / depth - 1.0) + tail_frac
    # tail contribution to the mean return time
    tail_r = _tail_mean_return_bound(scheme, t, p_mid)
    if tail_r > 0.1 * mean_r1:
        raise TailDominated(
            f"truncated branches contribute {tail_r:.3g} to the mean return "
            f"time {mean_r1:.3g}")
    marg = gm.marginal_on_first(len(scheme.branches))
    expectations = {}
    if observables:
        for name, phi in observables.items():
            expectations[name] = lift_expectation(scheme, marg, phi, nodes=nodes)
    return EquilibriumReport(
        t=t, pressure=pb, chi=chi, entropy=entropy,
        identity_defect=identity_defect, mean_return=mean_r1,
        kac_defect=kac_defect, observable_expectations=expectations,
        gibbs_ratio=(gm.gibbs_ratio_lo, gm.gibbs_ratio_hi), depth=depth,
    )


def _tail_mean_return_bound(scheme: InducingScheme, t: float, p: float) -> float:
    """Bound on the R-weighted Gibbs mass beyond n_max (unnormalized)."""
    model = fit_tail_model(scheme)
    log_gamma = math.log(model.gamma)
    ns = np.arange(scheme.n_max + 1, scheme.n_max + 200_001, dtype=float)
    env = model.log_env_lo(ns) if t >= 0 else model.log_env_hi(ns)
    logs = np.log(ns) + model.log_c_gamma + ns * log_gamma - p * ns - t * env
    top = logs.max()
    if top > 100.0:
        return math.inf
    return float(np.exp(logsumexp(logs)))


# ---------------------------------------------------------------------------
# freezing scan


@dataclass
class FreezeRow:
    t: float
    status: str            # "bracketed" | "frozen" | "inconclusive"
    p_lo: float
    p_hi: float
    chi: float
    entropy: float


@dataclass
class FreezeReport:
    rows: list[FreezeRow]
    chi_inf_trend: list[tuple[int, float]]   # (n_cutoff, min multiplier)
    chi_sup_estimate: float
    chi_inf_estimate: float
    t_plus_estimate: float
    acim_log_df_integral: float
    acim_finite: bool


def branch_multipliers(scheme: InducingScheme) -> np.ndarray:
    """(1/R) log|Df^R| at the periodic point of every branch; cached."""
    cached = getattr(scheme, "_branch_multipliers", None)
    if cached is not None:
        return cached
    vals = np.empty(len(scheme.branches))
    for i, b in enumerate(scheme.branches):
        _, lam = branch_fixed_point(scheme, b)
        vals[i] = lam
    scheme._branch_multipliers = vals
    return vals


def acim_log_df_integral(m: FlatUnimodalMap) -> float:
    """integral of log|Df| over [0,1] w.r.t. Lebesgue; finite iff the
    absolutely continuous invariant measure is finite.  The neighborhood of
    c is integrated in log coordinates."""
    from scipy.integrate import quad

    s0 = m.s0 if m.s0 > 0.0 else 1e-3
    u_band = -math.log(s0)
    total = 0.0
    for a, b in ((1e-12, m.c - s0), (m.c + s0, 1.0 - 1e-12)):
        val, _ = quad(lambda x: m.log_derivative(ChartPoint.plain(x)), a, b,
                      limit=200)
        total += val

    def near_c(u: float) -> float:
        return math.exp(-u) * (-m.w_of_u(u) + math.log(m.dw_du(u)) + u)

    for _ in range(1):
        val, _ = quad(near_c, u_band, math.inf, limit=400)
        total += 2.0 * val
    return total


def freeze_scan(scheme: InducingScheme, t_grid, pressure_depth: int = 64,
                trend_cutoffs=None) -> FreezeReport:
    """P(t) brackets over the grid, branch-multiplier extremes and trend,
    and the acim-finiteness diagnostic."""
    t_grid = list(t_grid)
    mult = branch_multipliers(scheme)
    arr = scheme.arrays()
    R = arr["R"]
    if trend_cutoffs is None:
        trend_cutoffs = []
        c = 100
        while c < scheme.n_max:
            trend_cutoffs.append(c)
            c *= 10
        trend_cutoffs.append(scheme.n_max)
    trend = []
    for cut in trend_cutoffs:
        sel = R <= cut
        if sel.any():
            trend.append((cut, float(mult[sel].min())))
    chi_inf_est = float(mult.min())
    chi_sup_est = float(mult.max())
    rows = []
    for t in t_grid:
        try:
            pb = solve_pressure(scheme, t, depth=pressure_depth)
        except NoSignChange:
            rows.append(FreezeRow(t=t, status="frozen", p_lo=-math.inf,
                                  p_hi=0.0, chi=math.nan, entropy=math.nan))
            continue
        except Divergent:
            rows.append(FreezeRow(t=t, status="inconclusive", p_lo=math.nan,
                                  p_hi=math.nan, chi=math.nan, entropy=math.nan))
            continue
        p_mid = pb.mid
        gm = gibbs_cylinders(scheme, t, p_mid, depth=1)
        mean_r = float(np.sum(gm.weights * gm.R))
        chi = float(np.sum(gm.weights * gm.log_deriv)) / mean_r
        status = "bracketed" if pb.lo * pb.hi > 0 or pb.lo > 0 else (
            "inconclusive" if pb.lo <= 0.0 <= pb.hi else "bracketed")
        rows.append(FreezeRow(t=t, status=status, p_lo=pb.lo, p_hi=pb.hi,
                              chi=chi, entropy=p_mid + t * chi))
    t_plus = math.nan
    for row in rows:
        if row.status == "bracketed" and row.p_lo > 0.0:
            t_plus = row.t
    integral = acim_log_df_integral(scheme.map)
    return FreezeReport(
        rows=rows, chi_inf_trend=trend, chi_sup_estimate=chi_sup_est,
        chi_inf_estimate=chi_inf_est, t_plus_estimate=t_plus,
        acim_log_df_integral=integral, acim_finite=math.isfinite(integral),
    )
