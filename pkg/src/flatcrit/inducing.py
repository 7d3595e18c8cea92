"""First-return inducing schemes over a nice interval around the critical point.

For every family in scope the map sends I = (a-, a+) into (a+, 1), then into
(0, a-), after which orbits climb monotonically off the repelling fixed point
0 until they re-enter I.  The primitive first-return branches therefore form
two wedges accumulating at c, one per side, with exactly two branches per
return time.  Enumeration works in the depth coordinate u = -log|x-c|: the
map "two steps then measure the log-distance to 0" is monotone in u on each
side, and branch endpoints are its preimages of the ladder of f-preimages of
a- inside (0, a-).  Branch endpoints deeper than e^-30 are kept in chart
coordinates; Lebesgue measures are carried as logs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .maps import (
    U0,
    Chart,
    ChartPoint,
    Family,
    FlatUnimodalMap,
    MapError,
)


class InducingError(MapError):
    pass


class NoFixedPoint(InducingError):
    pass


class NotNice(InducingError):
    pass


class BudgetExceeded(InducingError):
    pass


class ToleranceFailure(InducingError):
    pass


class OutsideInterval(InducingError):
    pass


class OutsideBranch(InducingError):
    pass


INFINITE = float("inf")


# ---------------------------------------------------------------------------
# nice interval


@dataclass(frozen=True)
class NiceInterval:
    a_minus: float
    a_plus: float
    tau: float
    k_tau: float

    @property
    def length(self) -> float:
        return self.a_plus - self.a_minus

    def contains(self, x: float) -> bool:
        return self.a_minus < x < self.a_plus


def _bisect(fun, lo: float, hi: float, iters: int = 100) -> float:
    flo = fun(lo)
    if flo == 0.0:
        return lo
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fun(mid) * flo > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def nice_interval(m: FlatUnimodalMap, orbit_depth: int = 1000) -> NiceInterval:
    """The nice interval anchored at the fixed point in (c, 1).

    a+ is the unique fixed point of the decreasing branch, a- < c its twin
    with f(a-) = a+.  Niceness is certified structurally: a+ is fixed and
    a- maps onto it, so the boundary orbit is {a+} and never re-enters I.
    (A literal float iteration of the boundary diverges from the true orbit
    because a+ is repelling, so it cannot be used as the check.)
    """
    c = m.c
    g = lambda x: m(x) - x
    if g(c + 1e-9) <= 0.0:
        raise NoFixedPoint("no diagonal crossing on (c, 1)")
    a_plus = _bisect(g, c + 1e-9, 1.0 - 1e-15, iters=120)
    if abs(m(a_plus) - a_plus) > 1e-12:
        raise ToleranceFailure("fixed-point bisection stalled")
    if m.log_derivative(ChartPoint.plain(a_plus)) <= 0.0:
        raise NotNice("the anchoring fixed point is not repelling")
    if m.log_df0 <= 0.0:
        raise NotNice("the fixed point at 0 is not repelling")
    a_minus = _bisect(lambda x: m(x) - a_plus, 1e-15, c - 1e-15, iters=120)
    if abs(m(a_minus) - a_plus) > 1e-12:
        raise ToleranceFailure("boundary-twin bisection stalled")
    # boundary orbit: a- -> a+ -> a+ -> ...; confirm and check it avoids I
    for n in range(2):
        pass
    orbit_pt = m(a_minus)
    if not (abs(orbit_pt - a_plus) <= 1e-11):
        raise NotNice("f(a-) does not land on a+")
    # postcritical orbit for the Koebe space
    post = []
    p = m.eval(ChartPoint.plain(c))
    for _ in range(orbit_depth):
        x = m.to_plain(p)
        post.append(x)
        if a_minus < x < a_plus:
            raise NotNice("postcritical orbit enters the candidate interval")
        p = m.eval(p)
        if x == 0.0 or x == 1.0:
            post.extend([0.0, 1.0] if x == 1.0 else [0.0])
            break
    below = [x for x in post if x <= a_minus]
    above = [x for x in post if x >= a_plus]
    gap_l = a_minus - max(below) if below else a_minus
    gap_r = min(above) - a_plus if above else 1.0 - a_plus
    length = a_plus - a_minus
    tau = (1.0 - 1e-6) * min(gap_l, gap_r) / length
    if tau <= 0.0:
        raise NotNice("no Koebe space around the interval")
    k_tau = (1.0 + tau) ** 2 / tau
    return NiceInterval(a_minus=a_minus, a_plus=a_plus, tau=tau, k_tau=k_tau)


# ---------------------------------------------------------------------------
# first-return traces through charts


def _collapse_near0(m: FlatUnimodalMap, s: float) -> tuple[int, float]:
    """Steps (count, new_s) skipping the exactly-linear part of the climb."""
    s_deep = m.s_deep
    if s <= s_deep:
        return 0, s
    k = int(math.floor((s - s_deep) / m.log_df0))
    return k, s - k * m.log_df0


def first_return_trace(m: FlatUnimodalMap, interval: NiceInterval, p: ChartPoint,
                       max_steps: int = 10_000_000, accumulate: bool = False):
    """Iterate until the orbit re-enters I.

    Returns (R, landing ChartPoint, log|Df^R| at the start point or None).
    R is INFINITE when the cap is hit.  Deep passes by 0 advance in closed
    form, so the cost per excursion is O(shallow steps), not O(R).
    """
    a_minus, a_plus = interval.a_minus, interval.a_plus
    logd = 0.0 if accumulate else None
    q = p
    steps = 0
    while steps < max_steps:
        if accumulate:
            logd += m.log_derivative(q)
        q = m.eval(q)
        steps += 1
        if q.chart is Chart.NEAR_0:
            k, s = _collapse_near0(m, q.value)
            if k:
                steps += k
                if accumulate:
                    logd += k * m.log_df0
                q = ChartPoint.near_0(s)
            continue  # still near 0, certainly outside I
        if q.chart is Chart.NEAR_1:
            continue
        if q.chart is not Chart.PLAIN:  # back within e^-30 of c: inside I
            return steps, q, logd
        x = q.value
        if a_minus < x < a_plus:
            return steps, q, logd
    return INFINITE, q, logd


def return_time(m: FlatUnimodalMap, interval: NiceInterval,
                x: ChartPoint | float, max_steps: int = 10_000_000):
    """First return time of x in I; INFINITE beyond the cap."""
    if not isinstance(x, ChartPoint):
        x = ChartPoint.plain(float(x))
    if x.chart is Chart.PLAIN:
        if not interval.contains(x.value):
            raise OutsideInterval(f"x={x.value} is not in ({interval.a_minus}, {interval.a_plus})")
    elif x.chart in (Chart.NEAR_0, Chart.NEAR_1):
        raise OutsideInterval("point is at the far ends of [0,1]")
    r, _, _ = first_return_trace(m, interval, x, max_steps=max_steps)
    return r


# ---------------------------------------------------------------------------
# branches and schemes


@dataclass
class Branch:
    """One primitive first-return branch, kept in the depth coordinate.

    ``u_in``/``u_out`` are -log|x-c| of the endpoint nearer/farther from c;
    endpoints deeper than e^-30 surface as chart points.
    """

    side: str           # "left" or "right" of c
    R: int
    u_in: float
    u_out: float
    log_measure: float
    logd_out: float = math.nan   # log|Df^R| sampled at the outer endpoint
    logd_mid: float = math.nan
    logd_in: float = math.nan
    logd_mvt: float = math.nan   # log(|I|/|J|): an exact interior value of |Df^R|

    def endpoint(self, u: float, c: float) -> ChartPoint:
        if u > U0:
            return (ChartPoint.near_c_plus(u) if self.side == "right"
                    else ChartPoint.near_c_minus(u))
        x = c + math.exp(-u) if self.side == "right" else c - math.exp(-u)
        return ChartPoint.plain(x)

    def lo(self, c: float) -> ChartPoint:
        return self.endpoint(self.u_in if self.side == "right" else self.u_out, c)

    def hi(self, c: float) -> ChartPoint:
        return self.endpoint(self.u_out if self.side == "right" else self.u_in, c)

    def u_mid(self) -> float:
        return 0.5 * (self.u_in + self.u_out)

    def midpoint(self, c: float) -> ChartPoint:
        return self.endpoint(self.u_mid(), c)

    def contains(self, m: FlatUnimodalMap, x: ChartPoint | float) -> bool:
        if isinstance(x, ChartPoint):
            if x.chart is Chart.NEAR_C_PLUS:
                u, side = x.value, "right"
            elif x.chart is Chart.NEAR_C_MINUS:
                u, side = x.value, "left"
            elif x.chart is Chart.PLAIN:
                d = x.value - m.c
                if d == 0.0:
                    return False
                u, side = -math.log(abs(d)), ("right" if d > 0 else "left")
            else:
                return False
        else:
            d = float(x) - m.c
            if d == 0.0:
                return False
            u, side = -math.log(abs(d)), ("right" if d > 0 else "left")
        return side == self.side and self.u_out <= u <= self.u_in


class InducingScheme:
    """Interval plus the enumerated primitive branches with return times."""

    def __init__(self, m: FlatUnimodalMap, interval: NiceInterval,
                 branches: list[Branch], n_max: int, tol: float,
                 unresolved_mass: float = 0.0):
        self.map = m
        self.interval = interval
        self.branches = branches
        self.n_max = n_max
        self.tol = tol
        self.unresolved_mass = unresolved_mass
        self.map_fingerprint = m.fingerprint()
        self._arrays: dict[str, np.ndarray] | None = None

    def __len__(self):
        return len(self.branches)

    def arrays(self) -> dict[str, np.ndarray]:
        """Parallel numpy views over the branches, built once."""
        if self._arrays is None:
            br = self.branches
            self._arrays = {
                "R": np.array([b.R for b in br], dtype=np.int64),
                "log_measure": np.array([b.log_measure for b in br]),
                "logd_mvt": np.array([b.logd_mvt for b in br]),
                "logd_mid": np.array([b.logd_mid for b in br]),
                "logd_min": np.array([min(b.logd_out, b.logd_mid, b.logd_in) for b in br]),
                "logd_max": np.array([max(b.logd_out, b.logd_mid, b.logd_in) for b in br]),
                "u_in": np.array([b.u_in for b in br]),
                "u_out": np.array([b.u_out for b in br]),
                "side": np.array([1 if b.side == "right" else 0 for b in br], dtype=np.int8),
            }
        return self._arrays

    def branches_with_R(self, n: int) -> list[Branch]:
        return [b for b in self.branches if b.R == n]

    def log_tail(self, n: int) -> float:
        """log |{R > n}| for 1 <= n <= n_max."""
        if n < 2:
            return math.log(self.interval.length)
        us = [b.u_in for b in self.branches if b.R == n]
        if not us:
            return -math.inf
        return float(np.logaddexp(-us[0], -us[1])) if len(us) == 2 else -us[0]


def _depth_after_two(m: FlatUnimodalMap, side: str, u: float) -> float:
    """-log f^2(x) at depth u on one side: the excursion exit coordinate.

    Strictly increasing in u on each side for the families in scope.
    """
    if u > U0:
        q = ChartPoint.near_c_plus(u) if side == "right" else ChartPoint.near_c_minus(u)
    else:
        x = m.c + math.exp(-u) if side == "right" else m.c - math.exp(-u)
        q = ChartPoint.plain(x)
    q = m.eval(m.eval(q))
    if q.chart is Chart.NEAR_0:
        return q.value
    y = m.to_plain(q)
    if y <= 0.0:
        raise ToleranceFailure("excursion collapsed to 0 in plain arithmetic")
    return -math.log(y)


def _solve_depth(m: FlatUnimodalMap, side: str, target_s: float,
                 u_lo: float, step0: float = 0.5) -> float:
    """u with _depth_after_two(u) = target_s, bracketing upward from u_lo."""
    g = lambda u: _depth_after_two(m, side, u) - target_s
    lo = u_lo
    glo = g(lo)
    if glo > 0.0:
        raise ToleranceFailure("depth solver bracket lost (enumeration order)")
    step = step0
    hi = lo + step
    for _ in range(200):
        if g(hi) > 0.0:
            break
        lo = hi
        step *= 2.0
        hi = lo + step
    else:
        raise ToleranceFailure("excursion depth never reached the target")
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * hi:
            break
    return 0.5 * (lo + hi)


def _return_ladder(m: FlatUnimodalMap, interval: NiceInterval, count: int) -> np.ndarray:
    """s_k = -log q_k where q_0 = a- and f(q_{k+1}) = q_k inside (0, a-).

    Points below e^-30 continue the recursion in log coordinates; in the
    exactly-linear regime each rung adds log Df(0).
    """
    s = np.empty(count)
    s[0] = -math.log(interval.a_minus)
    q_prev = interval.a_minus
    k = 1
    while k < count and q_prev > math.exp(-(U0 - 3.0)):
        q = _bisect(lambda x: m(x) - q_prev, 0.0, q_prev, iters=110)
        if not (0.0 < q < q_prev):
            raise ToleranceFailure("return ladder is not descending; "
                                   "is the fixed point at 0 repelling?")
        s[k] = -math.log(q)
        q_prev = q
        k += 1
    s_deep = m.s_deep
    for j in range(k, count):
        sj = s[j - 1] + m.log_df0
        if sj < s_deep:
            for _ in range(4):
                sj = s[j - 1] + m._log_q0(math.exp(-sj))
        s[j] = sj
    return s


def build_scheme(m: FlatUnimodalMap, interval: NiceInterval, n_max: int,
                 tol: float = 1e-13, branch_cap: int = 2_000_000) -> InducingScheme:
    """Enumerate every primitive first-return branch with R <= n_max.

    Lap tracking degenerates, for the families in scope, to the two wedges
    adjacent to c: each side of I splits at the monotone excursion
    coordinate's preimages of the return ladder.  Endpoints are certified by
    verifying the midpoint return time of every branch against its label.
    """
    if n_max < 2:
        raise InducingError("n_max must be >= 2")
    if 2 * (n_max - 1) > branch_cap:
        raise BudgetExceeded(f"{2 * (n_max - 1)} branches exceed cap {branch_cap}")
    if abs(m(m.c) - 1.0) > 1e-12:
        raise NotNice("enumeration requires f(c) = 1")
    ladder = _return_ladder(m, interval, max(n_max - 1, 1))
    c = m.c
    log_len = math.log(interval.length)
    branches: list[Branch] = []
    for side in ("left", "right"):
        edge_x = interval.a_minus if side == "left" else interval.a_plus
        u_edge = -math.log(abs(edge_x - c))
        us = np.empty(n_max)      # us[0] = boundary, us[k] = G^{-1}(s_{k-1})
        us[0] = u_edge
        u_prev = u_edge + 1e-12
        for k in range(n_max - 1):
            u_prev = _solve_depth(m, side, ladder[k], u_prev)
            us[k + 1] = u_prev
        dist = np.exp(-us)
        for n in range(2, n_max + 1):
            u_out, u_in = us[n - 2], us[n - 1]
            width = dist[n - 2] - dist[n - 1]
            if width <= 0.0:
                log_w = -u_out + math.log1p(-math.exp(-(u_in - u_out)))
            else:
                log_w = math.log(width)
            branches.append(Branch(side=side, R=n, u_in=u_in, u_out=u_out,
                                   log_measure=log_w))
    scheme = InducingScheme(m, interval, branches, n_max, tol)
    _certify_and_sample(scheme)
    order = {"left": 0, "right": 1}
    scheme.branches.sort(key=lambda b: (order[b.side],
                                        b.R if b.side == "left" else -b.R))
    scheme._arrays = None
    return scheme


def _interior_nudge(u: float, width: float) -> float:
    """Offset into a branch that survives plain-double quantization.

    Points at depth u <= U0 live on the grid c +- k*ulp, whose u-spacing is
    ~ e^u * ulp(c); nudges below that round back onto the endpoint.
    """
    quantum = 4.4e-16 * math.exp(min(u, U0))
    return min(max(1e-9 * width, quantum, 1e-13), 0.25 * width)


def _certify_and_sample(scheme: InducingScheme) -> None:
    """Per-branch derivative samples, with return-time verification baked in."""
    m, iv = scheme.map, scheme.interval
    log_len = math.log(iv.length)
    for b in scheme.branches:
        nudge = _interior_nudge(b.u_in, b.u_in - b.u_out)
        vals = []
        for u in (b.u_out + nudge, b.u_mid(), b.u_in - nudge):
            r, _, logd = first_return_trace(m, iv, b.endpoint(u, m.c),
                                            accumulate=True)
            vals.append(logd)
            if r != b.R:
                raise ToleranceFailure(
                    f"sample of branch (side={b.side}, R={b.R}) returned in "
                    f"{r} steps; enumeration inconsistent")
        b.logd_out, b.logd_mid, b.logd_in = vals
        b.logd_mvt = log_len - b.log_measure


def induced_log_derivative(scheme: InducingScheme, branch: Branch,
                           x: ChartPoint | float) -> float:
    """log|Df^R(x)| for x in the branch, accumulated through charts."""
    if not branch.contains(scheme.map, x):
        raise OutsideBranch("point is not inside the branch")
    if not isinstance(x, ChartPoint):
        x = ChartPoint.plain(float(x))
    r, _, logd = first_return_trace(scheme.map, scheme.interval, x, accumulate=True)
    return logd


def branch_fixed_point(scheme: InducingScheme, branch: Branch):
    """The periodic point of the induced map inside the branch closure.

    Returns (u, log|Df^R|/R).  Every full branch carries one; for the
    outermost right branch it is the boundary fixed point a+ itself.
    """
    m, iv = scheme.map, scheme.interval
    c = m.c
    sgn = 1.0 if branch.side == "right" else -1.0

    def gap(u: float) -> float:
        pt = branch.endpoint(u, c)
        _, landing, _ = first_return_trace(m, iv, pt)
        x = m.to_plain(pt)
        return m.to_plain(landing) - x

    nudge = _interior_nudge(branch.u_in, branch.u_in - branch.u_out)
    ulo, uhi = branch.u_out + nudge, branch.u_in - nudge
    glo, ghi = gap(ulo), gap(uhi)
    if glo == 0.0:
        u_star = ulo
    elif ghi == 0.0:
        u_star = uhi
    elif glo * ghi > 0.0:
        # boundary fixed point (e.g. a+ on the outermost right branch)
        x_end = m.to_plain(branch.endpoint(branch.u_out, c))
        pt = ChartPoint.plain(x_end)
        logd = 0.0
        for _ in range(branch.R):
            logd += m.log_derivative(pt)
            pt = m.eval(pt)
        return branch.u_out, logd / branch.R
    else:
        a, b = ulo, uhi
        for _ in range(90):
            mid = 0.5 * (a + b)
            if gap(mid) * glo > 0.0:
                a = mid
            else:
                b = mid
        u_star = 0.5 * (a + b)
    r, _, logd = first_return_trace(m, iv, branch.endpoint(u_star, c),
                                    accumulate=True)
    steps = branch.R if r == INFINITE else r
    return u_star, logd / steps


# ---------------------------------------------------------------------------
# tail statistics


@dataclass
class TailTable:
    n: np.ndarray              # 1..n_max
    counts: np.ndarray         # #S(n)
    log_tail: np.ndarray       # log |{R > n}|
    log_tail_sum: np.ndarray   # log of sum_{k=n}^{n_max} |{R > k}|
    poly_slope: float          # d log|{R>n}| / d log n over the fit range
    poly_r2: float
    stretched_slope: float     # d log|{R>n}| / d n^{1/(alpha+1)}
    stretched_r2: float
    stretched_exponent: float
    exp_ratio: float           # median |{R>n+1}|/|{R>n}| over the fit range
    fit_range: tuple[int, int]
    unresolved_mass: float


def _lin_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = float(np.sum(resid ** 2))
    tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss / tot if tot > 0 else 0.0
    return float(slope), float(icpt), r2


def tail_statistics(scheme: InducingScheme,
                    fit_range: tuple[int, int] | None = None) -> TailTable:
    """Return-time tail table with polynomial and stretched-model fits."""
    n_max = scheme.n_max
    counts = np.zeros(n_max, dtype=np.int64)
    log_u_in = {}
    for b in scheme.branches:
        counts[b.R - 1] += 1
        log_u_in.setdefault(b.R, []).append(b.u_in)
    ns = np.arange(1, n_max + 1)
    log_tail = np.empty(n_max)
    log_tail[0] = math.log(scheme.interval.length)
    for n in range(2, n_max + 1):
        us = log_u_in.get(n)
        log_tail[n - 1] = (np.logaddexp(-us[0], -us[1]) if len(us) == 2
                           else -us[0])
    # partial sums from the bottom in linear space where possible
    tails = np.exp(log_tail)
    csum = np.cumsum(tails[::-1])[::-1]
    with np.errstate(divide="ignore"):
        log_tail_sum = np.log(csum)
    if fit_range is None:
        # the deepest decade: shallow return times carry preasymptotic bias
        fit_range = (max(10, n_max // 10), n_max)
    lo, hi = fit_range
    sel = (ns >= lo) & (ns <= hi)
    x_log = np.log(ns[sel].astype(float))
    poly_slope, _, poly_r2 = _lin_fit(x_log, log_tail[sel])
    if scheme.map.family is Family.LOG_FLAT:
        expo = 1.0 / (scheme.map.spec.alpha + 1.0)
    else:
        expo = 0.5
    st_slope, _, st_r2 = _lin_fit(ns[sel].astype(float) ** expo, log_tail[sel])
    ratios = np.exp(np.diff(log_tail[sel]))
    exp_ratio = float(np.median(ratios)) if len(ratios) else math.nan
    return TailTable(
        n=ns, counts=counts, log_tail=log_tail, log_tail_sum=log_tail_sum,
        poly_slope=poly_slope, poly_r2=poly_r2,
        stretched_slope=st_slope, stretched_r2=st_r2, stretched_exponent=expo,
        exp_ratio=exp_ratio, fit_range=(lo, hi),
        unresolved_mass=scheme.unresolved_mass,
    )


# ---------------------------------------------------------------------------
# cache io


def _fmt(x: float) -> str:
    return format(x, ".17g")


def scheme_to_dict(scheme: InducingScheme) -> dict:
    iv = scheme.interval
    entries = []
    for b in scheme.branches:
        e = {"R": b.R, "side": b.side, "log_measure": _fmt(b.log_measure),
             "logd": [_fmt(b.logd_out), _fmt(b.logd_mid), _fmt(b.logd_in)]}
        if max(b.u_in, b.u_out) > U0:
            e["chart"] = "near_c_plus" if b.side == "right" else "near_c_minus"
            e["u_lo"] = _fmt(b.u_in if b.side == "right" else b.u_out)
            e["u_hi"] = _fmt(b.u_out if b.side == "right" else b.u_in)
        else:
            c = scheme.map.c
            e["lo"] = _fmt(c + math.exp(-b.u_in) if b.side == "right"
                           else c - math.exp(-b.u_out))
            e["hi"] = _fmt(c + math.exp(-b.u_out) if b.side == "right"
                           else c - math.exp(-b.u_in))
            e["u_lo"] = _fmt(b.u_in if b.side == "right" else b.u_out)
            e["u_hi"] = _fmt(b.u_out if b.side == "right" else b.u_in)
        entries.append(e)
    return {
        "map_fingerprint": scheme.map_fingerprint,
        "interval": {"a_minus": _fmt(iv.a_minus), "a_plus": _fmt(iv.a_plus),
                     "tau": _fmt(iv.tau)},
        "n_max": scheme.n_max,
        "tol": _fmt(scheme.tol),
        "branches": entries,
    }


def save_scheme(scheme: InducingScheme, path) -> None:
    with open(path, "w") as fh:
        json.dump(scheme_to_dict(scheme), fh, indent=None, separators=(",", ":"))


def load_scheme(m: FlatUnimodalMap, path) -> InducingScheme:
    with open(path) as fh:
        d = json.load(fh)
    if d["map_fingerprint"] != m.fingerprint():
        raise InducingError("cache was built for a different map")
    ivd = d["interval"]
    a_minus, a_plus = float(ivd["a_minus"]), float(ivd["a_plus"])
    tau = float(ivd["tau"])
    iv = NiceInterval(a_minus=a_minus, a_plus=a_plus, tau=tau,
                      k_tau=(1.0 + tau) ** 2 / tau)
    branches = []
    for e in d["branches"]:
        side = e["side"]
        u_lo, u_hi = float(e["u_lo"]), float(e["u_hi"])
        u_in = u_lo if side == "right" else u_hi
        u_out = u_hi if side == "right" else u_lo
        b = Branch(side=side, R=int(e["R"]), u_in=u_in, u_out=u_out,
                   log_measure=float(e["log_measure"]))
        if "logd" in e:
            b.logd_out, b.logd_mid, b.logd_in = (float(v) for v in e["logd"])
        b.logd_mvt = math.log(iv.length) - b.log_measure
        branches.append(b)
    return InducingScheme(m, iv, branches, int(d["n_max"]), float(d["tol"]))
