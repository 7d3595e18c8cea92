"""Unimodal interval maps with flat critical points.

Three concrete families on [0,1]: the quadratic benchmark 4x(1-x), and two
flat-top surgeries where 1 - f(x) = |x-c|^{l(x)} on a window around the
critical point c, with l(x) = |log|x-c||^alpha ("log_flat") or
l(x) = |x-c|^{-v0} ("power_flat").  Outside the window the map is glued to
monotone cubic Hermite branches fixing f(0) = 0 and f(1) = 0.

Orbits of these maps pass within e^{-10^3} of c, 0 and 1, far below double
underflow, so points can be carried in log-distance charts: u = -log|x-c|,
s = -log x, w = -log(1-x).  All chart transitions have closed forms here
(the flat top is exact in log coordinates by construction).
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

U0 = 30.0                 # log-distance beyond which chart representations kick in
U1 = 5.0                  # images this close to 1 travel in the w-chart: a plain
                          # double near 1 resolves the gap h = 1-x only to ~1e-16
                          # absolute, which would jitter branch certification
W_PLAIN_MAX = 36.0        # deepest -log(1-x) still representable as a plain double
S_DEEP = 40.0             # below e^{-40} the climb off 0 advances by exactly log Df(0)


class MapError(Exception):
    """Base class for map construction and evaluation errors."""


class InvalidSpec(MapError):
    pass


class NonMonotoneSurgery(MapError):
    pass


class CriticalPoint(MapError):
    pass


class NotFlat(MapError):
    pass


class OutsideWindow(MapError):
    pass


class Family(str, enum.Enum):
    CHEBYSHEV = "chebyshev"
    LOG_FLAT = "log_flat"
    POWER_FLAT = "power_flat"


@dataclass(frozen=True)
class MapSpec:
    """Parameters selecting one concrete map.

    ``alpha`` is the log_flat exponent, ``v0`` the power_flat exponent,
    ``surgery_radius`` the half-width of the flat-top window, ``d0``/``d1``
    the derivatives at the endpoint fixed points of the outer branches
    (Chebyshev-like 4 by default; values <= 1 produce deliberately bad
    gluings with non-repelling fixed points, useful as negative controls).
    """

    family: Family
    alpha: float = 1.0
    v0: float = 0.5
    c: float = 0.5
    surgery_radius: float = 0.05
    d0: float = 4.0
    d1: float = 4.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not (0.0 < self.c < 1.0):
            raise InvalidSpec(f"critical point c={self.c} must lie in (0,1)")
        if self.family is Family.LOG_FLAT and not self.alpha > 0.0:
            raise InvalidSpec(f"log_flat requires alpha > 0, got {self.alpha}")
        if self.family is Family.POWER_FLAT and not (0.0 < self.v0 < 1.0):
            raise InvalidSpec(f"power_flat requires v0 in (0,1), got {self.v0}")
        if self.family is not Family.CHEBYSHEV:
            lim = min(self.c, 1.0 - self.c)
            if not (0.0 < self.surgery_radius < lim):
                raise InvalidSpec(
                    f"surgery_radius={self.surgery_radius} must lie in (0, {lim})"
                )
        if not (self.d0 > 0.0 and self.d1 > 0.0):
            raise InvalidSpec("endpoint derivatives d0, d1 must be positive")

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "alpha": self.alpha,
            "v0": self.v0,
            "c": self.c,
            "surgery_radius": self.surgery_radius,
            "d0": self.d0,
            "d1": self.d1,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MapSpec":
        known = {"family", "alpha", "v0", "c", "surgery_radius", "d0", "d1"}
        unknown = set(d) - known
        if unknown:
            raise InvalidSpec(f"unknown map fields: {sorted(unknown)}")
        if "family" not in d:
            raise InvalidSpec("map spec requires a 'family' field")
        return cls(**d)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:12]


class Chart(enum.Enum):
    PLAIN = "plain"
    NEAR_C_PLUS = "near_c_plus"
    NEAR_C_MINUS = "near_c_minus"
    NEAR_0 = "near_0"
    NEAR_1 = "near_1"


@dataclass(frozen=True)
class ChartPoint:
    """A point of [0,1], either plain or as a log-distance to c, 0 or 1."""

    chart: Chart
    value: float

    @staticmethod
    def plain(x: float) -> "ChartPoint":
        return ChartPoint(Chart.PLAIN, x)

    @staticmethod
    def near_c_plus(u: float) -> "ChartPoint":
        return ChartPoint(Chart.NEAR_C_PLUS, u)

    @staticmethod
    def near_c_minus(u: float) -> "ChartPoint":
        return ChartPoint(Chart.NEAR_C_MINUS, u)

    @staticmethod
    def near_0(s: float) -> "ChartPoint":
        return ChartPoint(Chart.NEAR_0, s)

    @staticmethod
    def near_1(w: float) -> "ChartPoint":
        return ChartPoint(Chart.NEAR_1, w)

    def is_plain(self) -> bool:
        return self.chart is Chart.PLAIN


class FlatUnimodalMap:
    """A concrete unimodal map with evaluation in plain and log coordinates.

    Built by :func:`make_map`; immutable afterwards and safe to share.
    """

    def __init__(self, spec: MapSpec):
        self.spec = spec
        self.c = spec.c
        self.family = spec.family
        if self.family is Family.CHEBYSHEV:
            self.s0 = 0.0
            self.y_b = 1.0
            # f = x*(4-4x) = (1-x)*4x: both factored forms are linear
            self._q0 = (4.0, -4.0, 0.0)
            self._q1 = (4.0, -4.0, 0.0)
            self.log_df0 = math.log(4.0)
            self.log_df1 = math.log(4.0)
        else:
            self.s0 = spec.surgery_radius
            gb, gpb = self._window_value_slope(self.s0)
            self.y_b = 1.0 - gb
            self._g_s0 = gb
            # left branch x*(a+bx+cx^2) on [0, c-s0], right branch h*(a+bh+ch^2)
            # with h = 1-x on [c+s0, 1]; coefficients from value+slope matching.
            self._q0 = _hermite_factored(spec.d0, self.c - self.s0, self.y_b, gpb)
            self._q1 = _hermite_factored(spec.d1, 1.0 - self.c - self.s0, self.y_b, gpb)
            self.log_df0 = math.log(self._q0[0])
            self.log_df1 = math.log(self._q1[0])
        # plain evaluation underflows once -log(1-f) exceeds W_PLAIN_MAX
        self.d_exc = math.exp(-self._u_for_w(W_PLAIN_MAX))
        # depth below 0 at which one climb step equals log Df(0) in float64
        a, b, cc = self._q0
        s = max(40.0, math.log(8.0 * (abs(b) + abs(cc) + 1.0) / (2.2e-16 * a)))
        while math.log(a + math.exp(-s) * (b + math.exp(-s) * cc)) != self.log_df0:
            s += 2.0
        self.s_deep = s

    # -- flatness profile ---------------------------------------------------

    def ell_of_u(self, u: float) -> float:
        """Flatness exponent at distance e^{-u} from c."""
        if self.family is Family.POWER_FLAT:
            return math.exp(self.spec.v0 * u)
        if self.family is Family.LOG_FLAT:
            return u ** self.spec.alpha
        return 2.0  # quadratic top

    def w_of_u(self, u: float) -> float:
        """-log(1 - f(x)) at |x-c| = e^{-u}, exact inside the window."""
        if self.family is Family.POWER_FLAT:
            return u * math.exp(self.spec.v0 * u)
        if self.family is Family.LOG_FLAT:
            return u ** (self.spec.alpha + 1.0)
        return 2.0 * u - math.log(4.0)

    def dw_du(self, u: float) -> float:
        if self.family is Family.POWER_FLAT:
            v = self.spec.v0
            return math.exp(v * u) * (1.0 + v * u)
        if self.family is Family.LOG_FLAT:
            a = self.spec.alpha
            return (a + 1.0) * u ** a
        return 2.0

    def _u_for_w(self, w: float) -> float:
        """Inverse of w_of_u by bisection (w_of_u is increasing)."""
        lo, hi = 1e-12, 1.0
        while self.w_of_u(hi) < w:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.w_of_u(mid) < w:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def _window_value_slope(self, d: float) -> tuple[float, float]:
        """(g, g') of the top profile g(d) = d^{l(d)} at distance d from c."""
        u = -math.log(d)
        g = math.exp(-self.w_of_u(u))
        return g, g * self.dw_du(u) / d

    # -- plain evaluation ---------------------------------------------------

    def __call__(self, x: float) -> float:
        """Plain-double evaluation; loses the flat top once 1-f < 2^-52."""
        if self.family is Family.CHEBYSHEV:
            return 4.0 * x * (1.0 - x)
        c, s0 = self.c, self.s0
        d = x - c
        if -s0 < d < s0:
            if d == 0.0:
                return 1.0
            w = self.w_of_u(-math.log(abs(d)))
            return -math.expm1(-w)
        if x <= c - s0:
            a, b, cc = self._q0
            return x * (a + x * (b + x * cc))
        h = 1.0 - x
        a, b, cc = self._q1
        return h * (a + h * (b + h * cc))

    def one_minus_f(self, x: float) -> float:
        """1 - f(x) without cancellation, for x on the outer branches."""
        if self.family is Family.CHEBYSHEV:
            d = x - self.c
            return 4.0 * d * d
        c, s0 = self.c, self.s0
        if abs(x - c) < s0:
            return math.exp(-self.w_of_u(-math.log(abs(x - c))))
        if x <= c - s0:
            # 1 - h_L(x) = g(s0) + (L - x) * divided_difference, both terms >= 0
            a, b, cc = self._q0
            L = c - s0
            dd = a + b * (x + L) + cc * (x * x + x * L + L * L)
            return self._g_s0 + (L - x) * dd
        a, b, cc = self._q1
        h, hb = 1.0 - x, 1.0 - c - s0
        dd = a + b * (h + hb) + cc * (h * h + h * hb + hb * hb)
        return self._g_s0 + (hb - h) * dd

    # -- chart plumbing -----------------------------------------------------

    def to_plain(self, p: ChartPoint) -> float:
        """Collapse to a plain double (rounds to the anchor when too deep)."""
        if p.chart is Chart.PLAIN:
            return p.value
        if p.chart is Chart.NEAR_C_PLUS:
            return self.c + math.exp(-p.value)
        if p.chart is Chart.NEAR_C_MINUS:
            return self.c - math.exp(-p.value)
        if p.chart is Chart.NEAR_0:
            return math.exp(-p.value)
        return 1.0 - math.exp(-p.value)

    def from_plain(self, x: float) -> ChartPoint:
        if 0.0 < x < math.exp(-U0):
            return ChartPoint.near_0(-math.log(x))
        if 0.0 < 1.0 - x < math.exp(-U0):
            return ChartPoint.near_1(-math.log1p(-x))
        d = x - self.c
        if d != 0.0 and abs(d) < math.exp(-U0):
            u = -math.log(abs(d))
            return ChartPoint.near_c_plus(u) if d > 0 else ChartPoint.near_c_minus(u)
        return ChartPoint.plain(x)

    def _log_q0(self, x: float) -> float:
        a, b, cc = self._q0
        return math.log(a + x * (b + x * cc))

    def _log_q1(self, h: float) -> float:
        a, b, cc = self._q1
        return math.log(a + h * (b + h * cc))

    def eval(self, p: ChartPoint) -> ChartPoint:
        """One step of the map in chart coordinates.  Total on [0,1]."""
        ch = p.chart
        if ch is Chart.NEAR_C_PLUS or ch is Chart.NEAR_C_MINUS:
            return ChartPoint.near_1(self.w_of_u(p.value))
        if ch is Chart.NEAR_1:
            w = p.value
            s = w - self._log_q1(math.exp(-w))
            if s > U0:
                return ChartPoint.near_0(s)
            return ChartPoint.plain(math.exp(-s))
        if ch is Chart.NEAR_0:
            s = p.value - self._log_q0(math.exp(-p.value))
            if s > U0:
                return ChartPoint.near_0(s)
            return ChartPoint.plain(math.exp(-s))
        x = p.value
        promoted = self.from_plain(x)
        if promoted.chart is not Chart.PLAIN:
            return self.eval(promoted)
        if x == self.c:
            # exact critical value: f(c) = 1 for every family here
            return ChartPoint.plain(1.0)
        d = abs(x - self.c)
        if self.family is Family.CHEBYSHEV:
            # x - c is exact (Sterbenz) on the middle half, where 1 - f =
            # (2d)^2 gives a cancellation-free w at every depth
            in_window = 0.5 * self.c <= x <= 0.5 * (1.0 + self.c)
        else:
            in_window = d < self.s0
        if in_window:
            if self.family is Family.CHEBYSHEV:
                w = -2.0 * math.log1p(2.0 * d - 1.0)
            else:
                w = self.w_of_u(-math.log(d))
            if w > U1:
                return ChartPoint.near_1(w)
            return ChartPoint.plain(-math.expm1(-w))
        y = self(x)
        omf = self.one_minus_f(x)
        if 0.0 < omf < math.exp(-U1):
            return ChartPoint.near_1(-math.log(omf))
        if 0.0 < y < math.exp(-U0):
            return ChartPoint.near_0(-math.log(y))
        return ChartPoint.plain(y)

    # -- derivatives ---------------------------------------------------------

    def log_derivative(self, p: ChartPoint | float) -> float:
        """log|Df| at p; raises CriticalPoint at x = c exactly."""
        if not isinstance(p, ChartPoint):
            p = ChartPoint.plain(float(p))
        ch = p.chart
        if ch is Chart.NEAR_C_PLUS or ch is Chart.NEAR_C_MINUS:
            u = p.value
            # |Df| = e^{-w(u)} * w'(u) * e^{u}
            return -self.w_of_u(u) + math.log(self.dw_du(u)) + u
        if ch is Chart.NEAR_1:
            h = math.exp(-p.value)
            a, b, cc = self._q1
            return math.log(a + h * (2.0 * b + 3.0 * cc * h))
        if ch is Chart.NEAR_0:
            x = math.exp(-p.value)
            a, b, cc = self._q0
            return math.log(a + x * (2.0 * b + 3.0 * cc * x))
        x = p.value
        if x == self.c:
            raise CriticalPoint("Df vanishes at the critical point")
        if self.family is Family.CHEBYSHEV:
            return math.log(abs(4.0 - 8.0 * x))
        c, s0 = self.c, self.s0
        d = abs(x - c)
        if d < s0:
            u = -math.log(d)
            return -self.w_of_u(u) + math.log(self.dw_du(u)) + u
        if x <= c - s0:
            a, b, cc = self._q0
            return math.log(abs(a + x * (2.0 * b + 3.0 * cc * x)))
        h = 1.0 - x
        a, b, cc = self._q1
        return math.log(abs(a + h * (2.0 * b + 3.0 * cc * h)))

    def flatness(self, p: ChartPoint | float) -> tuple[float, float]:
        """(l(x), Dl(x)) inside the surgery window of a flat family."""
        if self.family is Family.CHEBYSHEV:
            raise NotFlat("the quadratic family has no flatness profile")
        if not isinstance(p, ChartPoint):
            p = ChartPoint.plain(float(p))
        if p.chart is Chart.NEAR_C_PLUS:
            u, sign = p.value, 1.0
        elif p.chart is Chart.NEAR_C_MINUS:
            u, sign = p.value, -1.0
        elif p.chart is Chart.PLAIN:
            d = p.value - self.c
            if d == 0.0:
                raise CriticalPoint("flatness profile undefined at c")
            u, sign = -math.log(abs(d)), math.copysign(1.0, d)
        else:
            raise OutsideWindow("point is at the opposite end of [0,1]")
        if math.exp(-u) >= self.s0:
            raise OutsideWindow(f"|x-c| = e^-{u:.3g} is outside the window")
        ell = self.ell_of_u(u)
        if self.family is Family.POWER_FLAT:
            dl = -sign * self.spec.v0 * math.exp((self.spec.v0 + 1.0) * u)
        else:
            a = self.spec.alpha
            dl = -sign * a * u ** (a - 1.0) * math.exp(u)
        return ell, dl

    def fingerprint(self) -> str:
        return self.spec.fingerprint()

    def __repr__(self):
        return f"FlatUnimodalMap({self.spec.canonical_json()})"


def _hermite_factored(a: float, L: float, yL: float, gpL: float):
    """Coefficients (a,b,c) of p(z) = z(a + bz + cz^2) with p(L)=yL, p'(L)=gpL."""
    b = (3.0 * (yL - a * L) - L * (gpL - a)) / (L * L)
    cc = (L * (gpL - a) - 2.0 * (yL - a * L)) / (L * L * L)
    return a, b, cc


def make_map(spec: MapSpec) -> FlatUnimodalMap:
    """Build a map and grid-check strict monotonicity of the gluing.

    The flat top is monotone in closed form, so the check targets the two
    Hermite branches: their derivative must stay positive on a 10^4-point
    grid of each branch domain.
    """
    m = FlatUnimodalMap(spec)
    if spec.family is Family.CHEBYSHEV:
        return m
    for (a, b, cc), L in ((m._q0, spec.c - spec.surgery_radius),
                          (m._q1, 1.0 - spec.c - spec.surgery_radius)):
        z = np.linspace(0.0, L, 10_000)
        dp = a + z * (2.0 * b + 3.0 * cc * z)
        if not np.all(dp > 0.0):
            raise NonMonotoneSurgery(
                "Hermite branch loses monotonicity; shrink surgery_radius "
                "or adjust endpoint derivatives"
            )
    # continuity of the gluing (exact by construction; guards refactors)
    xl = spec.c - spec.surgery_radius
    assert abs(m(xl) - m.y_b) < 1e-9, "left gluing mismatch"
    assert abs(m(spec.c + spec.surgery_radius) - m.y_b) < 1e-9, "right gluing mismatch"
    return m


# -- orbit sampling ----------------------------------------------------------


def sample_orbit(m: FlatUnimodalMap, x0: float, n: int) -> np.ndarray:
    """Emit the orbit x0, f(x0), ..., f^{n-1}(x0) as plain doubles.

    The dynamics runs through charts, so deep excursions past the flat top
    (1 - f below double underflow) are carried exactly; only the *emitted*
    samples round to the anchors 0.0 / 1.0, which is harmless for continuous
    observables.
    """
    out = np.empty(n)
    if n == 0:
        return out
    c = m.c
    s0 = m.s0 if m.family is not Family.CHEBYSHEV else math.inf
    d_exc = m.d_exc
    cheb = m.family is Family.CHEBYSHEV
    a0, b0, c0 = m._q0
    a1, b1, c1 = m._q1
    w_of_u = m.w_of_u
    log_df0 = m.log_df0
    x = float(x0)
    i = 0
    while i < n:
        out[i] = x
        i += 1
        d = x - c
        ad = d if d >= 0.0 else -d
        if ad < s0 or cheb:
            if ad < d_exc:
                # analytic excursion: -> near 1 -> near 0 -> climb
                if ad == 0.0:
                    w = math.inf
                else:
                    w = w_of_u(-math.log(ad))
                if i < n:
                    out[i] = 1.0
                    i += 1
                if i >= n:
                    break
                hw = math.exp(-w) if w < 745.0 else 0.0
                s = w - math.log(a1 + hw * (b1 + hw * c1))
                k = 0
                if s > S_DEEP:
                    k = int(math.ceil((s - S_DEEP) / log_df0))
                k_fill = min(k, n - i)
                if k_fill > 0:
                    out[i:i + k_fill] = np.exp(-(s - log_df0 * np.arange(1, k_fill + 1)))
                    i += k_fill
                if k_fill < k:
                    break
                s -= log_df0 * k
                x = math.exp(-s)
                continue
            if not cheb:
                x = -math.expm1(-w_of_u(-math.log(ad)))
                continue
        if cheb:
            x = 4.0 * x * (1.0 - x)
        elif x <= c - s0:
            x = x * (a0 + x * (b0 + x * c0))
        else:
            h = 1.0 - x
            x = h * (a1 + h * (b1 + h * c1))
    return out


# -- Misiurewicz diagnostics --------------------------------------------------


@dataclass
class MisiurewiczReport:
    m1_min_distance: float
    m1_pass: bool
    periodic_points: list  # (x, period, log_multiplier)
    m2_min_log_multiplier: float
    m2_pass: bool
    m1_threshold: float = 1e-3
    m2_threshold: float = 0.0

    @property
    def ok(self) -> bool:
        return self.m1_pass and self.m2_pass


def _monotone_preimages(m: FlatUnimodalMap, y: float) -> list[float]:
    """The <= 2 plain preimages of y, one per monotone half."""
    roots = []
    for lo, hi in ((0.0, m.c), (m.c, 1.0)):
        flo, fhi = m(lo) - y, m(hi) - y
        if flo == 0.0:
            roots.append(lo)
            continue
        if fhi == 0.0:
            roots.append(hi)
            continue
        if flo * fhi > 0.0:
            continue
        a, b = lo, hi
        for _ in range(100):
            mid = 0.5 * (a + b)
            if (m(mid) - y) * flo > 0.0:
                a = mid
            else:
                b = mid
        roots.append(0.5 * (a + b))
    return roots


def misiurewicz_report(m: FlatUnimodalMap, depth: int = 100,
                       period_bound: int = 5) -> MisiurewiczReport:
    """Numerical (M1)/(M2) diagnostics.

    (M1): minimum distance of the first ``depth`` critical-orbit points to c.
    (M2): every located periodic point of period <= period_bound must have
    log|Df^p| > 0.  Periodic points are found by bisection of f^p(x) - x on
    the monotone laps of f^p (lap endpoints are the preimages of c up to
    order p-1).
    """
    if depth < 1 or period_bound < 1:
        raise InvalidSpec("depth and period_bound must be >= 1")
    # critical orbit through charts
    p = m.eval(ChartPoint.plain(m.c))
    min_dist = math.inf
    for _ in range(depth):
        x = m.to_plain(p)
        min_dist = min(min_dist, abs(x - m.c))
        p = m.eval(p)
    # lap endpoints: preimages of c up to order period_bound - 1
    cuts = {0.0, 1.0, m.c}
    level = [m.c]
    for _ in range(period_bound - 1):
        nxt = []
        for y in level:
            nxt.extend(_monotone_preimages(m, y))
        level = nxt
        cuts.update(level)
    grid = sorted(cuts)

    def iterate(x: float, k: int) -> float:
        q = ChartPoint.plain(x)
        for _ in range(k):
            q = m.eval(q)
        return m.to_plain(q)

    found: list[tuple[float, int, float]] = []
    for per in range(1, period_bound + 1):
        for a, b in zip(grid[:-1], grid[1:]):
            lo = a + 1e-12 * (b - a)
            hi = b - 1e-12 * (b - a)
            flo = iterate(lo, per) - lo
            fhi = iterate(hi, per) - hi
            if flo == 0.0 or fhi == 0.0 or flo * fhi > 0.0:
                continue
            xa, xb = lo, hi
            for _ in range(80):
                mid = 0.5 * (xa + xb)
                if (iterate(mid, per) - mid) * flo > 0.0:
                    xa = mid
                else:
                    xb = mid
            x = 0.5 * (xa + xb)
            if any(abs(x - q) < 1e-9 for q, _, _ in found):
                continue
            lam = 0.0
            pt = ChartPoint.plain(x)
            degenerate = False
            for _ in range(per):
                xx = m.to_plain(pt)
                if xx == m.c:
                    degenerate = True
                    break
                lam += m.log_derivative(pt)
                pt = m.eval(pt)
            if not degenerate:
                found.append((x, per, lam / 1.0))
    # the endpoint fixed point 0 is always present but bisection can miss
    # the boundary root; add it explicitly
    if not any(abs(q) < 1e-9 for q, _, _ in found):
        found.insert(0, (0.0, 1, m.log_derivative(ChartPoint.near_0(50.0))))
    min_mult = min(lam for _, _, lam in found) if found else math.inf
    rep = MisiurewiczReport(
        m1_min_distance=min_dist,
        m1_pass=min_dist > 1e-3,
        periodic_points=found,
        m2_min_log_multiplier=min_mult,
        m2_pass=min_mult > 0.0,
    )
    return rep
