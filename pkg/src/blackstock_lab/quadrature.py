"""Radial Plancherel quadrature for solution, profile and residual norms.

Every norm reduces to a one-dimensional radial integral.  With the
transform convention ``f_hat(xi) = int exp(-i x.xi) f(x) dx`` a symbol of
the form ``S(r) - i r (omega . V(r))`` with real ``S``, ``V`` has

    ||f||^2 = (2 pi)^-n |S^{n-1}| int (S^2 + r^2 |V|^2 / n) r^{n-1} dr .

Oscillations ``sin(r t)`` are resolved by uniform panels no wider than a
quarter period, each integrated with the 15-point Gauss-Kronrod rule.
Panel sums are reduced with :func:`math.fsum`, so results do not depend
on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import CauchyData
from .modal import kernel_arrays, sinc
from .params import PhysicalParams
from .profiles import MomentSet, g0_hat, g1_hat
from .spectrum import small_zone_radius

#: Integrands are below this fraction of their peak beyond r_max.
TAIL_EPS = 1e-16
MAX_PANELS = 4_000_000
MAX_DIM = 8

# QUADPACK qk15 abscissae and weights.
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
_gauss_full = np.zeros(8)
_gauss_full[1::2] = _WG
GAUSS_W = np.concatenate([_gauss_full[:-1], _gauss_full[::-1]])

SUBTRACT_CHOICES = ("profile1", "profile2")


class QuadratureError(RuntimeError):
    """Oscillation resolution needs more panels than allowed."""


def sphere_surface(n: int) -> float:
    """Surface measure ``2 pi^(n/2) / Gamma(n/2)`` of the unit sphere in R^n."""
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n!r}")
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def gamma_fn(z: float) -> float:
    """Euler Gamma function for ``z > 0``."""
    z = float(z)
    if not z > 0:
        raise ValueError(f"gamma_fn needs z > 0, got {z!r}")
    return math.gamma(z)


@dataclass(frozen=True)
class PanelPlan:
    """Uniform panels on ``[r_lo, r_max]`` with a 15-point rule on each."""

    r_max: float
    edges: np.ndarray = field(repr=False)
    nodes_per_panel: int = 15

    @property
    def panels(self):
        return list(zip(self.edges[:-1], self.edges[1:]))

    @property
    def count(self) -> int:
        return len(self.edges) - 1

    def nodes(self):
        """Return ``(r, half_widths)``; ``r`` has shape ``(panels, 15)``."""
        lo, hi = self.edges[:-1], self.edges[1:]
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        return mid[:, None] + half[:, None] * NODES[None, :], half


def truncation_radius(params: PhysicalParams, t: float) -> float:
    """Radius beyond which ``exp(-c_min r^2 t)`` is below :data:`TAIL_EPS`."""
    c_min = 0.5 * min(params.kappa, 0.5 * params.delta)
    return math.sqrt(max(1.0, math.log(1.0 / TAIL_EPS)) / (c_min * t))


def make_panel_plan(r_hi: float, width: float, r_lo: float = 0.0, refine: int = 1) -> PanelPlan:
    """Equal panels of width at most ``width / refine`` covering ``[r_lo, r_hi]``."""
    if not r_hi > r_lo:
        raise ValueError("empty integration range")
    count = int(math.ceil((r_hi - r_lo) / width)) * int(refine)
    if count > MAX_PANELS:
        raise QuadratureError(f"{count} panels exceed the budget of {MAX_PANELS}")
    return PanelPlan(r_max=r_hi, edges=np.linspace(r_lo, r_hi, count + 1))


def integrate_plan(values: np.ndarray, half: np.ndarray):
    """Kronrod integral and ``|K15 - G7|`` error estimate of node values.

    ``values`` has shape ``(..., panels, 15)``; the reduction over panels is
    exactly rounded.
    """
    k = (values @ KRONROD_W) * half
    g = (values @ GAUSS_W) * half
    if k.ndim == 1:
        return math.fsum(k), math.fsum(np.abs(k - g))
    flat_k = k.reshape(-1, k.shape[-1])
    flat_e = np.abs(k - g).reshape(-1, k.shape[-1])
    vals = np.array([math.fsum(row) for row in flat_k]).reshape(k.shape[:-1])
    errs = np.array([math.fsum(row) for row in flat_e]).reshape(k.shape[:-1])
    return vals, errs


@dataclass(frozen=True)
class NormTask:
    """One norm evaluation.

    ``subtract`` is ``()``, ``("profile1",)`` or ``("profile1", "profile2")``.
    ``zone`` is ``"full"`` (whole frequency line up to the truncation
    radius) or ``"small"`` (only ``r <= eps0``).
    """

    params: PhysicalParams
    data: CauchyData
    t: float
    n: int
    subtract: tuple = ()
    zone: str = "full"

    def __post_init__(self):
        object.__setattr__(self, "subtract", normalize_subtract(self.subtract))
        if int(self.n) != self.n or not 1 <= self.n <= MAX_DIM:
            raise ValueError(f"dimension must be an integer in [1, {MAX_DIM}], got {self.n!r}")
        if not self.t > 0:
            raise ValueError(f"t must be positive, got {self.t!r}")
        if self.zone not in ("full", "small"):
            raise ValueError(f"unknown zone policy {self.zone!r}")

    @property
    def level(self) -> int:
        return len(self.subtract)


def normalize_subtract(subtract) -> tuple:
    items = set(subtract)
    unknown = items - set(SUBTRACT_CHOICES)
    if unknown:
        raise ValueError(f"unknown profiles {sorted(unknown)}")
    if "profile2" in items and "profile1" not in items:
        raise ValueError("profile2 can only be subtracted together with profile1")
    return tuple(s for s in SUBTRACT_CHOICES if s in items)


@dataclass(frozen=True)
class NormResult:
    norm: float
    quad_err_est: float
    panels_used: int


def _moment_gram(data: CauchyData):
    ms = [d.m for d in data]
    width = max((len(m) for m in ms), default=0)
    mat = np.zeros((3, max(width, 1)))
    for i, m in enumerate(ms):
        mat[i, : len(m)] = m
    return mat @ mat.T, width


def _radial_channels(params, data, t, r, level):
    """Scalar channel ``S`` and ``r^2 |V|^2`` at nodes ``r`` for one level."""
    k0, k1, k2 = kernel_arrays(params, r, t)
    ks = (k0, k1, k2)
    gram, _ = _moment_gram(data)
    a = [ks[j] * np.exp(-d.sigma * r * r) for j, d in enumerate(data)]
    scalar = sum(d.p * a[j] for j, d in enumerate(data))
    out = {}
    need_g = level >= 1
    g0 = g0_hat(params, r, t) if need_g else None
    g1 = g1_hat(params, r, t) if level >= 2 else None
    moms = MomentSet.from_data(params, data)
    vv_base = sum(gram[i, j] * a[i] * a[j] for i in range(3) for j in range(3))
    for lev in range(level + 1):
        s = scalar
        vv = vv_base
        if lev >= 1:
            s = s - moms.p2 * g0
        if lev >= 2:
            s = s - (moms.p_combined + moms.p2_coeff * t * r * r) * g1
            # V -> V - G0 M2
            cross = sum(gram[j, 2] * a[j] for j in range(3))
            vv = vv - 2.0 * g0 * cross + gram[2, 2] * g0 * g0
        out[lev] = (s, r * r * np.maximum(vv, 0.0))
    return out


def norm_table(params: PhysicalParams, data: CauchyData, t: float, ns, levels=(0,),
               zone: str = "full", refine: int = 1):
    """Norms for several dimensions and subtraction levels at one time.

    Channels are evaluated once per ``t`` and reused for every ``n``.

    Returns
    -------
    dict
        ``{(level, n): NormResult}`` where level 0, 1, 2 means nothing,
        the first profile, or both profiles subtracted.
    """
    t = float(t)
    ns = [int(n) for n in ns]
    if data.is_zero():
        return {(lev, n): NormResult(0.0, 0.0, 0) for lev in levels for n in ns}
    _, width = _moment_gram(data)
    if width > min(ns):
        raise ValueError(f"moment vectors of length {width} do not fit dimension {min(ns)}")
    r_hi = truncation_radius(params, t)
    if zone == "small":
        r_hi = min(r_hi, small_zone_radius(params))
    plan = make_panel_plan(r_hi, 0.5 * math.pi / t, refine=refine)
    r, half = plan.nodes()
    chans = _radial_channels(params, data, t, r, max(levels))
    out = {}
    for lev in levels:
        s, ww = chans[lev]
        ss = s * s
        for n in ns:
            rn = r ** (n - 1)
            vals, errs = integrate_plan(np.stack([ss * rn, ww * rn / n]), half)
            total = vals[0] + vals[1]
            err = errs[0] + errs[1]
            scale = (2.0 * math.pi) ** (-n) * sphere_surface(n)
            norm = math.sqrt(max(scale * total, 0.0))
            rel = err / (2.0 * total) if total > 0 else 0.0
            out[(lev, n)] = NormResult(norm, rel, plan.count)
    return out


def evaluate_norm(task: NormTask, refine: int = 1) -> NormResult:
    """Norm, relative quadrature error estimate and panel count for a task."""
    res = norm_table(task.params, task.data, task.t, [task.n], levels=(task.level,),
                     zone=task.zone, refine=refine)
    return res[(task.level, task.n)]


def solution_error_norm(task: NormTask) -> float:
    """``||psi(t) - subtracted profiles||_{L^2}`` via Plancherel."""
    return evaluate_norm(task).norm


MULTIPLIER_KINDS = ("heat", "g1-type", "g0-type")


def multiplier_norm(kind: str, n: int, c: float, t: float, eps0: float = 0.2,
                    refine: int = 1) -> float:
    """Fourier-side L^2 norm of a multiplier cut off sharply at ``eps0``.

    ``heat``: ``exp(-c r^2 t)``; ``g1-type``: ``|sin(r t)|/r exp(-c r^2 t)``;
    ``g0-type``: ``sin(r t)^2/r^2 exp(-c r^2 t)``.  The singular kinds are
    evaluated as powers of ``t sinc(r t)``.
    """
    if kind not in MULTIPLIER_KINDS:
        raise ValueError(f"unknown multiplier kind {kind!r}")
    if not t >= 1:
        raise ValueError("multiplier norms need t >= 1")
    if not (c > 0 and eps0 > 0):
        raise ValueError("need c > 0 and eps0 > 0")
    r_hi = min(eps0, math.sqrt(math.log(1.0 / TAIL_EPS) / (2.0 * c * t)))
    plan = make_panel_plan(r_hi, 0.5 * math.pi / t, refine=refine)
    r, half = plan.nodes()
    vals = np.exp(-2.0 * c * r * r * t) * r ** (n - 1)
    if kind != "heat":
        sq = (t * sinc(r * t)) ** 2
        vals = vals * (sq if kind == "g1-type" else sq * sq)
    total, _ = integrate_plan(vals, half)
    return math.sqrt(sphere_surface(n) * total)


def rho_integral(k: float, delta: float, t: float, refine: int = 1):
    """``int_0^inf exp(-delta rho^2) sin(sqrt(t) rho)^2 rho^k d rho`` for ``k > -3``.

    Returns ``(value, error_estimate)``.
    """
    if not k > -3:
        raise ValueError(f"integral diverges at 0 for exponent {k!r}")
    st = math.sqrt(t)
    rho_hi = math.sqrt((math.log(1.0 / TAIL_EPS) + max(k, 0.0) * 5.0) / delta)
    plan = make_panel_plan(rho_hi, 0.5 * math.pi / st, refine=refine)
    rho, half = plan.nodes()
    # sin^2(s rho) rho^k = t rho^(k+2) sinc^2(s rho)
    vals = np.exp(-delta * rho * rho) * t * rho ** (k + 2) * sinc(st * rho) ** 2
    return integrate_plan(vals, half)


def gamma_limit_integral(n: int, delta: float, t: float, power_offset: int):
    """Quadrature of ``int exp(-delta r^2) sin(sqrt(t) r)^2 r^(n+offset) dr`` and its limit.

    The large-``t`` limit is ``Gamma((n+offset+1)/2) / (4 delta^((n+offset+1)/2))``.

    Returns
    -------
    (value, limit, rel_err)
    """
    if power_offset not in (-3, -1, 1):
        raise ValueError("power_offset must be -3, -1 or +1")
    if not t >= 1:
        raise ValueError("need t >= 1")
    k = n + power_offset
    if k < 0:
        raise ValueError(f"no finite limit for n={n}, offset={power_offset}")
    value, _ = rho_integral(k, delta, t)
    z = 0.5 * (k + 1)
    limit = 0.25 * delta ** (-z) * gamma_fn(z)
    return value, limit, abs(value - limit) / limit


def psi2_fourier_norm_sq(params: PhysicalParams, n: int, t: float, moments: MomentSet,
                         refine: int = 1) -> float:
    """``int |psi2_hat|^2 d xi`` by direct radial quadrature in ``r``."""
    r_hi = math.sqrt(math.log(1.0 / TAIL_EPS) / (0.5 * params.delta * t))
    plan = make_panel_plan(r_hi, 0.5 * math.pi / t, refine=refine)
    r, half = plan.nodes()
    g1 = g1_hat(params, r, t)
    g0 = g0_hat(params, r, t)
    scalar = (moments.p_combined + moments.p2_coeff * t * r * r) * g1
    vals = (scalar**2 + moments.m2_norm_sq / n * r * r * g0 * g0) * r ** (n - 1)
    total, _ = integrate_plan(vals, half)
    return sphere_surface(n) * total


def psi2_lower_decomposition(params: PhysicalParams, n: int, t: float, moments: MomentSet):
    """Split of ``int |psi2_hat|^2`` into the moment part and three scalar parts.

    ``A1 = |M|^2 |S|/n int r^2 G0^2 r^{n-1} dr`` and
    ``A2_k = t^(1-n/2) |S| c_k I_{n-3+2(k-1)}(t)`` with
    ``c = (P^2, 2 P P2, P2^2)`` and ``I_m = int exp(-delta rho^2) sin^2(sqrt(t) rho) rho^m``.
    """
    if not t >= 1:
        raise ValueError("need t >= 1")
    surf = sphere_surface(n)
    a1 = 0.0
    if moments.m2_norm_sq:
        r_hi = math.sqrt(math.log(1.0 / TAIL_EPS) / (0.5 * params.delta * t))
        plan = make_panel_plan(r_hi, 0.5 * math.pi / t)
        r, half = plan.nodes()
        g0 = g0_hat(params, r, t)
        total, _ = integrate_plan(r * r * g0 * g0 * r ** (n - 1), half)
        a1 = moments.m2_norm_sq * surf / n * total
    pc, p2 = moments.p_combined, moments.p2_coeff
    coeffs = (pc * pc, 2.0 * pc * p2, p2 * p2)
    pref = t ** (1.0 - 0.5 * n) * surf
    parts = []
    for c, m in zip(coeffs, (n - 3, n - 1, n + 1)):
        parts.append(pref * c * rho_integral(m, params.delta, t)[0] if c else 0.0)
    return (a1, *parts)


def a2_limit_constant(params: PhysicalParams, n: int, moments: MomentSet) -> float:
    """Exact large-``t`` limit of ``(A2_1 + A2_2 + A2_3) t^(n/2 - 1)`` for ``n >= 3``."""
    if n < 3:
        raise ValueError("finite limit only for n >= 3")
    d = params.delta
    h = 0.5 * n
    pc, p2 = moments.p_combined, moments.p2_coeff
    form = d * d * pc * pc + 2.0 * d * (h - 1) * pc * p2 + h * (h - 1) * p2 * p2
    return 0.25 * sphere_surface(n) * d ** (-h - 1) * gamma_fn(h - 1) * form


def a2_limit_constant_square(params: PhysicalParams, n: int, moments: MomentSet) -> float:
    """The perfect-square form ``|S| Gamma(n/2-1) (delta P + n/2 P2)^2 / (4 delta^(n/2+1))``.

    This is the form obtained if ``Gamma(n/2)`` is replaced by
    ``(n/2) Gamma(n/2 - 1)`` instead of ``(n/2 - 1) Gamma(n/2 - 1)``.  Kept
    for comparison with :func:`a2_limit_constant`, whose quadratic form is
    positive definite for ``n >= 3``.
    """
    if n < 3:
        raise ValueError("finite limit only for n >= 3")
    d = params.delta
    h = 0.5 * n
    sq = (d * moments.p_combined + h * moments.p2_coeff) ** 2
    return 0.25 * sphere_surface(n) * d ** (-h - 1) * gamma_fn(h - 1) * sq
