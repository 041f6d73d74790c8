"""Impedance-range metrics: Z-region, DC rendered stiffness, and the largest
safely renderable virtual stiffness under a chosen coupled-stability
condition, plus grid sweeps over controller parameters.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, MetricsError, QuadratureError
from .lti import ONE, FrequencyGrid, Polynomial, RationalTF
from .model import (
    Architecture,
    FeedforwardKind,
    ImpedanceParams,
    SeaConfig,
    feedforward_tf,
    impedance_tf,
    nominal_plants,
    plant_tfs,
    q_filter,
    spring_port,
)
from .passivity import (
    PassivityVerdict,
    load_port_condition,
    spring_port_condition,
)

__all__ = [
    "ZRegionConfig",
    "z_region",
    "z_region_integrand",
    "dc_rendered_stiffness",
    "StiffnessCondition",
    "StiffnessResult",
    "max_safe_stiffness",
    "SweepGrid",
    "param_sweep",
]


@dataclass(frozen=True)
class ZRegionConfig:
    """Settings for the rendered-impedance range integral.

    The metric integrates |ln|Z_upper/Z_lower|| over frequency, with the
    lower bound the zero-impedance controller (I = 0) and the upper bound
    rendered with ``upper``.  The weight is fixed at 1.  ``omega_min``
    truncates the (integrable) logarithmic growth at DC; the upper limit is
    extended automatically until the integrand stays below ``tail_eps``.
    """

    omega_min: float = 1e-2
    tail_eps: float = 1e-8
    upper: ImpedanceParams | None = None  # default: K_imp = plant K, B_imp = 0

    def __post_init__(self):
        if self.omega_min <= 0:
            raise ConfigurationError("omega_min must be > 0")
        if self.tail_eps <= 0:
            raise ConfigurationError("tail_eps must be > 0")

    def resolve_upper(self, cfg: SeaConfig) -> ImpedanceParams:
        return self.upper if self.upper is not None else ImpedanceParams(cfg.plant.K, 0.0)


def _zregion_ratio_tf(cfg: SeaConfig, upper: ImpedanceParams) -> RationalTF:
    """Z_upper/Z_lower as a single rational function.

    The shared loop denominator cancels in the ratio, leaving

        NO_DOB / DOBM:  N M~ (C + C_ff) I_u + 1
        DOBT:           N M (C + C_ff) I_u / (1 - Q) + 1

    with M~ the observer-shaped motor admittance for DOBM.
    """
    p, n, g = cfg.plant, cfg.nominal, cfg.gains
    N = p.N
    M = plant_tfs(p)["M"]
    M_hat = nominal_plants(n, p)["P_m"]
    P_t = nominal_plants(n, p)["P_t"]
    Q = q_filter(cfg.q)
    one = RationalTF.scalar(1.0)
    C = RationalTF(Polynomial((g.K_p, g.K_d)), ONE)
    I_u = impedance_tf(upper)
    C_ff = feedforward_tf(cfg.ff, cfg.arch, Q, P_t, N)
    if cfg.arch is Architecture.DOBT:
        core = (M * (C + C_ff) * I_u).scale(N) / (one - Q)
    elif cfg.arch is Architecture.DOBM:
        delta = M / M_hat - one
        M_t = M / (one + Q * delta)
        core = (M_t * (C + C_ff) * I_u).scale(N)
    else:
        core = (M * (C + C_ff) * I_u).scale(N)
    return core + one


def z_region_integrand(cfg: SeaConfig, zcfg: ZRegionConfig | None = None):
    """Return f(omega) = |ln|Z_u/Z_l|| as a vectorized callable."""
    zcfg = zcfg or ZRegionConfig()
    ratio = _zregion_ratio_tf(cfg, zcfg.resolve_upper(cfg))

    def f(omega):
        w = np.asarray(omega, dtype=float)
        s = 1j * w
        vals = ratio.num.eval_many(s) / ratio.den.eval_many(s)
        mag = np.abs(vals)
        mag = np.where(mag <= 0, np.finfo(float).tiny, mag)
        return np.abs(np.log(mag))

    return f


def _trapezoid_log(f, lo: float, hi: float, n: int) -> float:
    w = np.logspace(math.log10(lo), math.log10(hi), n)
    return float(np.trapezoid(f(w), w))


def z_region(cfg: SeaConfig, zcfg: ZRegionConfig | None = None) -> float:
    """Adaptive quadrature of the Z-region integrand from omega_min upward.

    The upper limit doubles until the integrand has decayed below tail_eps
    and the projected tail contribution is negligible; the trapezoid grid is
    then refined (point-count doubling) until the value changes by < 1e-4
    relative.
    """
    zcfg = zcfg or ZRegionConfig()
    f = z_region_integrand(cfg, zcfg)

    # find the truncation frequency
    hi = max(1e3, 10.0 * zcfg.omega_min)
    integral_scale = None
    for _ in range(40):
        probe = np.array([hi, 2 * hi, 4 * hi])
        vals = f(probe)
        tail_est = float(vals[0] * hi)  # ~ c/w^2 decay: tail ~ f(hi)*hi
        if integral_scale is None:
            integral_scale = _trapezoid_log(f, zcfg.omega_min, hi, 801)
        done = np.all(vals < zcfg.tail_eps) and tail_est <= max(
            1e-4 * max(integral_scale, 1e-12), 1e-12
        )
        if done:
            break
        hi *= 4.0
    else:
        raise QuadratureError(
            f"integrand has not decayed below {zcfg.tail_eps} by omega={hi:.3g} "
            f"(value {float(f(np.array([hi]))[0]):.3g}); "
            "a nonzero B_imp in the upper impedance makes the metric divergent"
        )

    n = 2001
    prev = _trapezoid_log(f, zcfg.omega_min, hi, n)
    for _ in range(12):
        n = 2 * (n - 1) + 1
        cur = _trapezoid_log(f, zcfg.omega_min, hi, n)
        if abs(cur - prev) <= 1e-4 * max(abs(cur), 1e-30):
            return cur
        prev = cur
    raise QuadratureError("quadrature failed to converge to 1e-4 relative")


# ---------------------------------------------------------------------------
# DC rendered stiffness
# ---------------------------------------------------------------------------

def _cff_dc(cfg: SeaConfig) -> float:
    """DC value of the reference feedforward for the configured kind."""
    p, n = cfg.plant, cfg.nominal
    P_t = nominal_plants(n, p)["P_t"]
    Q = q_filter(cfg.q)
    C_ff = feedforward_tf(cfg.ff, cfg.arch, Q, P_t, p.N)
    return C_ff.dc_gain()


def dc_rendered_stiffness(cfg: SeaConfig, check_rtol: float = 1e-3) -> float:
    """Static stiffness presented at the spring port.

    Evaluates the architecture's DC limit

        (K_p + C_ff(0)) * K_imp / (K_p + N)

    and cross-checks it against |jw Z_s(jw)| of the assembled port at
    w = 1e-4 rad/s; disagreement beyond ``check_rtol`` raises MetricsError.
    """
    g, p = cfg.gains, cfg.plant
    cff0 = _cff_dc(cfg)
    denom = g.K_p + p.N
    if denom <= 0:
        raise ConfigurationError("DC-singular configuration: K_p + N must be > 0")
    formula = (g.K_p + cff0) * cfg.imp.K_imp / denom

    w = 1e-4
    z = spring_port(cfg).Z_s
    measured = abs(1j * w * z(1j * w))
    scale = max(abs(formula), 1e-9 * p.K)
    if abs(measured - formula) > check_rtol * scale:
        raise MetricsError(
            f"DC formula {formula:.6g} and low-frequency port evaluation "
            f"{measured:.6g} disagree beyond {check_rtol:.0e} relative"
        )
    return formula


# ---------------------------------------------------------------------------
# maximum safe stiffness
# ---------------------------------------------------------------------------

class StiffnessCondition(enum.Enum):
    SPRING = "spring"
    LOAD_STRICT = "load_strict"
    LOAD_THRESHOLD = "load_threshold"


@dataclass(frozen=True)
class StiffnessResult:
    k_max: float
    k_max_normalized: float
    condition: StiffnessCondition
    bracket: tuple[float, float]
    verdict_at_max: PassivityVerdict | None = None


def _condition_verdict(
    cfg: SeaConfig, condition: StiffnessCondition, grid: FrequencyGrid | None
) -> PassivityVerdict:
    if condition is StiffnessCondition.SPRING:
        return spring_port_condition(cfg, grid)
    z_s = spring_port(cfg).Z_s
    variant = (
        "strict_admittance"
        if condition is StiffnessCondition.LOAD_STRICT
        else "damping_threshold"
    )
    return load_port_condition(z_s, cfg.plant, variant, grid)


def max_safe_stiffness(
    cfg_base: SeaConfig,
    condition: StiffnessCondition = StiffnessCondition.SPRING,
    tol_k: float | None = None,
    grid: FrequencyGrid | None = None,
    hi_cap_factor: float = 1024.0,
) -> StiffnessResult:
    """Largest K_imp accepted by the chosen condition, found by bisection.

    Requires the condition to hold at K_imp = 0 (zero-impedance control is
    safe).  The verdict is assumed monotone in K_imp; a 10-point post-check
    below the found limit validates that and raises MetricsError with the
    offending samples otherwise.
    """
    K = cfg_base.plant.K
    if tol_k is None:
        tol_k = 1e-3 * K
    if tol_k <= 0:
        raise ConfigurationError("tol_k must be > 0")

    def passive(k_imp: float) -> bool:
        return _condition_verdict(
            cfg_base.with_impedance(K_imp=k_imp), condition, grid
        ).passive

    if not passive(0.0):
        raise ConfigurationError(
            "condition fails already at K_imp = 0 (zero impedance); "
            "nothing to maximize"
        )
    lo, hi = 0.0, K
    while passive(hi):
        lo = hi
        hi *= 2.0
        if hi > hi_cap_factor * K:
            raise MetricsError(
                f"condition still holds at K_imp = {hi / K:.0f} K; no upper bracket"
            )
    while hi - lo > tol_k:
        mid = 0.5 * (lo + hi)
        if passive(mid):
            lo = mid
        else:
            hi = mid

    bad = [
        k for k in np.linspace(0.0, lo, 10) if not passive(float(k))
    ]
    if bad:
        raise MetricsError(
            "verdict is not monotone in K_imp; failing samples below the "
            f"found limit: {[round(b, 3) for b in bad]}"
        )
    verdict = _condition_verdict(
        cfg_base.with_impedance(K_imp=lo), condition, grid
    )
    return StiffnessResult(
        k_max=lo,
        k_max_normalized=lo / K,
        condition=condition,
        bracket=(lo, hi),
        verdict_at_max=verdict,
    )


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------

_AXIS_SETTERS = {
    "K_p": lambda c, v: replace(c, gains=replace(c.gains, K_p=float(v))),
    "K_d": lambda c, v: replace(c, gains=replace(c.gains, K_d=float(v))),
    "omega_dob": lambda c, v: replace(c, q=replace(c.q, omega=float(v))),
    "zeta": lambda c, v: replace(c, q=replace(c.q, zeta=float(v))),
    "q0": lambda c, v: replace(c, q=replace(c.q, q0=float(v))),
    "K_imp": lambda c, v: replace(c, imp=replace(c.imp, K_imp=float(v))),
    "B_imp": lambda c, v: replace(c, imp=replace(c.imp, B_imp=float(v))),
    "architecture": lambda c, v: replace(
        c, arch=v if isinstance(v, Architecture) else Architecture(str(v))
    ),
    "feedforward": lambda c, v: replace(
        c, ff=v if isinstance(v, FeedforwardKind) else FeedforwardKind(str(v))
    ),
}


@dataclass(frozen=True)
class SweepGrid:
    """Named axes whose Cartesian product defines the sweep rows."""

    axes: dict[str, tuple]

    def __post_init__(self):
        if not self.axes:
            raise ConfigurationError("sweep grid needs at least one axis")
        unknown = set(self.axes) - set(_AXIS_SETTERS)
        if unknown:
            raise ConfigurationError(
                f"unknown sweep axes {sorted(unknown)}; "
                f"supported: {sorted(_AXIS_SETTERS)}"
            )
        clean = {k: tuple(v) for k, v in self.axes.items()}
        for k, v in clean.items():
            if len(v) == 0:
                raise ConfigurationError(f"sweep axis {k!r} is empty")
        object.__setattr__(self, "axes", clean)

    @property
    def row_count(self) -> int:
        return math.prod(len(v) for v in self.axes.values())

    def rows(self):
        names = list(self.axes)
        for combo in itertools.product(*(self.axes[n] for n in names)):
            yield dict(zip(names, combo))

    def apply(self, cfg: SeaConfig, row: dict) -> SeaConfig:
        for name, value in row.items():
            cfg = _AXIS_SETTERS[name](cfg, value)
        return cfg


def _sweep_task(cfg: SeaConfig, task: str, zcfg, condition, tol_k):
    if task == "maxstiff":
        res = max_safe_stiffness(cfg, condition, tol_k)
        return {"k_max": res.k_max, "k_max_normalized": res.k_max_normalized}
    if task == "zregion":
        return {"z_region": z_region(cfg, zcfg)}
    if task == "dc_stiffness":
        return {"dc_stiffness": dc_rendered_stiffness(cfg)}
    raise ConfigurationError(f"unknown sweep task {task!r}")


def param_sweep(
    grid: SweepGrid,
    task: str,
    base_cfg: SeaConfig,
    zcfg: ZRegionConfig | None = None,
    condition: StiffnessCondition = StiffnessCondition.LOAD_STRICT,
    tol_k: float | None = None,
    map_fn=map,
) -> list[dict]:
    """One result row per grid point, in deterministic grid order.

    Per-row exceptions are recorded in the row's ``error`` field rather than
    aborting the sweep.  ``map_fn`` may be an executor's map for concurrent
    evaluation; results are collected by row index so ordering is identical
    either way.
    """
    rows = list(grid.rows())

    def work(item):
        idx, axis_values = item
        out = dict(axis_values)
        try:
            cfg = grid.apply(base_cfg, axis_values)
            out.update(_sweep_task(cfg, task, zcfg, condition, tol_k))
            out["error"] = ""
        except Exception as exc:  # per-row isolation is the contract
            out["error"] = f"{type(exc).__name__}: {exc}"
        return idx, out

    results = sorted(map_fn(work, enumerate(rows)), key=lambda t: t[0])
    return [r for _, r in results]
