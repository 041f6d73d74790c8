"""Coupled-stability conditions: positive-realness sweeps, the closed-form
load-port real part for the PD-only architecture, and a sampled-data
passivity observer.

A one-port with immittance z is passive when z has no right-half-plane
poles, any imaginary-axis poles are simple with nonnegative-real residue,
and Re{z(jw)} >= 0 on the axis.  The axis test is done by a dense log-grid
sweep with golden-section refinement around the minimum, matching how the
conditions are used for controller design (margins over a frequency range),
not by algebraic positive-real criteria.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SingularPointError
from .lti import (
    DEFAULT_GRID,
    FrequencyGrid,
    Polynomial,
    RationalTF,
    freq_response,
    stability_tolerance,
)
from .model import (
    Architecture,
    ControllerGains,
    ImpedanceParams,
    PlantParams,
    SeaConfig,
    load_port,
    spring_port,
)

__all__ = [
    "PassivityVerdict",
    "positive_real_margin",
    "load_port_condition",
    "spring_port_condition",
    "RezlCoefficients",
    "rezl_coefficients",
    "rezl_closed_form_no_dob",
    "rezl_compare",
    "EnergyLedger",
    "passivity_observer",
]


@dataclass(frozen=True)
class PassivityVerdict:
    """Outcome of a positive-realness check.

    min_real is the smallest real part found on the sweep (after
    refinement), relative to the condition's threshold; argmin_omega is
    where it occurs.  ``passive`` implies min_real >= -tol and
    unstable_poles == 0.
    """

    passive: bool
    min_real: float
    argmin_omega: float
    unstable_poles: int
    axis_poles_ok: bool = True
    singular_samples: int = 0


def _axis_poles_acceptable(z: RationalTF, tol_axis: float) -> bool:
    """Imaginary-axis poles must be simple with nonnegative-real residue."""
    poles = z.poles()
    axis = [p for p in poles if abs(p.real) <= tol_axis]
    if not axis:
        return True
    scale = max(1.0, max(abs(p) for p in poles))
    used: list[complex] = []
    dden = z.den.derivative()
    for p in axis:
        if any(abs(p - u) <= 1e-7 * scale for u in used):
            return False  # repeated axis pole
        used.append(p)
        dp = dden(p)
        if dp == 0:
            return False
        res = z.num(p) / dp
        if res.real < -1e-9 * max(1.0, abs(res)):
            return False
    return True


def _golden_refine(f, lo: float, hi: float, iters: int = 60) -> tuple[float, float]:
    """Golden-section minimization of f over log-spaced [lo, hi]."""
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = math.log(lo), math.log(hi)
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc, fd = f(math.exp(c)), f(math.exp(d))
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = f(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = f(math.exp(d))
    x = math.exp((a + b) / 2.0)
    return x, f(x)


def positive_real_margin(
    z: RationalTF,
    grid: FrequencyGrid | None = None,
    tol: float = 0.0,
    offset: float = 0.0,
) -> PassivityVerdict:
    """Sweep-based positive-realness check of Re{z(jw)} + offset >= -tol.

    ``offset`` shifts the tested quantity (used by the damping-threshold
    load condition); the reported margin includes it.
    """
    grid = grid or DEFAULT_GRID
    poles = z.poles()
    tol_axis = stability_tolerance(poles)
    unstable = sum(1 for p in poles if p.real > tol_axis)
    axis_ok = _axis_poles_acceptable(z, tol_axis)

    resp = freq_response(z, grid)
    re = resp.values.real + offset
    ok = ~resp.singular
    n_sing = int(np.sum(resp.singular))
    if not np.any(ok):
        raise InvalidInputError("all grid samples are singular")
    idx = int(np.argmin(np.where(ok, re, np.inf)))
    w = grid.array

    def f(omega: float) -> float:
        return (z(1j * omega)).real + offset

    lo = w[max(idx - 1, 0)]
    hi = w[min(idx + 1, len(w) - 1)]
    w_ref, m_ref = _golden_refine(f, lo, hi)
    if re[idx] <= m_ref:
        w_min, m_min = float(w[idx]), float(re[idx])
    else:
        w_min, m_min = w_ref, m_ref

    passive = (unstable == 0) and axis_ok and (m_min >= -tol)
    return PassivityVerdict(
        passive=passive,
        min_real=m_min,
        argmin_omega=w_min,
        unstable_poles=unstable,
        axis_poles_ok=axis_ok,
        singular_samples=n_sing,
    )


def spring_port_condition(
    cfg: SeaConfig, grid: FrequencyGrid | None = None, tol: float | None = None
) -> PassivityVerdict:
    """Spring-port passivity Re{Z_s} >= 0 for a configured system."""
    if tol is None:
        tol = 1e-9 * cfg.plant.K
    z_s = spring_port(cfg).Z_s
    return positive_real_margin(z_s, grid, tol)


def load_port_condition(
    z_s: RationalTF,
    p: PlantParams,
    variant: str = "strict_admittance",
    grid: FrequencyGrid | None = None,
    tol: float | None = None,
) -> PassivityVerdict:
    """Load-port coupled-stability condition.

    strict_admittance  Re{ L / (1 + L Z_s) } >= -tol
    damping_threshold  Re{ Z_l } >= B_l - tol (margin reported over B_l)
    """
    if tol is None:
        tol = 1e-9 * p.K
    ports = load_port(z_s, p)
    if variant == "strict_admittance":
        return positive_real_margin(ports["Y_l"], grid, tol)
    if variant == "damping_threshold":
        return positive_real_margin(ports["Z_l"], grid, tol, offset=-p.B_l)
    raise InvalidInputError(f"unknown load-port variant {variant!r}")


# ---------------------------------------------------------------------------
# closed-form load-port real part (PD-only torque control, I = 0)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RezlCoefficients:
    """Quartic-numerator representation Re{Z_l}(w) = (c4 w^4 + c2 w^2 + c0)/den(w^2)."""

    c4: float
    c2: float
    c0: float
    denominator: Polynomial  # polynomial in x = w^2
    source: str = "rederived"


def rezl_coefficients(
    p: PlantParams, g: ControllerGains, source: str = "rederived"
) -> RezlCoefficients:
    """Coefficients of the closed-form Re{Z_l} for PD-only torque control.

    ``rederived``: exact algebra from the assembled loop, normalized by J_m
    so that c4 equals B_l*J_m identically.  ``printed``: the coefficient set
    as published, kept verbatim for comparison (known to carry typesetting
    damage; see README).
    """
    J_m, B_m, B_l, K, N = p.J_m, p.B_m, p.B_l, p.K, p.N
    K_p, K_d = g.K_p, g.K_d
    if source == "printed":
        c4 = B_l * J_m
        c2 = (
            B_l * B_m
            + 2 * B_l * B_m * K * K_d * N
            + J_m * K_d * K**2 * N
            - 2 * B_l * J_m * K * N * (K_p + 1)
            + B_l * K_d**2 * K**2 * N**2
        )
        c0 = K**2 * N * (B_m * K_p + B_m * N + B_l * K_p**2 * N) + K**2 * N * (
            2 * B_l * K_p * N**2 + B_l * N**3
        )
        den = Polynomial((K * N * (B_m * K_p - K * K_d * N**2), K * N * J_m * K_d))
        return RezlCoefficients(c4=c4, c2=c2, c0=c0, denominator=den, source="printed")
    if source == "rederived":
        eps = B_m + K * N * K_d
        kt = K_p + N
        # raw numerator (x = w^2):  B_l J_m^2 x^2
        #                         + [B_l (eps^2 - 2 K N kt J_m) + K^2 N J_m K_d] x
        #                         + K^2 N (B_m kt + B_l N kt^2)
        # raw denominator:  (K N kt - J_m x)^2 + x eps^2
        # both divided by J_m so the leading numerator coefficient is B_l*J_m
        c4 = B_l * J_m
        c2 = (B_l * (eps**2 - 2 * K * N * kt * J_m) + K**2 * N * J_m * K_d) / J_m
        c0 = K**2 * N * (B_m * kt + B_l * N * kt**2) / J_m
        den = Polynomial(
            (
                (K * N * kt) ** 2 / J_m,
                (eps**2 - 2 * K * N * kt * J_m) / J_m,
                J_m,
            )
        )
        return RezlCoefficients(c4=c4, c2=c2, c0=c0, denominator=den, source="rederived")
    raise InvalidInputError(f"unknown coefficient source {source!r}")


def rezl_closed_form_no_dob(
    p: PlantParams,
    g: ControllerGains,
    omega: float,
    source: str = "rederived",
) -> float:
    """Closed-form Re{Z_l(j omega)} for the PD-only architecture with I = 0."""
    co = rezl_coefficients(p, g, source)
    x = float(omega) ** 2
    den = co.denominator(x).real
    if den == 0.0 or abs(den) < 1e-300:
        raise SingularPointError(f"closed-form denominator vanishes at omega={omega}")
    return (co.c4 * x**2 + co.c2 * x + co.c0) / den


def _zero_impedance_no_dob(p: PlantParams, g: ControllerGains) -> SeaConfig:
    return SeaConfig(
        plant=p,
        gains=g,
        imp=ImpedanceParams(0.0, 0.0),
        arch=Architecture.NO_DOB,
    )


def rezl_compare(
    p: PlantParams, g: ControllerGains, omegas
) -> list[dict[str, float]]:
    """Closed-form (printed and re-derived) vs numeric Re{Z_l} at each omega.

    The numeric path evaluates the assembled PD-only spring port directly:
    Re{Z_l} = Re{Z_s} + B_l.
    """
    cfg = _zero_impedance_no_dob(p, g)
    z_s = spring_port(cfg).Z_s
    rows = []
    for w in omegas:
        numeric = (z_s(1j * float(w))).real + p.B_l
        try:
            printed = rezl_closed_form_no_dob(p, g, w, "printed")
        except SingularPointError:
            printed = math.nan
        rederived = rezl_closed_form_no_dob(p, g, w, "rederived")
        rows.append(
            {
                "omega": float(w),
                "numeric": numeric,
                "rederived": rederived,
                "printed": printed,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# passivity observer
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EnergyLedger:
    """Cumulative observed port energy, rectangle rule at the trajectory dt.

    Sign convention: power flowing from the environment into the robot
    counts positive (flip with ``sign=-1`` at the observer if the opposite
    convention is wanted).
    """

    time: np.ndarray
    energy: np.ndarray
    dt: float
    violation: bool
    min_energy: float
    tol_energy: float


def passivity_observer(
    torque,
    velocity,
    dt: float,
    tol_energy: float | None = None,
    sign: float = 1.0,
) -> EnergyLedger:
    """Integrate port power and flag negative cumulative energy.

    energy[k] = dt * sum_{i<=k} torque[i] * velocity[i]; a violation is
    declared when min_k energy[k] < -tol_energy.
    """
    tau = np.asarray(torque, dtype=float)
    vel = np.asarray(velocity, dtype=float)
    if tau.shape != vel.shape or tau.ndim != 1:
        raise InvalidInputError("torque and velocity must be equal-length 1-D series")
    if dt <= 0:
        raise InvalidInputError("dt must be positive")
    energy = sign * dt * np.cumsum(tau * vel)
    emax = float(np.max(np.abs(energy))) if energy.size else 0.0
    if tol_energy is None:
        tol_energy = 1e-6 * max(emax, 1.0e-12)
    emin = float(np.min(energy)) if energy.size else 0.0
    return EnergyLedger(
        time=dt * (np.arange(tau.size) + 1),
        energy=energy,
        dt=float(dt),
        violation=bool(emin < -tol_energy),
        min_energy=emin,
        tol_energy=float(tol_energy),
    )
