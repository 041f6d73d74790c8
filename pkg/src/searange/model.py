"""Series-elastic-actuator plant, controllers and port dynamics.

The physical arrangement: a motor (inertia J_m, damping B_m) drives the
elastic element K through a transmission with inverse gear ratio N; the load
(J_l, B_l) hangs on the other side of the spring and couples to the
environment.  Signal conventions used throughout:

    spring torque rate   d(tau_s)/dt = K * (omega_l + N * omega_m)
    motor balance        omega_m = M * (u - N*tau_s + d),  M = 1/(J_m s + B_m)
    load balance         omega_l = L * (tau_e - tau_s),    L = 1/(J_l s + B_l)
    torque reference     tau_ref = I(s) * omega_l,         I = (K_imp + B_imp s)/s
    torque controller    u_c = C (tau_ref - tau_s) + C_ff tau_ref

Three torque-control architectures are supported:

* ``NO_DOB``  plain PD torque control.
* ``DOBM``   disturbance observer around the motor, with the measured spring
  reaction fed into the observer so only non-spring disturbances (friction d)
  are estimated and cancelled.  At model match the omega_l channel is
  identical to NO_DOB and the d channel is scaled by (1 - Q).
* ``DOBT``   recursive disturbance observer around the torque loop, inverting
  the fixed-output torque nominal P_t.

``spring_port`` assembles the port impedance Z_s (omega_l -> tau_s) and the
disturbance channel D_s (d -> tau_s) symbolically; ``block_diagram_response``
solves the raw signal-flow equations numerically per frequency and serves as
an independent oracle for that assembly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .lti import ONE, Polynomial, RationalTF, S, tf_feedback

__all__ = [
    "PlantParams",
    "NominalParams",
    "ControllerGains",
    "ImpedanceParams",
    "QFilterSpec",
    "Architecture",
    "FeedforwardKind",
    "PortDynamics",
    "SeaConfig",
    "plant_tfs",
    "q_filter",
    "nominal_plants",
    "feedforward_tf",
    "impedance_tf",
    "spring_port",
    "load_port",
    "block_diagram_response",
    "PAPER_PLANT",
]


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigurationError(msg)


@dataclass(frozen=True)
class PlantParams:
    """Physical two-inertia SEA parameters."""

    J_m: float = 6.4e-6   # motor inertia
    B_m: float = 6e-5     # motor damping
    J_l: float = 7.0      # load inertia
    B_l: float = 100.0    # load damping
    K: float = 141350.0   # spring stiffness
    N: float = 1.0 / 7854 # inverse gear ratio

    def __post_init__(self):
        _require(self.J_m > 0, "J_m must be > 0")
        _require(self.J_l > 0, "J_l must be > 0")
        _require(self.K > 0, "K must be > 0")
        _require(self.N > 0, "N must be > 0")
        _require(self.B_m >= 0, "B_m must be >= 0")
        _require(self.B_l >= 0, "B_l must be >= 0")


#: Identified parameter set used as the default plant.
PAPER_PLANT = PlantParams()


@dataclass(frozen=True)
class NominalParams:
    """Nominal motor model used by the disturbance observers."""

    J_m_hat: float = 6.4e-6
    B_m_hat: float = 6e-5

    def __post_init__(self):
        _require(self.J_m_hat > 0, "J_m_hat must be > 0")
        _require(self.B_m_hat > 0, "B_m_hat must be > 0")

    @classmethod
    def matching(cls, p: PlantParams) -> "NominalParams":
        return cls(J_m_hat=p.J_m, B_m_hat=max(p.B_m, 1e-300))


@dataclass(frozen=True)
class ControllerGains:
    """PD torque-loop gains: C(s) = K_p + K_d s."""

    K_p: float = 1.0
    K_d: float = 0.1

    def __post_init__(self):
        _require(self.K_p >= 0, "K_p must be >= 0")
        _require(self.K_d >= 0, "K_d must be >= 0")


@dataclass(frozen=True)
class ImpedanceParams:
    """Outer impedance law: virtual stiffness and damping."""

    K_imp: float = 0.0
    B_imp: float = 0.0

    def __post_init__(self):
        _require(self.K_imp >= 0, "K_imp must be >= 0")
        _require(self.B_imp >= 0, "B_imp must be >= 0")


@dataclass(frozen=True)
class QFilterSpec:
    """Second-order low-pass observer filter.

    Q(s) = q0 * w0^2 / (s^2 + 2 zeta w0 s + w0^2),  w0 = omega (rad/s).

    q0 = 0 is allowed and turns the observer off (Q identically zero).
    """

    omega: float = 2 * math.pi * 25  # cutoff, rad/s
    zeta: float = 1.0
    q0: float = 1.0

    def __post_init__(self):
        _require(self.omega > 0, "Q-filter cutoff must be > 0")
        _require(self.zeta > 0, "Q-filter damping ratio must be > 0")
        _require(0.0 <= self.q0 <= 1.0, "Q-filter DC gain must be in [0, 1]")


class Architecture(enum.Enum):
    NO_DOB = "nodob"
    DOBM = "dobm"
    DOBT = "dobt"


class FeedforwardKind(enum.Enum):
    ZERO = "zero"
    ORIGINAL = "original"
    PROPOSED = "proposed"


@dataclass(frozen=True)
class PortDynamics:
    """Spring-port dynamics of a configured system.

    Z_s maps the load velocity omega_l to the spring torque tau_s; D_s maps
    the motor-side disturbance d to tau_s.
    """

    Z_s: RationalTF
    D_s: RationalTF
    arch: Architecture


@dataclass(frozen=True)
class SeaConfig:
    """Complete plant + controller configuration."""

    plant: PlantParams = field(default_factory=PlantParams)
    nominal: NominalParams | None = None
    gains: ControllerGains = field(default_factory=ControllerGains)
    imp: ImpedanceParams = field(default_factory=ImpedanceParams)
    q: QFilterSpec = field(default_factory=QFilterSpec)
    arch: Architecture = Architecture.NO_DOB
    ff: FeedforwardKind = FeedforwardKind.ZERO
    d_const: float = 0.0

    def __post_init__(self):
        if self.nominal is None:
            object.__setattr__(self, "nominal", NominalParams.matching(self.plant))

    def with_impedance(self, K_imp: float, B_imp: float | None = None) -> "SeaConfig":
        b = self.imp.B_imp if B_imp is None else B_imp
        return replace(self, imp=ImpedanceParams(K_imp=K_imp, B_imp=b))


# ---------------------------------------------------------------------------
# element transfer functions
# ---------------------------------------------------------------------------

def plant_tfs(p: PlantParams) -> dict[str, RationalTF]:
    """Motor and load admittances M = 1/(J_m s + B_m), L = 1/(J_l s + B_l)."""
    M = RationalTF(ONE, Polynomial((p.B_m, p.J_m)))
    L = RationalTF(ONE, Polynomial((p.B_l, p.J_l)))
    return {"M": M, "L": L}


def q_filter(spec: QFilterSpec) -> RationalTF:
    w0, z, q0 = spec.omega, spec.zeta, spec.q0
    return RationalTF(
        Polynomial((q0 * w0 * w0,)), Polynomial((w0 * w0, 2 * z * w0, 1.0))
    )


def nominal_plants(n: NominalParams, p: PlantParams) -> dict[str, RationalTF]:
    """Observer nominals:

    P_m: nominal motor admittance 1/(J_m_hat s + B_m_hat).
    P_t: fixed-output torque-loop nominal, the map u -> tau_s when the load
         is clamped: P_t = K N / (J_m_hat s^2 + B_m_hat s + K N^2).  Its DC
         gain is 1/N (a held motor torque u is balanced by N tau_s).
    """
    P_m = RationalTF(ONE, Polynomial((n.B_m_hat, n.J_m_hat)))
    K, N = p.K, p.N
    # equivalent to tf_feedback(K*N/s * P_m, N), assembled directly to keep
    # the denominator at its natural second order
    P_t = RationalTF(
        Polynomial((K * N,)), Polynomial((K * N * N, n.B_m_hat, n.J_m_hat))
    )
    return {"P_m": P_m, "P_t": P_t}


def impedance_tf(i: ImpedanceParams) -> RationalTF:
    """I(s) = (K_imp + B_imp s)/s, mapping omega_l to the torque reference."""
    if i.K_imp == 0.0 and i.B_imp == 0.0:
        return RationalTF.scalar(0.0)
    return RationalTF(Polynomial((i.K_imp, i.B_imp)), Polynomial((0.0, 1.0)))


def feedforward_tf(
    kind: FeedforwardKind,
    arch: Architecture,
    q: RationalTF,
    p_t: RationalTF,
    N: float,
) -> RationalTF:
    """Reference feedforward C_ff per architecture.

    ZERO      0 everywhere.
    ORIGINAL  0 for NO_DOB and DOBM; the bandlimited torque-plant inverse
              P_t^-1 Q for DOBT.
    PROPOSED  N (1 - Q) lead term for DOBM; P_t^-1 Q + N (1 - Q) for DOBT.
              Undefined for NO_DOB.
    """
    zero = RationalTF.scalar(0.0)
    if kind is FeedforwardKind.ZERO:
        return zero
    if kind is FeedforwardKind.ORIGINAL:
        if arch is Architecture.DOBT:
            return p_t.inverse() * q
        return zero
    if kind is FeedforwardKind.PROPOSED:
        if arch is Architecture.NO_DOB:
            raise ConfigurationError(
                "the proposed feedforward is defined only for the DOB architectures"
            )
        lead = (RationalTF.scalar(1.0) - q).scale(N)
        if arch is Architecture.DOBM:
            return lead
        return p_t.inverse() * q + lead
    raise InvalidInputError(f"unknown feedforward kind {kind!r}")


# ---------------------------------------------------------------------------
# port dynamics
# ---------------------------------------------------------------------------

def spring_port(cfg: SeaConfig) -> PortDynamics:
    """Assemble Z_s (omega_l -> tau_s) and D_s (d -> tau_s) for cfg.arch.

    NO_DOB:
        Z_s = K/s (N M (C+C_ff) I + 1) / (1 + K/s N M (C + N))
        D_s = K/s M N               / (1 + K/s N M (C + N))
    DOBM (reaction-compensated observer, M~ = M / (1 + Q (M/M^ - 1))):
        M -> M~ everywhere, d channel additionally scaled by (1 - Q).
    DOBT (recursive torque observer):
        Z_s = K/s (N M (C+C_ff) I + 1 - Q) / D
        D_s = K/s M (1 - Q) N             / D
        D   = (1-Q) + Q M/M^ + K/s N M (C + N)
    """
    p, n, g = cfg.plant, cfg.nominal, cfg.gains
    K, N = p.K, p.N
    M = plant_tfs(p)["M"]
    M_hat = nominal_plants(n, p)["P_m"]
    P_t = nominal_plants(n, p)["P_t"]
    Q = q_filter(cfg.q)
    C = RationalTF(Polynomial((g.K_p, g.K_d)), ONE)
    I = impedance_tf(cfg.imp)
    C_ff = feedforward_tf(cfg.ff, cfg.arch, Q, P_t, N)
    Ks = RationalTF(Polynomial((K,)), Polynomial((0.0, 1.0)))  # K/s
    one = RationalTF.scalar(1.0)

    if cfg.arch is Architecture.NO_DOB:
        den = one + (Ks * M * (C + RationalTF.scalar(N))).scale(N)
        num_w = Ks * ((M * (C + C_ff) * I).scale(N) + one)
        num_d = (Ks * M).scale(N)
    elif cfg.arch is Architecture.DOBM:
        delta = M / M_hat - one
        M_t = M / (one + Q * delta)
        den = one + (Ks * M_t * (C + RationalTF.scalar(N))).scale(N)
        num_w = Ks * ((M_t * (C + C_ff) * I).scale(N) + one)
        num_d = (Ks * M_t * (one - Q)).scale(N)
    elif cfg.arch is Architecture.DOBT:
        den = (one - Q) + Q * M / M_hat + (Ks * M * (C + RationalTF.scalar(N))).scale(N)
        num_w = Ks * ((M * (C + C_ff) * I).scale(N) + one - Q)
        num_d = (Ks * M * (one - Q)).scale(N)
    else:  # pragma: no cover
        raise InvalidInputError(f"unknown architecture {cfg.arch!r}")

    if den.num.is_zero:
        raise ConfigurationError("assembled loop denominator is identically zero")
    return PortDynamics(Z_s=num_w / den, D_s=num_d / den, arch=cfg.arch)


def load_port(z_s: RationalTF, p: PlantParams) -> dict[str, RationalTF]:
    """Load-port admittance and impedance.

    Y_l = L / (1 + L Z_s) maps tau_e to omega_l; its inverse equals
    Z_l = Z_s + J_l s + B_l.
    """
    L = plant_tfs(p)["L"]
    Y_l = tf_feedback(L, z_s)
    if Y_l.num.is_zero:
        raise InvalidInputError("load-port admittance is identically zero")
    Z_l = z_s + RationalTF(Polynomial((p.B_l, p.J_l)), ONE)
    return {"Y_l": Y_l, "Z_l": Z_l}


# ---------------------------------------------------------------------------
# independent structural oracle
# ---------------------------------------------------------------------------

def block_diagram_response(
    cfg: SeaConfig, omegas: np.ndarray
) -> dict[str, np.ndarray]:
    """Solve the raw signal-flow equations numerically per frequency.

    Unknowns per point: x = [omega_m, tau_s, u_p].  Equations:

        omega_m = M (u_p - N tau_s + d)
        tau_s   = K/s (omega_l + N omega_m)
        u_p     = u_c - d_hat            (architecture-specific observer)
        u_c     = C (I omega_l - tau_s) + C_ff I omega_l

    Returns Z_s and D_s sampled on ``omegas``.  This shares no rational
    algebra with :func:`spring_port` and is used to cross-check it.
    """
    p, n, g = cfg.plant, cfg.nominal, cfg.gains
    K, N = p.K, p.N
    M = plant_tfs(p)["M"]
    M_hat_inv = RationalTF(Polynomial((n.B_m_hat, n.J_m_hat)), ONE)
    P_t = nominal_plants(n, p)["P_t"]
    Q = q_filter(cfg.q)
    I = impedance_tf(cfg.imp)
    C_ff = feedforward_tf(cfg.ff, cfg.arch, Q, P_t, N)

    z_out = np.empty(len(omegas), dtype=complex)
    d_out = np.empty(len(omegas), dtype=complex)
    for i, w in enumerate(np.asarray(omegas, dtype=float)):
        s = 1j * w
        m = M(s)
        q = Q(s)
        c = g.K_p + g.K_d * s
        ivals = I(s)
        cff = C_ff(s)
        ks = K / s
        ptinv = 1.0 / P_t(s)
        mhi = M_hat_inv(s)
        for inp in ("omega_l", "d"):
            wl = 1.0 if inp == "omega_l" else 0.0
            d = 0.0 if inp == "omega_l" else 1.0
            u_c_const = (c + cff) * ivals * wl  # u_c = const - c * tau_s
            # rows: [omega_m, tau_s, u_p] coefficients, RHS
            A = np.zeros((3, 3), dtype=complex)
            b = np.zeros(3, dtype=complex)
            # omega_m - m*u_p + m*N*tau_s = m*d
            A[0] = [1.0, m * N, -m]
            b[0] = m * d
            # tau_s - ks*N*omega_m = ks*omega_l
            A[1] = [-ks * N, 1.0, 0.0]
            b[1] = ks * wl
            if cfg.arch is Architecture.NO_DOB:
                # u_p = u_c
                A[2] = [0.0, c, 1.0]
                b[2] = u_c_const
            elif cfg.arch is Architecture.DOBM:
                # d_hat = Q (M^-1 omega_m - u_p + N tau_s); u_p = u_c - d_hat
                A[2] = [q * mhi, c + q * N, 1.0 - q]
                b[2] = u_c_const
            else:  # DOBT
                # d_hat = Q (P_t^-1 tau_s - u_p); u_p = u_c - d_hat
                A[2] = [0.0, c + q * ptinv, 1.0 - q]
                b[2] = u_c_const
            x = np.linalg.solve(A, b)
            if inp == "omega_l":
                z_out[i] = x[1]
            else:
                d_out[i] = x[1]
    return {"Z_s": z_out, "D_s": d_out}
