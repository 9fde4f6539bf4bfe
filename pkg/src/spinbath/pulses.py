"""Control pulses: ideal rotations, finite-width pulses, and error models.

A pulse is a rotation of the central spin about an axis in the transverse
plane. Ideal pulses are instantaneous; real pulses evolve the full system
under H_free plus the RF drive for the pulse duration, so bath dynamics
during the pulse is kept exactly. Non-ideality enters through a static
flip-angle fraction, a static axis tilt, a per-realization RF amplitude
scale drawn from a configurable distribution (static spatial inhomogeneity:
one draw per realization, not per pulse), and optionally a pulse-to-pulse
phase jitter that resamples the axis tilt for every pulse application.

The jitter channel matters for trains whose pulses share one axis: any
static imperfection of such pulses cancels pairwise (two identical pi
rotations compose to a global phase), so only a fluctuating axis can
damage the spin component along the pulse axis.

Every real pulse factors exactly as U_real = U_error @ U_ideal, which is
what the average-Hamiltonian analysis consumes.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .operators import Propagator, evolve

PULSE_AXES = ("x", "y", "-x", "-y")
PULSE_AREA_ATOL = 1e-9

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def split_axis(axis):
    """('-y') -> ('y', -1.0); the sign folds into the rotation angle."""
    if axis in ("x", "y", "z"):
        return axis, 1.0
    if axis in ("-x", "-y", "-z"):
        return axis[1], -1.0
    raise ContractError(f"unknown pulse axis {axis!r}")


def axis_vector(base, tilt):
    """Unit vector of a transverse axis tilted by `tilt` rad within the plane."""
    if base == "x":
        return np.cos(tilt), np.sin(tilt), 0.0
    if base == "y":
        return -np.sin(tilt), np.cos(tilt), 0.0
    if base == "z":
        if tilt != 0.0:
            raise ContractError("axis tilt applies to transverse axes only")
        return 0.0, 0.0, 1.0
    raise ContractError(f"unknown base axis {base!r}")


def _rotation(ux, uy, uz, angle, ops):
    """exp(-i angle (u . S)) built from the closed 2x2 form, then embedded."""
    half = 0.5 * angle
    r2 = np.cos(half) * np.eye(2, dtype=complex) - 1j * np.sin(half) * (
        ux * _PAULI["x"] + uy * _PAULI["y"] + uz * _PAULI["z"]
    )
    return np.kron(r2, np.eye(ops.dim // 2, dtype=complex))


@dataclass(frozen=True)
class PulseSpec:
    """Nominal description of one pulse.

    duration == 0 denotes a delta pulse. For finite pulses the on-resonance
    area must close: rf_amplitude * duration == nominal_angle at unit RF
    scale (checked within 1e-9).
    """

    axis: str
    nominal_angle: float
    duration: float = 0.0
    rf_amplitude: float = 0.0

    def __post_init__(self):
        if self.axis not in PULSE_AXES:
            raise ContractError(f"pulse axis must be one of {PULSE_AXES}, got {self.axis!r}")
        if self.duration < 0:
            raise ContractError(f"pulse duration must be >= 0, got {self.duration}")
        if self.duration > 0:
            if self.rf_amplitude <= 0:
                raise ContractError("finite-duration pulse needs rf_amplitude > 0")
            area = self.rf_amplitude * self.duration
            if abs(area - self.nominal_angle) > PULSE_AREA_ATOL:
                raise ContractError(
                    f"pulse area {area} does not match nominal angle {self.nominal_angle}"
                )

    @classmethod
    def from_rf(cls, axis, nominal_angle, rf_amplitude):
        """Finite pulse of the given nominal angle at RF amplitude rad/us."""
        if rf_amplitude <= 0:
            raise ContractError("rf_amplitude must be > 0")
        return cls(axis, nominal_angle, nominal_angle / rf_amplitude, rf_amplitude)

    @classmethod
    def delta(cls, axis, nominal_angle):
        return cls(axis, nominal_angle, 0.0, 0.0)


@dataclass(frozen=True)
class FixedRf:
    """RF amplitude scale pinned to exactly 1."""

    kind: str = field(default="fixed", init=False, repr=False)

    def sample(self, rng):
        return 1.0


@dataclass(frozen=True)
class BimodalRf:
    """Two-site RF distribution: s1 with probability `weight`, else s2.

    The default (0.95, 1.05, 0.5) is a crude stand-in for a coil profile of
    about 10 percent spread; two discrete amplitudes produce beats in the
    error-dominated signal rather than a smooth envelope.
    """

    s1: float = 0.95
    s2: float = 1.05
    weight: float = 0.5
    kind: str = field(default="bimodal", init=False, repr=False)

    def __post_init__(self):
        if self.s1 <= 0 or self.s2 <= 0:
            raise ContractError("RF scale factors must be > 0")
        if not 0.0 <= self.weight <= 1.0:
            raise ContractError("weight must lie in [0, 1]")

    def sample(self, rng):
        return self.s1 if rng.random() < self.weight else self.s2


@dataclass(frozen=True)
class GaussianRf:
    """Gaussian RF scale; sd = 0.10 matches an inhomogeneity of about 10%."""

    mean: float = 1.0
    sd: float = 0.10
    kind: str = field(default="gaussian", init=False, repr=False)

    def __post_init__(self):
        if self.mean <= 0 or self.sd < 0:
            raise ContractError("GaussianRf needs mean > 0 and sd >= 0")

    def sample(self, rng):
        return max(float(rng.normal(self.mean, self.sd)), 1e-6)


@dataclass(frozen=True)
class ErrorModel:
    """Static pulse imperfections applied identically to every pulse.

    flip_angle_fraction eps rescales every rotation angle to (1 + eps) of
    nominal; axis_tilt rotates the pulse axis within the transverse plane;
    rf is the amplitude-scale distribution sampled once per realization.
    tilt_jitter_sd adds a gaussian tilt resampled independently for every
    pulse (RF phase noise); unlike the static channels it is not constant
    within a realization.
    """

    rf: object = field(default_factory=FixedRf)
    flip_angle_fraction: float = 0.0
    axis_tilt: float = 0.0
    tilt_jitter_sd: float = 0.0

    @property
    def is_trivial(self):
        return (
            getattr(self.rf, "kind", None) == "fixed"
            and self.flip_angle_fraction == 0.0
            and self.axis_tilt == 0.0
            and self.tilt_jitter_sd == 0.0
        )


def sample_rf_scale(err, seed):
    """One RF amplitude scale draw; deterministic in `seed`."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    value = float(err.rf.sample(rng))
    if value <= 0:
        raise ContractError(f"sampled RF scale must be > 0, got {value}")
    return value


def ideal_pulse(axis, angle, ops):
    """Instantaneous perfect rotation exp(-i angle S_axis) on the full space."""
    base, sign = split_axis(axis)
    ux, uy, uz = axis_vector(base, 0.0)
    return Propagator(_rotation(ux, uy, uz, sign * angle, ops), 0.0)


def real_pulse(spec, rf_scale, err, h_free, ops, tilt=None):
    """Pulse propagator with errors applied, exact in the full space.

    Delta pulses rotate by nominal_angle * rf_scale * (1 + eps) about the
    tilted axis. Finite pulses evolve under
    H_free + sign * w_eff * (u . S) for the pulse duration, with
    w_eff = rf_amplitude * rf_scale * (1 + eps), so system-bath and
    intra-bath dynamics run during the pulse. `tilt` overrides the error
    model's static axis tilt; the engine passes per-pulse draws through it
    when tilt jitter is enabled.
    """
    if rf_scale <= 0:
        raise ContractError(f"rf_scale must be > 0, got {rf_scale}")
    base, sign = split_axis(spec.axis)
    ux, uy, uz = axis_vector(base, err.axis_tilt if tilt is None else tilt)
    scale = rf_scale * (1.0 + err.flip_angle_fraction)
    if spec.duration == 0.0:
        u = _rotation(ux, uy, uz, sign * spec.nominal_angle * scale, ops)
        return Propagator(u, 0.0)
    w_eff = spec.rf_amplitude * scale
    drive = sign * w_eff * (ux * ops.sx + uy * ops.sy + uz * ops.sz)
    h = np.asarray(h_free, dtype=complex) + drive
    return evolve(h, spec.duration)


def error_factor(spec, rf_scale, err, ops):
    """Error rotation E with real = E @ ideal for the isolated pulse.

    The factorization is exact by construction: E multiplies the realized
    pulse (with H_free absent) by the inverse ideal rotation.
    """
    zero = np.zeros((ops.dim, ops.dim), dtype=complex)
    realized = real_pulse(spec, rf_scale, err, zero, ops).matrix
    ideal = ideal_pulse(spec.axis, spec.nominal_angle, ops).matrix
    return Propagator(realized @ ideal.conj().T, 0.0)
