"""Truncated qubit-cavity Hilbert space, QRM and drive Hamiltonians, pulse envelope.

Frequencies at the API boundary are linear (GHz) and times are in ns.  Every
matrix returned here is in angular units (rad/ns), i.e. already multiplied
by 2*pi.  Basis ordering is qubit-major: index ``q * n_fock + n`` with
``q = 0`` for |g> and ``q = 1`` for |e>.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, LabelingConflictError, TruncationError

TWO_PI = 2.0 * np.pi
DEFAULT_N_FOCK = 6
QUBIT_LABELS = ("g", "e")


class DispersiveRegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SystemParams:
    """Qubit frequency, cavity frequency and transverse coupling, all in GHz."""

    f_q: float
    f_c: float
    g: float

    def __post_init__(self):
        if not self.f_q > 0:
            raise ConfigError(f"f_q must be positive, got {self.f_q}")
        if not self.f_c > 0:
            raise ConfigError(f"f_c must be positive, got {self.f_c}")
        if not self.g >= 0:
            raise ConfigError(f"g must be non-negative, got {self.g}")

    @property
    def outside_dispersive(self) -> bool:
        return self.g > 0 and abs(self.f_q - self.f_c) < 5.0 * self.g

    @property
    def w_q(self) -> float:
        return TWO_PI * self.f_q

    @property
    def w_c(self) -> float:
        return TWO_PI * self.f_c

    @property
    def w_g(self) -> float:
        return TWO_PI * self.g

    def scaled(self, k: float) -> "SystemParams":
        return SystemParams(k * self.f_q, k * self.f_c, k * self.g)


@dataclass(frozen=True)
class DriveTone:
    """A single drive tone: strength eps (= Omega_d / 2) and frequency f_d, GHz."""

    eps: float
    f_d: float

    def __post_init__(self):
        if not self.eps >= 0:
            raise ConfigError(f"drive eps must be non-negative, got {self.eps}")
        if not self.f_d > 0:
            raise ConfigError(f"drive frequency must be positive, got {self.f_d}")


@dataclass(frozen=True)
class MonoDrive:
    tone: DriveTone

    @property
    def tones(self) -> tuple[DriveTone, ...]:
        return (self.tone,)

    def with_frequency(self, f_d: float) -> "MonoDrive":
        return MonoDrive(DriveTone(self.tone.eps, f_d))

    @property
    def swept_frequency(self) -> float:
        return self.tone.f_d

    def scaled(self, k: float) -> "MonoDrive":
        return MonoDrive(DriveTone(k * self.tone.eps, k * self.tone.f_d))


@dataclass(frozen=True)
class BiDrive:
    """Qubit-friendly tone ``tone_q`` (swept) plus cavity-friendly tone ``tone_c`` (fixed)."""

    tone_q: DriveTone
    tone_c: DriveTone

    def __post_init__(self):
        if self.tone_q.f_d == self.tone_c.f_d:
            raise ConfigError("bi-chromatic tones must have distinct frequencies")

    @property
    def tones(self) -> tuple[DriveTone, ...]:
        return (self.tone_q, self.tone_c)

    def with_frequency(self, f_dq: float) -> "BiDrive":
        return BiDrive(DriveTone(self.tone_q.eps, f_dq), self.tone_c)

    @property
    def swept_frequency(self) -> float:
        return self.tone_q.f_d

    def scaled(self, k: float) -> "BiDrive":
        return BiDrive(
            DriveTone(k * self.tone_q.eps, k * self.tone_q.f_d),
            DriveTone(k * self.tone_c.eps, k * self.tone_c.f_d),
        )


DriveConfig = MonoDrive | BiDrive


@dataclass(frozen=True)
class PulseSpec:
    """Flat-top pulse with Gaussian edges.

    ``flat_len`` excludes the rising and falling edges; the pulse lasts
    ``flat_len + 2 * edge_len`` ns in total.
    """

    flat_len: float
    edge_len: float = 10.0

    def __post_init__(self):
        if not self.flat_len >= 0:
            raise ConfigError(f"flat_len must be >= 0, got {self.flat_len}")
        if not self.edge_len > 0:
            raise ConfigError(f"edge_len must be > 0, got {self.edge_len}")

    @property
    def total(self) -> float:
        return self.flat_len + 2.0 * self.edge_len


# Gaussian flank truncated at this many standard deviations.
EDGE_TRUNCATION = 2.5


def edge_ramp(s):
    """Rising Gaussian flank on normalized time s in [0, 1], mapping 0 -> 0 and 1 -> 1."""
    s = np.clip(s, 0.0, 1.0)
    floor = np.exp(-0.5 * EDGE_TRUNCATION**2)
    x = EDGE_TRUNCATION * (s - 1.0)
    return (np.exp(-0.5 * x * x) - floor) / (1.0 - floor)


def drive_envelope(pulse: PulseSpec, t):
    """Dimensionless pulse envelope in [0, 1] at time(s) ``t`` (ns).

    Zero outside ``[0, pulse.total]``.
    """
    t = np.asarray(t, dtype=float)
    edge = pulse.edge_len
    total = pulse.total
    # distance from the nearer end of the pulse, folded onto the rising flank
    d = np.minimum(t, total - t)
    env = np.where(d >= edge, 1.0, edge_ramp(d / edge))
    env = np.where((t < 0.0) | (t > total), 0.0, env)
    if env.ndim == 0:
        return float(env)
    return env


def drive_coefficient(drive: DriveConfig, pulse: PulseSpec, t):
    """Scalar multiplying sigma_x in the drive term, in rad/ns."""
    t = np.asarray(t, dtype=float)
    carrier = sum(
        TWO_PI * 2.0 * tone.eps * np.cos(TWO_PI * tone.f_d * t) for tone in drive.tones
    )
    return drive_envelope(pulse, t) * carrier


class Operators(NamedTuple):
    sz: np.ndarray
    sx: np.ndarray
    sp: np.ndarray
    sm: np.ndarray
    a: np.ndarray
    adag: np.ndarray
    n: np.ndarray


def operators(n_fock: int) -> Operators:
    """Qubit and cavity operators embedded in the 2*n_fock dimensional product space."""
    if n_fock < 2:
        raise TruncationError(f"n_fock must be >= 2, got {n_fock}")
    a_c = np.diag(np.sqrt(np.arange(1, n_fock, dtype=float)), k=1)
    eye_c = np.eye(n_fock)
    eye_q = np.eye(2)
    # qubit basis (g, e)
    sz_q = np.diag([-1.0, 1.0])
    sp_q = np.array([[0.0, 0.0], [1.0, 0.0]])
    sm_q = sp_q.T
    sx_q = sp_q + sm_q
    a = np.kron(eye_q, a_c)
    return Operators(
        sz=np.kron(sz_q, eye_c),
        sx=np.kron(sx_q, eye_c),
        sp=np.kron(sp_q, eye_c),
        sm=np.kron(sm_q, eye_c),
        a=a,
        adag=a.T.copy(),
        n=np.kron(eye_q, np.diag(np.arange(n_fock, dtype=float))),
    )


def qrm_hamiltonian(params: SystemParams, n_fock: int = DEFAULT_N_FOCK) -> np.ndarray:
    ops = operators(n_fock)
    h = (
        0.5 * params.w_q * ops.sz
        + params.w_c * ops.n
        + params.w_g * (ops.adag + ops.a) @ ops.sx
    )
    return h


def total_hamiltonian(
    params: SystemParams,
    drive: DriveConfig,
    pulse: PulseSpec,
    t: float,
    n_fock: int = DEFAULT_N_FOCK,
) -> np.ndarray:
    """H_QRM + envelope(t) * sum_i 2 eps_i cos(w_i t) sigma_x at a single time."""
    h = qrm_hamiltonian(params, n_fock)
    c = float(drive_coefficient(drive, pulse, t))
    if c != 0.0:
        h = h + c * operators(n_fock).sx
    return h


@dataclass(frozen=True)
class DressedBasis:
    """Eigenbasis of H_QRM with each eigenvector tagged by its dominant bare state.

    ``energies`` are angular (rad/ns), sorted ascending; ``vectors`` holds
    eigenvectors as columns; ``labels[j]`` is ``(qubit, n)`` for column j.
    """

    energies: np.ndarray
    vectors: np.ndarray
    labels: tuple[tuple[str, int], ...]
    n_fock: int
    _index: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def eigenvalues_ghz(self) -> np.ndarray:
        return self.energies / TWO_PI

    def index(self, label: tuple[str, int]) -> int:
        return self._index[label]

    def vector(self, label: tuple[str, int]) -> np.ndarray:
        return self.vectors[:, self.index(label)]

    def energy(self, label: tuple[str, int]) -> float:
        return float(self.energies[self.index(label)])


def bare_index(label: tuple[str, int], n_fock: int) -> int:
    q, n = label
    return QUBIT_LABELS.index(q) * n_fock + n


def bare_label(index: int, n_fock: int) -> tuple[str, int]:
    return QUBIT_LABELS[index // n_fock], index % n_fock


def dressed_basis(params: SystemParams, n_fock: int = DEFAULT_N_FOCK) -> DressedBasis:
    if params.outside_dispersive:
        warnings.warn(
            f"|f_q - f_c| = {abs(params.f_q - params.f_c):.4g} GHz is below 5 g; "
            "dressed-state labels may be unreliable",
            DispersiveRegimeWarning,
            stacklevel=2,
        )
    h = qrm_hamiltonian(params, n_fock)
    energies, vectors = np.linalg.eigh(h)
    # fix the global sign of each column so the dominant component is positive
    dominant = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[dominant, np.arange(vectors.shape[1])])
    vectors = vectors * signs

    claimed: dict[int, int] = {}
    labels = []
    for j, b in enumerate(dominant):
        if b in claimed:
            raise LabelingConflictError(bare_label(int(b), n_fock), (claimed[b], j))
        claimed[b] = j
        labels.append(bare_label(int(b), n_fock))
    index = {lab: j for j, lab in enumerate(labels)}
    return DressedBasis(energies, vectors, tuple(labels), n_fock, index)
