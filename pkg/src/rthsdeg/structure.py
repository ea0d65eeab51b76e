"""Lumped-parameter shear building: isolated and fixed-base state-space assembly.

State ordering is ``[x_b, x_1, x_2, x_3, v_b, v_1, v_2, v_3]`` (relative to
ground).  Input ordering is ``[ground acceleration, F_b, F_1, F_2, F_3]`` where
the forces are applied nodal forces.  Outputs are the four relative
displacements followed by the four absolute accelerations.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

G = 9.81

ISOLATED_DOFS = ("x_b", "x_1", "x_2", "x_3")
FIXED_BASE_DOFS = ("x_1", "x_2", "x_3")


@dataclass(frozen=True)
class RayleighDamping:
    """Rayleigh pair: C = a0*M + a1*K."""

    a0: float
    a1: float


@dataclass(frozen=True)
class ModalDamping:
    """Damping ratios anchored at fixed-base mode numbers (1-based).

    With a single anchor, ``kind`` selects mass- or stiffness-proportional
    damping; with two anchors the full Rayleigh pair is solved.
    """

    ratios: tuple[float, ...] = (0.02, 0.02)
    modes: tuple[int, ...] = (1, 3)
    kind: str = "rayleigh"


@dataclass(frozen=True)
class BuildingModel:
    """Base mass followed by the story masses, bottom to top.

    ``story_stiffnesses[j]`` connects mass ``j`` to mass ``j + 1``.  A model
    with only a base mass and no stories is allowed (rigid block).
    """

    masses: tuple[float, ...] = (600.0, 480.0, 480.0, 479.0)
    story_stiffnesses: tuple[float, ...] = (2.0e6, 2.0e6, 2.0e6)
    damping: RayleighDamping | ModalDamping = field(default_factory=ModalDamping)
    story_height: float = 3.0
    total_weight: float = 2.0e4

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        object.__setattr__(
            self, "story_stiffnesses", tuple(float(k) for k in self.story_stiffnesses)
        )
        if len(self.masses) < 1:
            raise ValueError("at least one mass is required")
        if len(self.story_stiffnesses) != len(self.masses) - 1:
            raise ValueError(
                f"{len(self.masses)} masses need {len(self.masses) - 1} story "
                f"stiffnesses, got {len(self.story_stiffnesses)}"
            )
        if any(not np.isfinite(m) or m <= 0 for m in self.masses):
            raise ValueError(f"masses must be positive, got {self.masses}")
        if any(not np.isfinite(k) or k <= 0 for k in self.story_stiffnesses):
            raise ValueError(
                f"story stiffnesses must be positive, got {self.story_stiffnesses}"
            )
        if not self.story_height > 0:
            raise ValueError("story_height must be positive")
        if isinstance(self.damping, ModalDamping):
            if any(not 0 <= r < 1 for r in self.damping.ratios):
                raise ValueError("damping ratios must lie in [0, 1)")
            n_modes = len(self.masses) - 1
            bad = [i for i in self.damping.modes if not 1 <= i <= n_modes]
            if bad:
                raise ValueError(
                    f"damping references nonexistent fixed-base mode(s) {bad}; "
                    f"model has {n_modes}"
                )

    @property
    def n_dof(self) -> int:
        return len(self.masses)

    @property
    def total_mass(self) -> float:
        return float(sum(self.masses))

    def with_stiffness(self, story_stiffnesses) -> "BuildingModel":
        return BuildingModel(
            self.masses, tuple(story_stiffnesses), self.damping,
            self.story_height, self.total_weight,
        )


@dataclass(frozen=True)
class StateSpaceModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    dof_labels: tuple[str, ...]
    masses: np.ndarray
    K: np.ndarray
    Cd: np.ndarray

    @property
    def n_dof(self) -> int:
        return len(self.dof_labels)

    def output(self, Z: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.C @ Z + self.D @ u


def chain_stiffness(story_stiffnesses, grounded: float = 0.0) -> np.ndarray:
    """Tridiagonal stiffness of a spring chain; ``grounded`` ties DOF 0 to ground."""
    n = len(story_stiffnesses) + 1
    K = np.zeros((n, n))
    K[0, 0] = grounded
    for j, k in enumerate(story_stiffnesses):
        K[j, j] += k
        K[j + 1, j + 1] += k
        K[j, j + 1] -= k
        K[j + 1, j] -= k
    return K


def fixed_base_matrices(model: BuildingModel) -> tuple[np.ndarray, np.ndarray]:
    """Mass and stiffness of the stories with the first one grounded by its spring."""
    if model.n_dof < 2:
        raise ValueError("fixed-base model needs at least one story")
    ks = model.story_stiffnesses
    K = chain_stiffness(ks[1:], grounded=ks[0])
    return np.diag(model.masses[1:]), K


def fixed_base_frequencies(model: BuildingModel) -> np.ndarray:
    """Natural circular frequencies (rad/s) of the fixed-base stories, ascending."""
    M, K = fixed_base_matrices(model)
    w2 = scipy.linalg.eigh(K, M, eigvals_only=True)
    return np.sqrt(np.clip(w2, 0.0, None))


def rayleigh_from_frequencies(omegas, ratios) -> tuple[float, float]:
    """Solve zeta_i = a0/(2 w_i) + a1 w_i / 2 at two anchor frequencies."""
    w1, w2 = (float(w) for w in omegas)
    z1, z2 = (float(z) for z in ratios)
    lhs = np.array([[1 / (2 * w1), w1 / 2], [1 / (2 * w2), w2 / 2]])
    if abs(w1 - w2) <= 1e-12 * max(abs(w1), abs(w2)):
        raise np.linalg.LinAlgError(
            f"Rayleigh anchors at repeated frequency {w1} rad/s: singular system"
        )
    a0, a1 = np.linalg.solve(lhs, [z1, z2])
    return float(a0), float(a1)


def rayleigh_ratio(a0: float, a1: float, omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    return a0 / (2 * omega) + a1 * omega / 2


def rayleigh_coefficients(model: BuildingModel, ratios, modes, kind: str = "rayleigh"):
    """Rayleigh coefficients (a0, a1) anchored at fixed-base modes of ``model``.

    ``modes`` are 1-based.  With ``kind="mass"`` or ``kind="stiffness"`` a
    single anchor is used and the other coefficient is zero.
    """
    omegas = fixed_base_frequencies(model)
    modes = tuple(int(i) for i in modes)
    ratios = tuple(float(r) for r in ratios)
    bad = [i for i in modes if not 1 <= i <= len(omegas)]
    if bad:
        raise ValueError(f"nonexistent mode(s) {bad}; model has {len(omegas)}")
    if kind == "mass":
        return 2 * ratios[0] * omegas[modes[0] - 1], 0.0
    if kind == "stiffness":
        return 0.0, 2 * ratios[0] / omegas[modes[0] - 1]
    if kind != "rayleigh":
        raise ValueError(f"unknown damping kind {kind!r}")
    if len(modes) != 2 or len(ratios) != 2:
        raise ValueError("Rayleigh damping needs exactly two anchors")
    return rayleigh_from_frequencies([omegas[i - 1] for i in modes], ratios)


def damping_coefficients(model: BuildingModel) -> tuple[float, float]:
    d = model.damping
    if isinstance(d, RayleighDamping):
        return d.a0, d.a1
    if model.n_dof < 2:
        return 0.0, 0.0
    return rayleigh_coefficients(model, d.ratios, d.modes, d.kind)


def _state_space(masses, K, Cd, labels) -> StateSpaceModel:
    n = len(masses)
    Minv = np.diag(1.0 / np.asarray(masses))
    A = np.zeros((2 * n, 2 * n))
    A[:n, n:] = np.eye(n)
    A[n:, :n] = -Minv @ K
    A[n:, n:] = -Minv @ Cd
    B = np.zeros((2 * n, n + 1))
    B[n:, 0] = -1.0
    B[n:, 1:] = Minv
    # absolute acceleration = relative acceleration + ground acceleration
    C = np.vstack([np.hstack([np.eye(n), np.zeros((n, n))]), A[n:, :]])
    D = np.zeros((2 * n, n + 1))
    D[n:, 1:] = Minv
    return StateSpaceModel(
        A=A, B=B, C=C, D=D, dof_labels=tuple(labels),
        masses=np.asarray(masses, dtype=float), K=K, Cd=Cd,
    )


def assemble_isolated(model: BuildingModel, isolator_stiffness: float = 0.0) -> StateSpaceModel:
    """State-space model of the isolated building.

    The isolator is excluded by default: its restoring force enters through
    the base force input.  Passing ``isolator_stiffness`` folds a linear
    isolator spring into K, giving the monolithic reference model.
    """
    if isolator_stiffness < 0:
        raise ValueError("isolator stiffness must be non-negative")
    a0, a1 = damping_coefficients(model)
    K_struct = chain_stiffness(model.story_stiffnesses)
    M = np.diag(model.masses)
    Cd = a0 * M + a1 * K_struct
    K = K_struct.copy()
    K[0, 0] += isolator_stiffness
    labels = ISOLATED_DOFS if model.n_dof == 4 else tuple(
        ["x_b"] + [f"x_{j}" for j in range(1, model.n_dof)]
    )
    return _state_space(model.masses, K, Cd, labels)


def assemble_fixed_base(model: BuildingModel) -> StateSpaceModel:
    """Stories only, base DOF removed, first story grounded through its spring."""
    a0, a1 = damping_coefficients(model)
    M, K = fixed_base_matrices(model)
    Cd = a0 * M + a1 * K
    labels = [f"x_{j}" for j in range(1, model.n_dof)]
    return _state_space(model.masses[1:], K, Cd, labels)


def mechanical_energy(ss: StateSpaceModel, Z: np.ndarray) -> np.ndarray:
    """Kinetic plus strain energy for each state row of ``Z``."""
    Z = np.atleast_2d(Z)
    n = ss.n_dof
    x, v = Z[:, :n], Z[:, n:]
    kinetic = 0.5 * np.einsum("ti,i,ti->t", v, ss.masses, v)
    strain = 0.5 * np.einsum("ti,ij,tj->t", x, ss.K, x)
    return kinetic + strain
