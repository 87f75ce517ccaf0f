"""Two-atom level structure, dipole operators and Liouvillian superoperators.

The master equation is implemented in the density-matrix picture on the
16-dimensional two-atom Hilbert space. Density matrices are vectorized by
row-major stacking, so ``vec(X rho Y) = kron(X, Y.T) @ vec(rho)``. The product
state ``|i>_1 |k>_2`` has index ``4*(i-1) + (k-1)``.

Rates are in units of ``gamma`` (half the spontaneous decay rate of the
excited level) and lengths in units of ``1/k0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np
from scipy import sparse

from .spherical import SPHERICAL_UNIT, Level, SphericalVector, transverse_projector

N_LEVELS = 4
DIM = N_LEVELS**2  # two-atom Hilbert space
VEC_DIM = DIM**2  # vectorized density matrix

#: Smallest separation ``k0 r12`` for which the far-field coupling is trusted.
MIN_K0_R12 = 10.0


def coupling_g(k0_r12):
    """Far-field photon-exchange coupling ``g = 3i exp(i k0 r12) / (2 k0 r12)``.

    Accepts scalars or arrays. Raises ``ValueError`` below ``MIN_K0_R12``.
    """
    x = np.asarray(k0_r12, dtype=float)
    if np.any(x < MIN_K0_R12):
        raise ValueError(
            f"k0_r12 must be >= {MIN_K0_R12} (far-field coupling), got {np.min(x)}"
        )
    g = 1.5j * np.exp(1j * x) / x
    return complex(g) if g.ndim == 0 else g


@dataclass(frozen=True)
class DriveParams:
    """Laser drive: Rabi frequency, detuning and polarization, rates in units of gamma."""

    omega: float
    delta: float = 0.0
    gamma: float = 1.0
    kL_dir: tuple = (0.0, 0.0, 1.0)
    pol: SphericalVector = field(default_factory=lambda: SphericalVector.unit(+1))

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.omega >= 0:
            raise ValueError(f"omega must be non-negative, got {self.omega}")
        k = np.asarray(self.kL_dir, dtype=float)
        if k.shape != (3,) or abs(np.linalg.norm(k) - 1.0) > 1e-12:
            raise ValueError("kL_dir must be a Cartesian unit vector")

    @classmethod
    def from_saturation(cls, s: float, delta: float = 0.0, gamma: float = 1.0, **kw):
        """Drive with saturation parameter ``s = omega**2 / 2(delta**2 + gamma**2)``."""
        if s < 0:
            raise ValueError(f"saturation must be non-negative, got {s}")
        return cls(omega=float(np.sqrt(2.0 * s * (delta**2 + gamma**2))),
                   delta=delta, gamma=gamma, **kw)

    @property
    def saturation(self) -> float:
        return self.omega**2 / (2.0 * (self.delta**2 + self.gamma**2))

    @property
    def delta_sq(self) -> float:
        return (self.delta / self.gamma) ** 2

    @property
    def kL(self) -> np.ndarray:
        # |k_L| = k0
        return np.asarray(self.kL_dir, dtype=float)


@dataclass(frozen=True)
class Configuration:
    """Two atoms at ``r1`` and ``r2 = r1 + k0_r12 * n_hat`` (units of 1/k0)."""

    k0_r12: float
    n_hat: tuple
    r1: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.k0_r12 >= MIN_K0_R12:
            raise ValueError(
                f"k0_r12 must be >= {MIN_K0_R12} (far-field coupling), got {self.k0_r12}"
            )
        n = np.asarray(self.n_hat, dtype=float)
        if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError("n_hat must be a Cartesian unit vector")

    @classmethod
    def from_vector(cls, r12, r1=(0.0, 0.0, 0.0)) -> "Configuration":
        r12 = np.asarray(r12, dtype=float)
        x = float(np.linalg.norm(r12))
        return cls(k0_r12=x, n_hat=tuple(r12 / x), r1=tuple(r1))

    @property
    def r2(self) -> np.ndarray:
        return np.asarray(self.r1, float) + self.k0_r12 * np.asarray(self.n_hat, float)

    @property
    def separation(self) -> np.ndarray:
        """``r2 - r1``."""
        return self.k0_r12 * np.asarray(self.n_hat, dtype=float)

    @property
    def g(self) -> complex:
        return coupling_g(self.k0_r12)

    @property
    def projector(self) -> np.ndarray:
        return transverse_projector(self.n_hat)


class TwoAtomOperatorBasis:
    """The 256 operators ``sigma^1_ij sigma^2_kl``, ordered like ``vec(rho)``.

    Label ``(i, j, k, l)`` sits at the vector index of the matrix element
    ``<i k| rho |j l>``.
    """

    def __init__(self):
        self.labels = [
            (i, j, k, l)
            for i, k, j, l in product(range(1, 5), repeat=4)
        ]
        self._index = {lab: n for n, lab in enumerate(self.labels)}

    def __len__(self):
        return len(self.labels)

    def index(self, label) -> int:
        return self._index[tuple(label)]

    def label(self, index: int):
        return self.labels[index]

    def operator(self, label) -> np.ndarray:
        i, j, k, l = label
        return two_atom_sigma(i, j, 1) @ two_atom_sigma(k, l, 2)


BASIS = TwoAtomOperatorBasis()


def vec(rho: np.ndarray) -> np.ndarray:
    """Row-major vectorization; leading batch axes are kept."""
    rho = np.asarray(rho)
    return rho.reshape(rho.shape[:-2] + (VEC_DIM,))


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    return v.reshape(v.shape[:-1] + (DIM, DIM))


def single_atom_sigma(k: int, l: int) -> np.ndarray:
    """``|k><l|`` on one atom (levels numbered 1..4)."""
    op = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    op[k - 1, l - 1] = 1.0
    return op


def embed(op: np.ndarray, atom: int) -> np.ndarray:
    if atom == 1:
        return np.kron(op, np.eye(N_LEVELS))
    if atom == 2:
        return np.kron(np.eye(N_LEVELS), op)
    raise ValueError(f"atom must be 1 or 2, got {atom}")


def two_atom_sigma(k: int, l: int, atom: int) -> np.ndarray:
    return embed(single_atom_sigma(k, l), atom)


@dataclass(frozen=True)
class OperatorVector:
    """Operator-valued vector ``sum_q op_q e_q``; components are 16x16 matrices."""

    spherical: dict

    @property
    def cartesian(self) -> np.ndarray:
        """Array of shape (3, 16, 16) with the x, y, z components."""
        return np.einsum("qc,qab->cab",
                         np.array([SPHERICAL_UNIT[q] for q in (-1, 0, 1)]),
                         np.array([self.spherical[q] for q in (-1, 0, 1)]))

    def dagger(self) -> "OperatorVector":
        # (sum op_q e_q)^dagger = sum op_q^dagger conj(e_q) = sum (-1)^q op_q^dagger e_{-q}
        return OperatorVector({-q: (-1) ** q * self.spherical[q].conj().T for q in (-1, 0, 1)})

    def dot(self, vector: SphericalVector) -> np.ndarray:
        """Bilinear contraction with a c-number vector."""
        return sum((-1) ** q * self.spherical[q] * vector[-q] for q in (-1, 0, 1))


@lru_cache(maxsize=None)
def _dipole_cached(atom: int) -> OperatorVector:
    sig = {q: two_atom_sigma(1, lvl, atom) for q, lvl in
           ((-1, Level.EXCITED_MINUS), (0, Level.EXCITED_ZERO), (1, Level.EXCITED_PLUS))}
    return OperatorVector({-1: -sig[-1], 0: sig[0], 1: -sig[1]})


def build_dipole_operator(atom: int) -> OperatorVector:
    """Lowering dipole ``D = -e_{-1} s_12 + e_0 s_13 - e_{+1} s_14`` of one atom."""
    if atom not in (1, 2):
        raise ValueError(f"atom must be 1 or 2, got {atom}")
    return _dipole_cached(atom)


@dataclass(frozen=True)
class Superoperator:
    """Linear map on vectorized two-atom density matrices."""

    matrix: np.ndarray
    basis: TwoAtomOperatorBasis = BASIS

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return unvec(vec(rho) @ self.matrix.T)

    def __add__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.matrix + other.matrix)

    def __mul__(self, c) -> "Superoperator":
        return Superoperator(c * self.matrix)

    __rmul__ = __mul__

    def trace_functional_residual(self) -> float:
        """Max |entry| of ``vec(1)^T L``; zero for a trace-preserving generator."""
        return float(np.max(np.abs(vec(np.eye(DIM)) @ self.matrix)))


def spre(x):
    return sparse.kron(x, np.eye(DIM), format="csr")


def spost(y):
    return sparse.kron(np.eye(DIM), np.asarray(y).T, format="csr")


def sprepost(x, y):
    return sparse.kron(x, np.asarray(y).T, format="csr")


def lindblad_dissipator(c: np.ndarray, rate: float):
    """``rate * (c rho c^+ - {c^+ c, rho}/2)`` as a sparse superoperator."""
    cdc = c.conj().T @ c
    return rate * (sprepost(c, c.conj().T) - 0.5 * spre(cdc) - 0.5 * spost(cdc))


def laser_phases(params: DriveParams, config: Configuration | None) -> tuple:
    """Phases ``k_L . r_alpha`` of the drive at the two atoms."""
    if config is None:
        return 0.0, 0.0
    kL = params.kL
    return float(kL @ np.asarray(config.r1, float)), float(kL @ config.r2)


def gauge_diagonal(phi1, phi2) -> np.ndarray:
    """Diagonal of ``U = prod_alpha exp(i phi_alpha P_excited^alpha)``.

    ``L0(phi) = U L0(0) U^+`` holds for the drive Liouvillian, which lets one
    factorization serve every configuration. Broadcasts over array phases.
    """
    excited = np.array([0.0, 1.0, 1.0, 1.0])
    phi1 = np.asarray(phi1, float)[..., None, None]
    phi2 = np.asarray(phi2, float)[..., None, None]
    phase = np.exp(1j * (phi1 * excited[:, None] + phi2 * excited[None, :]))
    return phase.reshape(phase.shape[:-2] + (DIM,))


def drive_hamiltonian(params: DriveParams, phases=(0.0, 0.0)) -> np.ndarray:
    h = np.zeros((DIM, DIM), dtype=complex)
    for atom, phi in zip((1, 2), phases):
        d = build_dipole_operator(atom)
        ddag = d.dagger()
        rabi = params.omega * np.exp(1j * phi)
        number = sum(ddag.spherical[-q] @ d.spherical[q] * (-1) ** q for q in (-1, 0, 1))
        h += -params.delta * number
        coupling = rabi * ddag.dot(params.pol) + np.conj(rabi) * d.dot(params.pol.conj())
        h += -0.5 * coupling
    return h


def build_single_atom_liouvillian(params: DriveParams,
                                  config: Configuration | None = None) -> Superoperator:
    """Sum of the two independent-atom Liouvillians (drive, detuning, decay).

    The Rabi frequency of atom ``alpha`` carries the phase ``exp(i k_L . r_alpha)``;
    with ``config=None`` both atoms sit at the origin.
    """
    h = drive_hamiltonian(params, laser_phases(params, config))
    lmat = -1j * (spre(h) - spost(h))
    for atom in (1, 2):
        d = build_dipole_operator(atom)
        for q in (-1, 0, 1):
            # total decay rate 2 gamma out of each excited sublevel
            lmat = lmat + lindblad_dissipator(d.spherical[q], 2.0 * params.gamma)
    return Superoperator(lmat.toarray())


@lru_cache(maxsize=None)
def coupling_terms():
    """Sparse building blocks of the dipole-dipole Liouvillian.

    Returns ``(terms_a, terms_b)``; each is a list of
    ``(absorber, emitter, i, j, superop)``. With the transverse projector
    ``P`` the blocks are ``A = sum P_ij superop`` over ``terms_a`` and likewise
    for ``B``. Under the laser gauge a term picks up the phase
    ``exp(i (phi_emitter - phi_absorber))``.
    """
    cart = {a: build_dipole_operator(a).cartesian for a in (1, 2)}
    terms_a, terms_b = [], []
    for alpha, beta in ((1, 2), (2, 1)):
        for i, j in product(range(3), repeat=2):
            x = cart[alpha][i].conj().T  # D_alpha^+ component i
            y = cart[beta][j]            # D_beta component j
            # A rho = D_beta rho D_alpha^+ - rho D_alpha^+ D_beta
            terms_a.append((alpha, beta, i, j, sprepost(y, x) - spost(x @ y)))
            # B rho = D_alpha rho D_beta^+ - D_alpha D_beta^+ rho
            u = cart[alpha][j]
            v = cart[beta][i].conj().T
            terms_b.append((beta, alpha, i, j, sprepost(u, v) - spre(u @ v)))
    return terms_a, terms_b


def build_coupling_blocks(config: Configuration, gamma: float = 1.0):
    """Dipole-dipole Liouvillian split as ``g * A + conj(g) * B``.

    ``A`` collects the ``D^+ . T . [Q, D]`` structure, ``B`` the
    ``[D^+, Q] . T^* . D`` one, both mapped to the density-matrix picture,
    with ``T = gamma * g * (1 - n n)``.
    """
    proj = config.projector
    terms_a, terms_b = coupling_terms()
    a = sum(gamma * proj[i, j] * op for _, _, i, j, op in terms_a)
    b = sum(gamma * proj[i, j] * op for _, _, i, j, op in terms_b)
    return Superoperator(a.toarray()), Superoperator(b.toarray())


def build_full_liouvillian(params: DriveParams, config: Configuration,
                           g: complex | None = None) -> Superoperator:
    """``L0 + g A + conj(g) B``; ``g`` defaults to the physical coupling of ``config``."""
    g = config.g if g is None else g
    l0 = build_single_atom_liouvillian(params, config)
    a, b = build_coupling_blocks(config, params.gamma)
    return l0 + g * a + np.conj(g) * b
