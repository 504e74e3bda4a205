"""Momentum-space Hamiltonians.

Parent model: a single p-wave chain with Bogoliubov-de Gennes Bloch matrix

    h(k) = -(2 t cos k + mu) s_z + 2 Delta sin k s_y .

Child models: the 4x4 tensor product of two parent factors, where the second
factor enters with the opposite sign on its s_z part,

    H(k) = [-(2 t1 cos ka + mu1) t_z + 2 D1 sin ka t_y]
           (x) [+(2 t2 cos kb + mu2) s_z + 2 D2 sin kb s_y] .

For the 1D child both factors see the same momentum (ka = kb = k); for the
2D child ka = kx and kb = ky.
"""

import numpy as np
from dataclasses import dataclass

from .errors import SingularConfigError

PARALLEL = "parallel"
PERPENDICULAR = "perpendicular"

S0 = np.eye(2, dtype=complex)
SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

PAULI = {"0": S0, "x": SX, "y": SY, "z": SZ}


def reduce_momentum(k):
    """Fold momenta into [-pi, pi)."""
    return (np.asarray(k, dtype=float) + np.pi) % (2.0 * np.pi) - np.pi


@dataclass(frozen=True)
class ParentParams:
    """Hopping t, pairing delta and chemical potential mu of one chain."""

    t: float
    delta: float
    mu: float

    def __post_init__(self):
        for name in ("t", "delta", "mu"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"parent parameter {name} must be finite, got {v!r}")

    def is_topological(self, tol=1e-12):
        return abs(self.mu) < 2.0 * abs(self.t) - tol

    def is_critical(self, tol=1e-12):
        return abs(abs(self.mu) - 2.0 * abs(self.t)) <= tol


@dataclass(frozen=True)
class ChildSpec:
    """Two parent parameter sets plus the way their momenta are combined."""

    p1: ParentParams
    p2: ParentParams
    orientation: str

    def __post_init__(self):
        if self.orientation not in (PARALLEL, PERPENDICULAR):
            raise ValueError(
                f"orientation must be {PARALLEL!r} or {PERPENDICULAR!r}, "
                f"got {self.orientation!r}"
            )


def _split_child_momentum(spec, k):
    """Return (ka, kb) folded into [-pi, pi) for either orientation."""
    if spec.orientation == PARALLEL:
        ka = reduce_momentum(k)
        return ka, ka
    k = np.asarray(k, dtype=float)
    if k.shape[-1] != 2:
        raise ValueError("perpendicular child needs momenta (kx, ky)")
    return reduce_momentum(k[..., 0]), reduce_momentum(k[..., 1])


def _mr(p, k):
    """The two scalar functions entering a factor: M = 2t cos k + mu, R = 2 Delta sin k."""
    return 2.0 * p.t * np.cos(k) + p.mu, 2.0 * p.delta * np.sin(k)


def parent_bloch(p, k):
    """2x2 Bloch matrix of the parent chain; broadcasts over an array of k."""
    k = reduce_momentum(k)
    m, r = _mr(p, k)
    m = np.asarray(m)[..., None, None]
    r = np.asarray(r)[..., None, None]
    return -m * SZ + r * SY


def _factor_matrices(spec, k):
    """Both 2x2 factors of the child at momentum k (stacked over k)."""
    ka, kb = _split_child_momentum(spec, k)
    m1, r1 = _mr(spec.p1, ka)
    m2, r2 = _mr(spec.p2, kb)
    f1 = -np.asarray(m1)[..., None, None] * SZ + np.asarray(r1)[..., None, None] * SY
    f2 = +np.asarray(m2)[..., None, None] * SZ + np.asarray(r2)[..., None, None] * SY
    return f1, f2


def child_bloch(spec, k):
    """4x4 child Bloch matrix, basis index = 2*(factor-1 index) + factor-2 index.

    For the parallel child k is a scalar (or array), for the perpendicular
    child the last axis of k holds (kx, ky).
    """
    f1, f2 = _factor_matrices(spec, k)
    return np.einsum("...ab,...cd->...acbd", f1, f2).reshape(f1.shape[:-2] + (4, 4))


def dispersion_parallel(spec, k):
    """Closed-form bands of the 1D child: a doubly degenerate +/- pair.

    E(k) = sqrt((2 t1 cos k + mu1)^2 + (2 D1 sin k)^2)
         * sqrt((2 t2 cos k + mu2)^2 + (2 D2 sin k)^2)

    Returns (E_plus, E_minus); each value appears twice in the 4x4 spectrum.
    """
    if spec.orientation != PARALLEL:
        raise ValueError("dispersion_parallel is defined for the parallel child only")
    k = reduce_momentum(k)
    m1, r1 = _mr(spec.p1, k)
    m2, r2 = _mr(spec.p2, k)
    e = np.sqrt(m1 * m1 + r1 * r1) * np.sqrt(m2 * m2 + r2 * r2)
    return e, -e


def gap_closures(spec, tol=1e-9):
    """List the parameter conditions under which the child gap closes.

    Checks, for each factor i: mu_i = -2 t_i (closure at k = 0),
    mu_i = +2 t_i (closure at k = pi), and delta_i = 0 with |mu_i| <= 2|t_i|
    (closure at cos k = -mu_i / (2 t_i)).  Returns a list of dicts with the
    factor index, a condition label and the closing momentum.
    """
    out = []
    for idx, p in ((1, spec.p1), (2, spec.p2)):
        if abs(p.mu + 2.0 * p.t) < tol:
            out.append({"factor": idx, "condition": "mu=-2t", "k": 0.0})
        if abs(p.mu - 2.0 * p.t) < tol:
            out.append({"factor": idx, "condition": "mu=+2t", "k": np.pi})
        if abs(p.delta) < tol:
            if abs(p.t) < tol:
                if abs(p.mu) < tol:
                    # factor vanishes identically; flat zero band
                    out.append({"factor": idx, "condition": "delta=0", "k": 0.0})
            elif abs(p.mu) <= 2.0 * abs(p.t) + tol:
                kc = float(np.arccos(np.clip(-p.mu / (2.0 * p.t), -1.0, 1.0)))
                out.append({"factor": idx, "condition": "delta=0", "k": kc})
    return out


# --- symmetries ------------------------------------------------------------

_C1 = np.kron(S0, SX)   # chiral op of factor 2 slot
_C2 = np.kron(SX, S0)   # chiral op of factor 1 slot
_U = np.kron(SX, SX)    # unitary symmetry, [U, H] = 0


@dataclass(frozen=True)
class SymmetryReport:
    """Max operator-norm residual of each symmetry relation over a k-grid."""

    residuals: dict
    tol: float = 1e-12

    @property
    def ok(self):
        return {name: r < self.tol for name, r in self.residuals.items()}

    def all_ok(self):
        return all(self.ok.values())


def _opnorm(a):
    return np.linalg.norm(a, ord=2, axis=(-2, -1)).max()


def symmetry_check(spec, kgrid):
    """Residuals of the six symmetry relations of the child on a k-grid.

    T  = K           : H(k)* = H(-k)
    P1 = (1 x s_x) K : P1 H(k)* P1 = -H(-k)
    C1 = 1 x s_x     : C1 H(k) C1 = -H(k)
    P2 = (t_x x 1) K : P2 H(k)* P2 = -H(-k)
    C2 = t_x x 1     : C2 H(k) C2 = -H(k)
    U  = t_x x s_x   : [U, H(k)] = 0
    """
    kgrid = np.asarray(kgrid, dtype=float)
    h = child_bloch(spec, kgrid)
    hm = child_bloch(spec, -kgrid)
    hc = h.conj()
    res = {
        "T": _opnorm(hc - hm),
        "P1": _opnorm(_C1 @ hc @ _C1 + hm),
        "C1": _opnorm(_C1 @ h @ _C1 + h),
        "P2": _opnorm(_C2 @ hc @ _C2 + hm),
        "C2": _opnorm(_C2 @ h @ _C2 + h),
        "U": _opnorm(_U @ h - h @ _U),
    }
    return SymmetryReport(residuals=res)


# --- two-band components and block diagonalization -------------------------


@dataclass(frozen=True)
class DVector:
    """(d_y, d_z) of a chiral two-band block d_y s_y + d_z s_z."""

    dy: float
    dz: float


def component_dvector(spec, k, which):
    """(d_y, d_z) arrays of component 1 or 2; vectorized over momenta."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    t1, d1, u1 = spec.p1.t, spec.p1.delta, spec.p1.mu
    t2, d2, u2 = spec.p2.t, spec.p2.delta, spec.p2.mu
    if spec.orientation == PARALLEL:
        k = reduce_momentum(k)
        if which == 1:
            dz = -(2.0 * (u1 * t2 + u2 * t1) * np.cos(k)
                   + 2.0 * (t1 * t2 + d1 * d2) * np.cos(2.0 * k)
                   + u1 * u2 + 2.0 * t1 * t2 - 2.0 * d1 * d2)
            dy = (2.0 * (u2 * d1 + u1 * d2) * np.sin(k)
                  + 2.0 * (t2 * d1 + t1 * d2) * np.sin(2.0 * k))
        else:
            dz = -(2.0 * (u1 * t2 + u2 * t1) * np.cos(k)
                   + 2.0 * (t1 * t2 - d1 * d2) * np.cos(2.0 * k)
                   + u1 * u2 + 2.0 * t1 * t2 + 2.0 * d1 * d2)
            dy = (2.0 * (u2 * d1 - u1 * d2) * np.sin(k)
                  + 2.0 * (t2 * d1 - t1 * d2) * np.sin(2.0 * k))
        return dy, dz
    kx, ky = _split_child_momentum(spec, k)
    if which == 1:
        dz = -(2.0 * u2 * t1 * np.cos(kx) + 2.0 * u1 * t2 * np.cos(ky)
               + 2.0 * (t1 * t2 + d1 * d2) * np.cos(kx + ky)
               + 2.0 * (t1 * t2 - d1 * d2) * np.cos(kx - ky)
               + u1 * u2)
        dy = (2.0 * u2 * d1 * np.sin(kx) + 2.0 * u1 * d2 * np.sin(ky)
              + 2.0 * (t2 * d1 + t1 * d2) * np.sin(kx + ky)
              + 2.0 * (t2 * d1 - t1 * d2) * np.sin(kx - ky))
    else:
        dz = -(2.0 * u2 * t1 * np.cos(kx) + 2.0 * u1 * t2 * np.cos(ky)
               + 2.0 * (t1 * t2 - d1 * d2) * np.cos(kx + ky)
               + 2.0 * (t1 * t2 + d1 * d2) * np.cos(kx - ky)
               + u1 * u2)
        dy = (2.0 * u2 * d1 * np.sin(kx) - 2.0 * u1 * d2 * np.sin(ky)
              + 2.0 * (t2 * d1 - t1 * d2) * np.sin(kx + ky)
              + 2.0 * (t2 * d1 + t1 * d2) * np.sin(kx - ky))
    return dy, dz


def component_bloch(spec, k, which):
    """One 2x2 component block, returned as (DVector, matrix)."""
    dy, dz = component_dvector(spec, k, which)
    dy = np.asarray(dy)[..., None, None]
    dz = np.asarray(dz)[..., None, None]
    mat = dy * SY + dz * SZ
    if mat.ndim == 2:
        return DVector(float(dy.ravel()[0]), float(dz.ravel()[0])), mat
    return (dy[..., 0, 0], dz[..., 0, 0]), mat


def _bell_basis():
    """Columns: the fixed basis in which the child splits into its components.

    Ordering {(|00>-|11>)/sqrt2, -(|01>-|10>)/sqrt2, (|00>+|11>)/sqrt2,
    (|01>+|10>)/sqrt2}; the sign on the second column makes the first block
    match the displayed component-1 form coefficient by coefficient.
    """
    s = 1.0 / np.sqrt(2.0)
    phi_m = np.array([1.0, 0.0, 0.0, -1.0]) * s
    psi_m = np.array([0.0, 1.0, -1.0, 0.0]) * s
    phi_p = np.array([1.0, 0.0, 0.0, 1.0]) * s
    psi_p = np.array([0.0, 1.0, 1.0, 0.0]) * s
    return np.stack([phi_m, -psi_m, phi_p, psi_p], axis=1).astype(complex)


BLOCK_BASIS = _bell_basis()


def block_diagonalize(spec, k):
    """Rotate the child into the fixed Bell-type basis and split into blocks.

    Returns (block1, block2, basis); block1 acts on the subspace built from
    the odd combinations and reproduces component 1, block2 reproduces
    component 2.  The off-diagonal 2x2 corners vanish identically because
    the child commutes with t_x s_x.
    """
    h = child_bloch(spec, k)
    ht = BLOCK_BASIS.conj().T @ h @ BLOCK_BASIS
    off = max(_opnorm(ht[..., :2, 2:]), _opnorm(ht[..., 2:, :2]))
    scale = max(1.0, _opnorm(h))
    if off > 1e-9 * scale:
        raise SingularConfigError(
            f"block structure violated: off-block norm {off:.3e}"
        )
    return ht[..., :2, :2], ht[..., 2:, 2:], BLOCK_BASIS.copy()


# --- small-momentum expansions ---------------------------------------------


@dataclass(frozen=True)
class DiracRecord:
    """Low-energy data of the parallel child near k = 0.

    m1, m2 are the factor masses 2 t_i + mu_i, mass the combined t1 m2 + t2 m1.
    v1 (v2) is the |slope| of the linear cone when only m1 (m2) vanishes,
    quad the coefficient of the k^2 dispersion when both vanish.
    """

    m1: float
    m2: float
    mass: float
    v1: float
    v2: float
    quad: float


def dirac_expansion_parallel(spec):
    """Masses and velocities of the parallel child at the k = 0 touching."""
    if spec.orientation != PARALLEL:
        raise ValueError("dirac_expansion_parallel needs a parallel child")
    p1, p2 = spec.p1, spec.p2
    m1 = 2.0 * p1.t + p1.mu
    m2 = 2.0 * p2.t + p2.mu
    return DiracRecord(
        m1=m1,
        m2=m2,
        mass=p1.t * m2 + p2.t * m1,
        v1=abs(2.0 * p1.delta * m2),
        v2=abs(2.0 * p2.delta * m1),
        quad=abs(4.0 * p1.delta * p2.delta),
    )


@dataclass(frozen=True)
class VelocityRecord:
    velocity: tuple          # gradient of the positive low-energy branch
    closed_form: tuple       # 4 D1 D2 (ky, kx), exact when m1 = m2 = 0
    at_critical: bool        # both masses vanish
    one_sided: bool          # a factor vanished; derivative taken one-sided


def group_velocity_perp(spec, kx, ky, mass_tol=1e-12):
    """Group velocity of the 2D child's low-energy branch near (0, 0).

    The branch is E(kx, ky) = sqrt(4 D1^2 kx^2 + m1^2) sqrt(4 D2^2 ky^2 + m2^2);
    at m1 = m2 = 0 its gradient is +/- 4 D1 D2 (ky, kx), a velocity field that
    swirls the opposite way to the momentum.
    """
    if spec.orientation != PERPENDICULAR:
        raise ValueError("group_velocity_perp needs a perpendicular child")
    d1, d2 = spec.p1.delta, spec.p2.delta
    m1 = 2.0 * spec.p1.t + spec.p1.mu
    m2 = 2.0 * spec.p2.t + spec.p2.mu
    f1 = np.sqrt(4.0 * d1 * d1 * kx * kx + m1 * m1)
    f2 = np.sqrt(4.0 * d2 * d2 * ky * ky + m2 * m2)
    one_sided = False
    if f1 < mass_tol or f2 < mass_tol:
        # kink of |.| at the touching point: report the k -> 0+ limit
        one_sided = True
        vx = 2.0 * abs(d1) * f2 if f1 < mass_tol else 0.0
        vy = 2.0 * abs(d2) * f1 if f2 < mass_tol else 0.0
    else:
        vx = 4.0 * d1 * d1 * kx / f1 * f2
        vy = f1 * 4.0 * d2 * d2 * ky / f2
    at_critical = abs(m1) < mass_tol and abs(m2) < mass_tol
    return VelocityRecord(
        velocity=(float(vx), float(vy)),
        closed_form=(4.0 * d1 * d2 * ky, 4.0 * d1 * d2 * kx),
        at_critical=at_critical,
        one_sided=one_sided,
    )
