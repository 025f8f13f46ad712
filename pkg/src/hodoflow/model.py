"""Problem description: force specification and initial-data families.

A problem is the PDE

    u_t + (u . grad) u = g + A u        on R^n,  u(0, x) = u0(x)

so a ForceSpec is the pair (A, g) and an InitialData object is an invertible
velocity profile given through its inverse map phi:

    x = phi(M)   <=>   M = u0(x)

Each family provides u0, phi, the Jacobian d(phi)/dM, and the open box in
M-space on which the inverse map is valid.  The Jacobian of u0 itself, where
needed, is the inverse of d(phi)/dM — exact, no finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matops
from .errors import ConfigError, DomainError, NotInvertibleError


@dataclass
class ForceSpec:
    """Right-hand side g + A u of the momentum equation."""

    A: np.ndarray
    g: np.ndarray
    rank_tol: float = 1e-10

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.g = np.atleast_1d(np.asarray(self.g, dtype=float))
        if self.A.shape[0] != self.A.shape[1]:
            raise ConfigError(f"A must be square, got {self.A.shape}")
        if self.g.shape != (self.A.shape[0],):
            raise ConfigError(f"g has shape {self.g.shape}, expected ({self.A.shape[0]},)")

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def rank(self):
        return matops.rank(self.A, self.rank_tol)

    @property
    def is_degenerate(self):
        return self.rank < self.n


def coriolis2d_spec(omega, g=None):
    """Planar rotation forcing A = omega * [[0, 1], [-1, 0]]."""
    A = float(omega) * np.array([[0.0, 1.0], [-1.0, 0.0]])
    return ForceSpec(A, np.zeros(2) if g is None else g)


def coriolis3d_spec(omega, g_mag=0.0):
    """Rotating frame in 3D: A u = -2 Omega x u (up to the factor absorbed in omega).

    omega may be a scalar (rotation about the z-axis) or a 3-vector; g_mag is the
    magnitude of a downward (-z) uniform acceleration.
    """
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if w.size == 1:
        w = np.array([0.0, 0.0, float(w[0])])
    if w.shape != (3,):
        raise ConfigError("omega must be a scalar or a 3-vector")
    # A = -[w]_x : skew-symmetric with kernel along w, so that Au = u x w
    A = np.array(
        [
            [0.0, w[2], -w[1]],
            [-w[2], 0.0, w[0]],
            [w[1], -w[0], 0.0],
        ]
    )
    return ForceSpec(A, np.array([0.0, 0.0, -float(g_mag)]))


def diag_spec(values, g=None):
    values = np.atleast_1d(np.asarray(values, dtype=float))
    return ForceSpec(np.diag(values), np.zeros(values.size) if g is None else g)


class InitialData:
    """Base class: an invertible initial velocity profile u0 with inverse phi."""

    dim = 1
    name = "base"

    def u0(self, x):
        raise NotImplementedError

    def phi(self, M):
        raise NotImplementedError

    def phi_jacobian(self, M):
        raise NotImplementedError

    def in_domain(self, M):
        """True when M lies strictly inside the validity box of phi."""
        M = np.atleast_1d(M)
        box = self.domain_box()
        return bool(np.all(M > box[:, 0]) and np.all(M < box[:, 1]))

    def domain_box(self):
        """Open box (n, 2) in M-space on which phi is defined."""
        raise NotImplementedError

    def sample_box(self):
        """Physical-space box (n, 2) from which test/compare points are drawn."""
        raise NotImplementedError

    def clip_to_domain(self, M, margin=1e-6):
        box = self.domain_box()
        width = box[:, 1] - box[:, 0]
        lo = box[:, 0] + margin * np.minimum(width, 1.0)
        hi = box[:, 1] - margin * np.minimum(width, 1.0)
        return np.clip(np.atleast_1d(M), lo, hi)

    def m_grids(self, num=201, inset=5e-3):
        """Per-axis sample grids strictly inside the domain box."""
        box = self.domain_box()
        grids = []
        for lo, hi in box:
            lo_f = lo if np.isfinite(lo) else -3.0
            hi_f = hi if np.isfinite(hi) else 3.0
            pad = inset * (hi_f - lo_f)
            grids.append(np.linspace(lo_f + pad, hi_f - pad, num))
        return grids

    def params(self):
        return {}

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({inner})"


class Tanh1D(InitialData):
    """Decreasing kink profile u0(x) = mu * (1 - tanh(kappa x)), values in (0, 2 mu)."""

    dim = 1
    name = "tanh1d"

    def __init__(self, mu=1.0, kappa=1.0):
        if mu <= 0 or kappa <= 0:
            raise ConfigError("tanh profile needs mu > 0 and kappa > 0")
        self.mu = float(mu)
        self.kappa = float(kappa)

    def u0(self, x):
        x = np.atleast_1d(x)
        return self.mu * (1.0 - np.tanh(self.kappa * x[0])) * np.ones(1)

    def phi(self, M):
        M = np.atleast_1d(M)
        return np.array([np.arctanh(1.0 - M[0] / self.mu) / self.kappa])

    def phi_jacobian(self, M):
        M = np.atleast_1d(M)
        return np.array([[-self.mu / (self.kappa * M[0] * (2.0 * self.mu - M[0]))]])

    def domain_box(self):
        return np.array([[0.0, 2.0 * self.mu]])

    def sample_box(self):
        return np.array([[-2.0 / self.kappa, 2.0 / self.kappa]])

    def params(self):
        return {"mu": self.mu, "kappa": self.kappa}


class Gauss1D(InitialData):
    """One flank of a Gaussian bump, u0(x) = eta * exp(-kappa^2 x^2) on branch*x >= 0.

    branch = +1 takes the decreasing right flank, branch = -1 the increasing left
    flank; the inverse map is phi(M) = branch * sqrt(log(eta/M)) / kappa on (0, eta).
    """

    dim = 1
    name = "gauss1d"

    def __init__(self, eta=1.0, kappa=1.0, branch=+1):
        if eta <= 0 or kappa <= 0:
            raise ConfigError("gaussian profile needs eta > 0 and kappa > 0")
        if branch not in (+1, -1):
            raise ConfigError("branch must be +1 or -1")
        self.eta = float(eta)
        self.kappa = float(kappa)
        self.branch = int(branch)

    def u0(self, x):
        x = np.atleast_1d(x)
        if self.branch * x[0] < 0:
            raise DomainError(
                f"x={x[0]!r} is on the wrong flank for branch={self.branch:+d}"
            )
        return np.array([self.eta * np.exp(-((self.kappa * x[0]) ** 2))])

    def phi(self, M):
        M = np.atleast_1d(M)
        return np.array([self.branch * np.sqrt(np.log(self.eta / M[0])) / self.kappa])

    def phi_jacobian(self, M):
        M = np.atleast_1d(M)
        root = np.sqrt(np.log(self.eta / M[0]))
        return np.array([[-self.branch / (2.0 * self.kappa * M[0] * root)]])

    def domain_box(self):
        return np.array([[0.0, self.eta]])

    def sample_box(self):
        lo, hi = 0.05 / self.kappa, 1.5 / self.kappa
        return np.array([[lo, hi]] if self.branch > 0 else [[-hi, -lo]])

    def params(self):
        return {"eta": self.eta, "kappa": self.kappa, "branch": self.branch}


class Tanh2D(InitialData):
    """Coupled planar kinks u0 = (-tanh(x1 + eps x2), -tanh(eps x1 + x2)), eps != 1."""

    dim = 2
    name = "tanh2d"

    def __init__(self, eps=0.5):
        eps = float(eps)
        if eps <= 0 or eps == 1.0:
            raise ConfigError("coupling eps must be positive and != 1")
        self.eps = eps

    def u0(self, x):
        x = np.atleast_1d(x)
        e = self.eps
        return np.array([-np.tanh(x[0] + e * x[1]), -np.tanh(e * x[0] + x[1])])

    def phi(self, M):
        M = np.atleast_1d(M)
        e = self.eps
        a1, a2 = np.arctanh(M[0]), np.arctanh(M[1])
        d = e * e - 1.0
        return np.array([(a1 - e * a2) / d, (a2 - e * a1) / d])

    def phi_jacobian(self, M):
        M = np.atleast_1d(M)
        e = self.eps
        d = e * e - 1.0
        s1 = 1.0 / (d * (1.0 - M[0] ** 2))
        s2 = 1.0 / (d * (1.0 - M[1] ** 2))
        return np.array([[s1, -e * s2], [-e * s1, s2]])

    def domain_box(self):
        return np.array([[-1.0, 1.0], [-1.0, 1.0]])

    def sample_box(self):
        return np.array([[-1.5, 1.5], [-1.5, 1.5]])

    def params(self):
        return {"eps": self.eps}


class Gauss2DCoriolis(InitialData):
    """Anisotropic Gaussian pair u0 = amp * (exp(-(x^2+y^2)), exp(-(x^2+2y^2))).

    On the quadrant branch (sx*x >= 0, sy*y >= 0) the profile inverts to

        phi1(M) = sx * sqrt(log(amp * M2 / M1^2))
        phi2(M) = sy * sqrt(log(M1 / M2))

    valid on {0 < M2 < M1, M1^2 < amp * M2}.
    """

    dim = 2
    name = "gauss2d_coriolis"

    def __init__(self, amplitude=1.0, sx=+1, sy=+1):
        if amplitude <= 0:
            raise ConfigError("amplitude must be positive")
        if sx not in (+1, -1) or sy not in (+1, -1):
            raise ConfigError("branch signs must be +1 or -1")
        self.amplitude = float(amplitude)
        self.sx = int(sx)
        self.sy = int(sy)

    def u0(self, x):
        x = np.atleast_1d(x)
        if self.sx * x[0] < 0 or self.sy * x[1] < 0:
            raise DomainError(f"x={tuple(x)} outside the ({self.sx:+d},{self.sy:+d}) quadrant")
        a = self.amplitude
        return np.array(
            [
                a * np.exp(-(x[0] ** 2 + x[1] ** 2)),
                a * np.exp(-(x[0] ** 2 + 2.0 * x[1] ** 2)),
            ]
        )

    def in_domain(self, M):
        M = np.atleast_1d(M)
        return bool(
            M[0] > 0.0
            and M[1] > 0.0
            and M[1] < M[0]
            and M[0] ** 2 < self.amplitude * M[1]
        )

    def phi(self, M):
        M = np.atleast_1d(M)
        l1 = np.log(self.amplitude * M[1] / M[0] ** 2)
        l2 = np.log(M[0] / M[1])
        return np.array([self.sx * np.sqrt(l1), self.sy * np.sqrt(l2)])

    def phi_jacobian(self, M):
        M = np.atleast_1d(M)
        r1 = np.sqrt(np.log(self.amplitude * M[1] / M[0] ** 2))
        r2 = np.sqrt(np.log(M[0] / M[1]))
        return np.array(
            [
                [-self.sx / (M[0] * r1), self.sx / (2.0 * M[1] * r1)],
                [self.sy / (2.0 * M[0] * r2), -self.sy / (2.0 * M[1] * r2)],
            ]
        )

    def domain_box(self):
        a = self.amplitude
        return np.array([[0.0, a], [0.0, a]])

    def m_grids(self, num=201, inset=5e-3):
        # rectangle hull of the curved domain; scans must mask with in_domain
        a = self.amplitude
        return [
            np.linspace(a * inset, a * (1 - inset), num),
            np.linspace(a * inset, a * (1 - inset), num),
        ]

    def sample_box(self):
        lo, hi = 0.05, 1.2
        bx = [lo, hi] if self.sx > 0 else [-hi, -lo]
        by = [lo, hi] if self.sy > 0 else [-hi, -lo]
        return np.array([bx, by])

    def params(self):
        return {"amplitude": self.amplitude, "sx": self.sx, "sy": self.sy}


class LinearR(InitialData):
    """Linear profile through an invertible matrix R: phi(M) = R M, u0(x) = R^{-1} x."""

    dim = None  # set per instance
    name = "linear"

    def __init__(self, R):
        R = np.atleast_2d(np.asarray(R, dtype=float))
        if R.shape[0] != R.shape[1]:
            raise ConfigError("R must be square")
        if matops.rank(R) < R.shape[0]:
            raise NotInvertibleError("R must be invertible for a linear profile")
        self.R = R
        self.Rinv = np.linalg.inv(R)
        self.dim = R.shape[0]

    def u0(self, x):
        return self.Rinv @ np.atleast_1d(x)

    def phi(self, M):
        return self.R @ np.atleast_1d(M)

    def phi_jacobian(self, M):
        return self.R.copy()

    def domain_box(self):
        return np.array([[-np.inf, np.inf]] * self.dim)

    def in_domain(self, M):
        return True

    def m_grids(self, num=201, inset=5e-3):
        return [np.linspace(-3.0, 3.0, num) for _ in range(self.dim)]

    def sample_box(self):
        return np.array([[-1.0, 1.0]] * self.dim)

    def params(self):
        return {"R": self.R.tolist()}


class Constant(InitialData):
    """Spatially uniform initial velocity; has no inverse map (rigid transport)."""

    dim = None
    name = "constant"

    def __init__(self, c):
        self.c = np.atleast_1d(np.asarray(c, dtype=float))
        self.dim = self.c.size

    def u0(self, x):
        return self.c.copy()

    def phi(self, M):
        raise NotInvertibleError("constant profile is not invertible; solve in closed form")

    def phi_jacobian(self, M):
        raise NotInvertibleError("constant profile is not invertible")

    def domain_box(self):
        raise NotInvertibleError("constant profile has no M-domain")

    def in_domain(self, M):
        return False

    def sample_box(self):
        return np.array([[-1.0, 1.0]] * self.dim)

    def params(self):
        return {"c": self.c.tolist()}


class Separable(InitialData):
    """Product profile built from independent 1D components, u0_i(x) = h_i(x_i).

    The inverse map acts componentwise, so d(phi)/dM is diagonal.
    """

    dim = None
    name = "separable"

    def __init__(self, components):
        comps = list(components)
        if not comps or any(c.dim != 1 for c in comps):
            raise ConfigError("separable data needs a list of 1D components")
        self.components = comps
        self.dim = len(comps)

    def u0(self, x):
        x = np.atleast_1d(x)
        return np.array([c.u0(x[i : i + 1])[0] for i, c in enumerate(self.components)])

    def phi(self, M):
        M = np.atleast_1d(M)
        return np.array([c.phi(M[i : i + 1])[0] for i, c in enumerate(self.components)])

    def phi_jacobian(self, M):
        M = np.atleast_1d(M)
        return np.diag(
            [c.phi_jacobian(M[i : i + 1])[0, 0] for i, c in enumerate(self.components)]
        )

    def domain_box(self):
        return np.vstack([c.domain_box() for c in self.components])

    def in_domain(self, M):
        M = np.atleast_1d(M)
        return all(c.in_domain(M[i : i + 1]) for i, c in enumerate(self.components))

    def m_grids(self, num=201, inset=5e-3):
        return [c.m_grids(num, inset)[0] for c in self.components]

    def sample_box(self):
        return np.vstack([c.sample_box() for c in self.components])

    def params(self):
        return {"components": [(c.name, c.params()) for c in self.components]}


#: registry used by the CLI config loader
FAMILIES = {
    "tanh1d": Tanh1D,
    "gauss1d": Gauss1D,
    "tanh2d": Tanh2D,
    "gauss2d_coriolis": Gauss2DCoriolis,
    "linear": LinearR,
    "constant": Constant,
    "separable": Separable,
}


def make_data(family, **params):
    """Instantiate a registered initial-data family by name."""
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise ConfigError(
            f"unknown data family {family!r}; known: {sorted(FAMILIES)}"
        ) from None
    if family == "separable":
        comps = [make_data(nm, **p) for nm, p in params.pop("components")]
        return Separable(comps)
    return cls(**params)


@dataclass
class HodographProblem:
    """A force spec plus initial data plus the solver knobs."""

    spec: ForceSpec
    data: InitialData
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    grid_num: int = 201

    def __post_init__(self):
        if self.data.dim is not None and self.data.dim != self.spec.n:
            raise ConfigError(
                f"dimension mismatch: A is {self.spec.n}x{self.spec.n}, "
                f"data is {self.data.dim}D"
            )


def u0_eval(data, x):
    """Initial velocity at x (family dispatch; domain-checked)."""
    return data.u0(x)


def phi_eval(data, M):
    """Inverse profile map x = phi(M); raises NotInvertibleError for constant data."""
    return data.phi(M)


def phi_jacobian(data, M):
    """d(phi)/dM at M, analytic per family."""
    return data.phi_jacobian(M)
