"""Concrete systems: Lorenz, Josephson-junction circuits, and synthetic
test fields, all with analytic Jacobians."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .fields import VectorField


@dataclass(frozen=True)
class SystemSpec:
    name: str
    params: dict
    dim: int


def lorenz(sigma: float = 10.0, rho: float = 28.0,
           beta: float = 8.0 / 3.0) -> VectorField:
    """g1 = sigma(y-x), g2 = rho x - y - xz, g3 = -beta z + xy."""
    if sigma <= 0 or rho <= 0 or beta <= 0:
        raise ValueError("lorenz parameters must be positive")

    def func(p):
        x, y, z = p
        return np.array([sigma * (y - x), rho * x - y - x * z,
                         -beta * z + x * y])

    def jac(p):
        x, y, z = p
        return np.array([[-sigma, sigma, 0.0],
                         [rho - z, -1.0, -x],
                         [y, x, -beta]])

    return VectorField(dim=3, func=func, jac=jac, domain_radius=100.0,
                       name="lorenz")


def jj_circuit(i: float = 0.0, r: float = 1.0, beta_c: float = 1.0,
               beta_L: float = 1.0) -> VectorField:
    """Josephson junction circuit in the variable order (y, delta, zeta):
    g1 = y, g2 = (-r y + i - sin(delta) - zeta)/beta_c,
    g3 = (-zeta + y)/beta_L."""
    if beta_c <= 0 or beta_L <= 0:
        raise ValueError("beta_c and beta_L must be positive")

    def func(p):
        y, delta, zeta = p
        return np.array([y,
                         (-r * y + i - np.sin(delta) - zeta) / beta_c,
                         (-zeta + y) / beta_L])

    def jac(p):
        _, delta, _ = p
        return np.array([[1.0, 0.0, 0.0],
                         [-r / beta_c, -np.cos(delta) / beta_c,
                          -1.0 / beta_c],
                         [1.0 / beta_L, 0.0, -1.0 / beta_L]])

    return VectorField(dim=3, func=func, jac=jac, domain_radius=100.0,
                       name="jj_circuit")


def jj_circuit_linear(i: float = 0.0, r: float = 1.0, beta_c: float = 1.0,
                      beta_L: float = 1.0) -> VectorField:
    """Small-angle circuit: sin(delta) replaced by delta; constant Jacobian."""
    if beta_c <= 0 or beta_L <= 0:
        raise ValueError("beta_c and beta_L must be positive")
    J = np.array([[1.0, 0.0, 0.0],
                  [-r / beta_c, -1.0 / beta_c, -1.0 / beta_c],
                  [1.0 / beta_L, 0.0, -1.0 / beta_L]])
    b = np.array([0.0, i / beta_c, 0.0])

    return VectorField(dim=3, func=lambda p: J @ p + b, jac=lambda p: J,
                       domain_radius=100.0, name="jj_circuit_linear")


def quadratic(Q) -> VectorField:
    """Linear field g(x) = Q x with exact Jacobian Q."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError("Q must be square")
    return VectorField(dim=Q.shape[0], func=lambda x: Q @ x,
                       jac=lambda x: Q, domain_radius=100.0,
                       name="quadratic")


def rotation() -> VectorField:
    """Planar rotation g = (-y, x): fully antiexact, potential 0."""
    vf = quadratic(np.array([[0.0, -1.0], [1.0, 0.0]]))
    return VectorField(dim=2, func=vf.func, jac=vf.jac,
                       domain_radius=100.0, name="rotation")


def double_well():
    """1-d field g = -dV/dx for V = x^4/4 - x^2/2; returns (field, V)."""

    def func(x):
        return np.array([x[0] - x[0] ** 3])

    def jac(x):
        return np.array([[1.0 - 3.0 * x[0] ** 2]])

    def V(x):
        x0 = np.asarray(x, dtype=float).reshape(-1)[0]
        return 0.25 * x0 ** 4 - 0.5 * x0 ** 2

    return VectorField(dim=1, func=func, jac=jac, domain_radius=100.0,
                       name="double_well"), V


def ou(theta: float = 1.0):
    """1-d linear relaxation g = -theta x; returns (field, V) with
    V = theta x^2 / 2 (the drift is already the descent flow)."""
    if theta <= 0:
        raise ValueError("theta must be positive")

    field = VectorField(dim=1, func=lambda x: -theta * x,
                        jac=lambda x: np.array([[-theta]]),
                        domain_radius=100.0, name="ou")

    def V(x):
        x0 = np.asarray(x, dtype=float).reshape(-1)[0]
        return 0.5 * theta * x0 ** 2

    return field, V


def jja_interface(phi: Optional[Callable] = None,
                  omega_matrix=None, M: int = 0, N: int = 0) -> VectorField:
    """Two-dimensional Josephson-array field a_{ik} = 1/2 sum_j D_ij w_jk.

    The phase functions Phi_k and the auxiliary matrix come from external
    reference data; without both, the constructor refuses.
    """
    if phi is None or omega_matrix is None:
        raise ValueError(
            "external reference data required: jja_interface needs the "
            "phase functions Phi_k and the auxiliary omega matrix")
    omega_matrix = np.asarray(omega_matrix, dtype=float)
    dim = omega_matrix.shape[0]
    if omega_matrix.shape != (dim, dim):
        raise ValueError("omega matrix must be square")

    def func(y):
        vals = np.asarray(phi(y), dtype=float)
        if vals.shape != (dim,):
            raise ValueError(
                f"Phi returned shape {vals.shape}, expected ({dim},)")
        return 0.5 * omega_matrix @ vals

    return VectorField(dim=dim, func=func, jac=None, domain_radius=100.0,
                       name=f"jja({M},{N})")


def _build_quadratic(params, dim=None):
    idx = {}
    for key, val in params.items():
        parts = key.split("_")
        if len(parts) != 3 or parts[0] != "q":
            raise ValueError(f"unknown parameter {key!r} for quadratic "
                             "(expected q_<row>_<col>)")
        idx[(int(parts[1]), int(parts[2]))] = float(val)
    if not idx:
        raise ValueError("quadratic requires at least one q_i_j parameter")
    n = 1 + max(max(i, j) for i, j in idx)
    Q = np.zeros((n, n))
    for (i, j), v in idx.items():
        Q[i, j] = v
    return quadratic(Q)


# name -> (builder taking a params dict, default params, analytic potential
# builder or None); the CLI resolves systems through this table
REGISTRY = {
    "lorenz": {
        "build": lambda p: lorenz(**p),
        "defaults": {"sigma": 10.0, "rho": 28.0, "beta": 8.0 / 3.0},
        "potential": None,
        "dim": 3,
    },
    "jj_circuit": {
        "build": lambda p: jj_circuit(**p),
        "defaults": {"i": 0.0, "r": 1.0, "beta_c": 1.0, "beta_L": 1.0},
        "potential": None,
        "dim": 3,
    },
    "jj_circuit_linear": {
        "build": lambda p: jj_circuit_linear(**p),
        "defaults": {"i": 0.0, "r": 1.0, "beta_c": 1.0, "beta_L": 1.0},
        "potential": None,
        "dim": 3,
    },
    "quadratic": {
        "build": _build_quadratic,
        "defaults": {"q_0_0": -1.0},
        "potential": None,
        "dim": None,
    },
    "rotation": {
        "build": lambda p: rotation(),
        "defaults": {},
        "potential": None,
        "dim": 2,
    },
    "double_well": {
        "build": lambda p: double_well()[0],
        "defaults": {},
        "potential": lambda p: double_well()[1],
        "dim": 1,
    },
    "ou": {
        "build": lambda p: ou(**p)[0],
        "defaults": {"theta": 1.0},
        "potential": lambda p: ou(**p)[1],
        "dim": 1,
    },
}


def build_system(spec: SystemSpec) -> VectorField:
    """Resolve a named system with defaults; unknown names or parameter
    keys are rejected."""
    if spec.name not in REGISTRY:
        raise ValueError(f"unknown system {spec.name!r}; "
                         f"known: {sorted(REGISTRY)}")
    entry = REGISTRY[spec.name]
    if spec.name == "quadratic":
        params = dict(spec.params) if spec.params else dict(entry["defaults"])
        return entry["build"](params)
    unknown = set(spec.params) - set(entry["defaults"])
    if unknown:
        raise ValueError(f"unknown parameters {sorted(unknown)} for "
                         f"system {spec.name!r}")
    params = {**entry["defaults"], **spec.params}
    return entry["build"](params)


def analytic_potential(spec: SystemSpec):
    """Known closed-form potential for a system, or None."""
    entry = REGISTRY.get(spec.name)
    if entry is None or entry["potential"] is None:
        return None
    if spec.name == "ou":
        params = {**entry["defaults"], **spec.params}
        return entry["potential"](params)
    return entry["potential"](spec.params)
