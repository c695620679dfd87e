"""Generalized change of variables x = D(y) y that renders the
transformed one-form closed: constant-matrix solvers, the collocation
solver for position-dependent D, and potential extraction."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from itertools import combinations_with_replacement
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .fields import VectorField, eval_field, fd_step, jacobian
from .homotopy import OneForm, QuadratureRule, potential

NULLSPACE_RTOL = 1e-10
DET_FLOOR = 1e-10
SEARCH_DRAWS = 64
DEFAULT_TOL = 1e-8


class GradientizeError(RuntimeError):
    """Raised when a potential is requested for a non-closed transform."""


class BarrierViolation(RuntimeError):
    """D(y; theta) singular at a collocation sample."""


class ConstantVerdict(enum.Enum):
    GRADIENTIZED = "Gradientized"
    CONSISTENCY_ONLY = "ConsistencyOnlySolution"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class ConstantSolveReport:
    nullspace_basis: list
    chosen_D: Optional[np.ndarray]
    necessary_residual: float
    transformed_asymmetry: float
    consistency_residual: float
    verdict: ConstantVerdict
    # |det J - 1|: an invertible solution of D = J^T D^T forces det J = 1
    det_precondition_gap: float = np.nan
    identity_solves_necessary: bool = False


def _rel(x, scale):
    return float(x) / (1.0 + float(scale))


def _asymmetry(A: np.ndarray) -> float:
    return _rel(np.max(np.abs(A - A.T)), np.max(np.abs(A)))


def check_necessary_constant(D: np.ndarray, J: np.ndarray) -> float:
    """Max-norm of D^T D J - J^T D^T D (necessary closedness condition)."""
    D = np.asarray(D, dtype=float)
    J = np.asarray(J, dtype=float)
    n = D.shape[0]
    scale = (np.linalg.norm(D, "fro") / np.sqrt(n)) ** n
    if abs(np.linalg.det(D)) <= DET_FLOOR * max(scale, 1e-300):
        raise ValueError("D is singular")
    S = D.T @ D
    return float(np.max(np.abs(S @ J - J.T @ S)))


def _null_basis(M: np.ndarray) -> list[np.ndarray]:
    """Right-singular vectors of M with sigma <= rtol * sigma_max."""
    _, s, vt = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    null = [vt[i] for i in range(vt.shape[0])
            if i >= s.size or s[i] <= NULLSPACE_RTOL * max(smax, 1.0)]
    return null


def solve_consistency_constant(J, tol: float = DEFAULT_TOL,
                               seed: int = 0) -> ConstantSolveReport:
    """Nullspace of the linear map D -> D - J^T D^T, then an invertible
    representative found by seeded random coefficient search.

    The equation is the constant-matrix consistency relation
    D (D^T)^{-1} = J^T written as a homogeneous linear system.
    """
    J = np.asarray(J, dtype=float)
    n = J.shape[0]
    if J.shape != (n, n) or not np.all(np.isfinite(J)):
        raise ValueError("J must be a finite square matrix")
    # vec ordering (i, j) -> i*n + j; (J^T D^T)_{ij} = sum_k J[k, i] D[j, k]
    M = np.eye(n * n)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                M[i * n + j, j * n + k] -= J[k, i]
    basis = [v.reshape(n, n) for v in _null_basis(M)]
    det_gap = abs(np.linalg.det(J) - 1.0)

    identity_ok = float(np.max(np.abs(J - J.T))) \
        <= tol * (1.0 + np.max(np.abs(J)))

    chosen = None
    if basis:
        rng = np.random.default_rng(seed)
        best_det = 0.0
        for _ in range(SEARCH_DRAWS):
            c = rng.standard_normal(len(basis))
            c /= np.linalg.norm(c)
            D = sum(ci * Bi for ci, Bi in zip(c, basis))
            D /= np.linalg.norm(D, "fro") / np.sqrt(n)
            d = abs(np.linalg.det(D))
            if d > best_det:
                best_det, chosen = d, D
        if best_det <= DET_FLOOR:
            chosen = None

    if chosen is None:
        return ConstantSolveReport(
            nullspace_basis=basis, chosen_D=None,
            necessary_residual=np.inf, transformed_asymmetry=np.inf,
            consistency_residual=np.inf, verdict=ConstantVerdict.INFEASIBLE,
            det_precondition_gap=det_gap,
            identity_solves_necessary=identity_ok)

    necessary = check_necessary_constant(chosen, J)
    A = chosen @ J @ np.linalg.inv(chosen)
    asym = _asymmetry(A)
    # for a linear field the exact-part gradient is sym(A) x
    consistency = 0.5 * float(np.max(np.abs(A - A.T)))
    if _rel(necessary, np.max(np.abs(J))) <= tol and asym <= tol:
        verdict = ConstantVerdict.GRADIENTIZED
    else:
        verdict = ConstantVerdict.CONSISTENCY_ONLY
    return ConstantSolveReport(
        nullspace_basis=basis, chosen_D=chosen, necessary_residual=necessary,
        transformed_asymmetry=asym, consistency_residual=consistency,
        verdict=verdict, det_precondition_gap=det_gap,
        identity_solves_necessary=identity_ok)


def _sym_basis(n: int) -> list[np.ndarray]:
    out = []
    for i, j in combinations_with_replacement(range(n), 2):
        B = np.zeros((n, n))
        if i == j:
            B[i, i] = 1.0
        else:
            B[i, j] = B[j, i] = 1.0 / np.sqrt(2.0)
        out.append(B)
    return out


def solve_symmetrizer(J, tol: float = DEFAULT_TOL,
                      seed: int = 0) -> ConstantSolveReport:
    """Find symmetric positive-definite S with S J = J^T S, then D from
    the Cholesky factorization S = D^T D.

    S exists iff J is similar to a symmetric matrix; a defective or
    complex spectrum yields the Infeasible verdict.
    """
    J = np.asarray(J, dtype=float)
    n = J.shape[0]
    if J.shape != (n, n) or not np.all(np.isfinite(J)):
        raise ValueError("J must be a finite square matrix")
    sym_basis = _sym_basis(n)
    M = np.column_stack([(B @ J - J.T @ B).ravel() for B in sym_basis])
    coeffs = _null_basis(M)
    basis = [sum(ci * Bi for ci, Bi in zip(c, sym_basis)) for c in coeffs]

    identity_ok = float(np.max(np.abs(J - J.T))) \
        <= tol * (1.0 + np.max(np.abs(J)))
    det_gap = abs(np.linalg.det(J) - 1.0)

    best_S, best_min = None, -np.inf
    if basis:
        m = len(basis)

        def neg_min_eig(c):
            nc = np.linalg.norm(c)
            if nc < 1e-12:
                return 1.0
            S = sum(ci * Bi for ci, Bi in zip(c / nc, basis))
            return -float(np.linalg.eigvalsh(S)[0])

        rng = np.random.default_rng(seed)
        starts = [np.eye(m)[k] for k in range(m)] \
            + [-np.eye(m)[k] for k in range(m)] \
            + [rng.standard_normal(m) for _ in range(8)]
        for c0 in starts:
            res = minimize(neg_min_eig, c0, method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-14,
                                    "maxiter": 2000})
            if -res.fun > best_min:
                best_min = -res.fun
                c = res.x / np.linalg.norm(res.x)
                best_S = sum(ci * Bi for ci, Bi in zip(c, basis))

    if best_S is None or best_min <= 1e-8:
        return ConstantSolveReport(
            nullspace_basis=basis, chosen_D=None,
            necessary_residual=np.inf, transformed_asymmetry=np.inf,
            consistency_residual=np.inf, verdict=ConstantVerdict.INFEASIBLE,
            det_precondition_gap=det_gap,
            identity_solves_necessary=identity_ok)

    S = 0.5 * (best_S + best_S.T)
    S /= np.linalg.eigvalsh(S)[-1]
    D = np.linalg.cholesky(S).T  # S = D^T D with D upper triangular
    necessary = check_necessary_constant(D, J)
    A = D @ J @ np.linalg.inv(D)
    asym = _asymmetry(A)
    consistency = 0.5 * float(np.max(np.abs(A - A.T)))
    verdict = (ConstantVerdict.GRADIENTIZED
               if asym <= tol and _rel(necessary, np.max(np.abs(J))) <= tol
               else ConstantVerdict.CONSISTENCY_ONLY)
    return ConstantSolveReport(
        nullspace_basis=basis, chosen_D=D, necessary_residual=necessary,
        transformed_asymmetry=asym, consistency_residual=consistency,
        verdict=verdict, det_precondition_gap=det_gap,
        identity_solves_necessary=identity_ok)


def transform_field(field: VectorField, D) -> VectorField:
    """f(x) = D g(D^{-1} x); Jacobian D J_g(D^{-1} x) D^{-1}."""
    D = np.asarray(D, dtype=float)
    n = field.dim
    if D.shape != (n, n):
        raise ValueError("D must match the field dimension")
    Dinv = np.linalg.inv(D)  # raises LinAlgError when singular

    def func(x):
        return D @ eval_field(field, Dinv @ x)

    def jac(x):
        return D @ jacobian(field, Dinv @ x) @ Dinv

    radius = field.domain_radius / np.linalg.norm(Dinv, 2)
    return VectorField(dim=n, func=func, jac=jac, domain_radius=radius,
                       name=f"{field.name}@D" if field.name else "transformed")


@dataclass(frozen=True)
class MatrixFamily:
    """Matrix function D(y) with polynomial entries up to total degree d.

    Parameters theta are ordered entry-major: for each (i, j) the
    monomial coefficients in the order of self.monomials.
    """

    dim: int
    degree: int = 1

    @property
    def monomials(self) -> list[tuple[int, ...]]:
        mono = [tuple()]  # constant term first
        def rec(prefix, remaining, start):
            for q in range(start, self.dim):
                cand = prefix + (q,)
                mono.append(cand)
                if remaining > 1:
                    rec(cand, remaining - 1, q)
        if self.degree >= 1:
            rec(tuple(), self.degree, 0)
        return mono

    @property
    def n_params(self) -> int:
        return self.dim * self.dim * len(self.monomials)

    def identity_params(self) -> np.ndarray:
        theta = np.zeros(self.n_params)
        nm = len(self.monomials)
        for i in range(self.dim):
            theta[(i * self.dim + i) * nm] = 1.0
        return theta

    def _coeffs(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError(
                f"theta must have shape ({self.n_params},)")
        return theta.reshape(self.dim, self.dim, len(self.monomials))

    def value(self, y, theta) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        mono_vals = np.array([np.prod([y[q] for q in m]) if m else 1.0
                              for m in self.monomials])
        return self._coeffs(theta) @ mono_vals

    def grad(self, y, theta) -> np.ndarray:
        """dD[i, j, q] = d D_{ij} / d y_q."""
        y = np.asarray(y, dtype=float)
        c = self._coeffs(theta)
        mono = self.monomials
        dmono = np.zeros((len(mono), self.dim))
        for k, m in enumerate(mono):
            for pos in range(len(m)):
                rest = m[:pos] + m[pos + 1:]
                val = np.prod([y[q] for q in rest]) if rest else 1.0
                dmono[k, m[pos]] += val
        return np.einsum("ijk,kq->ijq", c, dmono)


@dataclass(frozen=True)
class GeneralSolveConfig:
    samples: np.ndarray
    max_iter: int = 200
    damping0: float = 1e-3
    target_rms: float = 1e-10
    barrier_det_floor: float = 1e-6
    barrier_weight: float = 1.0
    fd_theta_step: float = 1e-6


@dataclass(frozen=True)
class GeneralSolveReport:
    theta_final: np.ndarray
    residual_norm: float
    consistency_residual: float
    iterations: int
    converged: bool


def general_residual(field: VectorField, family: MatrixFamily, theta,
                     samples) -> np.ndarray:
    """Antisymmetrized cross-derivative residuals of the transformed form.

    Derived by the chain rule from f_i(x) = sum_j D_{ij}(y(x)) g_j(y(x))
    with x = D(y) y: with B = df/dy and M = dx/dy, the cross-derivative
    matrix is A = B M^{-1} and the residual stacks (A - A^T)_{ik}, i < k,
    per collocation sample.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n = field.dim
    out = []
    for y in samples:
        g = eval_field(field, y)
        Jg = jacobian(field, y)
        Dm = family.value(y, theta)
        dD = family.grad(y, theta)
        if abs(np.linalg.det(Dm)) <= 1e-12:
            raise BarrierViolation(f"singular D(y) at sample {y}")
        # M[i, q] = d x_i / d y_q for x = D(y) y
        M = Dm + np.einsum("ijq,j->iq", dD, y)
        if abs(np.linalg.det(M)) <= 1e-12:
            raise BarrierViolation(f"singular dx/dy at sample {y}")
        B = np.einsum("ijq,j->iq", dD, g) + Dm @ Jg
        A = B @ np.linalg.inv(M)
        out.extend(A[i, k] - A[k, i]
                   for i in range(n) for k in range(i + 1, n))
    return np.array(out)


def _barrier_terms(family: MatrixFamily, theta, samples,
                   cfg: GeneralSolveConfig) -> np.ndarray:
    vals = []
    for y in samples:
        d = abs(np.linalg.det(family.value(y, theta)))
        if d <= 1e-300:
            raise BarrierViolation(f"singular D(y) at sample {y}")
        vals.append(cfg.barrier_weight
                    * max(0.0, np.log(cfg.barrier_det_floor / d)))
    return np.array(vals)


def solve_general(field: VectorField, family: MatrixFamily,
                  cfg: GeneralSolveConfig) -> GeneralSolveReport:
    """Damped least squares (Levenberg-Marquardt with gain-ratio damping)
    on the stacked residual plus a log-barrier keeping D(y) invertible."""
    samples = np.atleast_2d(np.asarray(cfg.samples, dtype=float))
    if samples.size == 0:
        raise ValueError("cfg.samples must be nonempty")

    def full_residual(theta):
        r = general_residual(field, family, theta, samples)
        return np.concatenate([r, _barrier_terms(family, theta, samples, cfg)])

    def rms(theta):
        r = general_residual(field, family, theta, samples)
        return float(np.sqrt(np.mean(r * r)))

    theta = family.identity_params()
    r = full_residual(theta)
    lam = cfg.damping0
    nu = 2.0
    iterations = 0
    converged = rms(theta) < cfg.target_rms
    while not converged and iterations < cfg.max_iter:
        iterations += 1
        # forward-difference Jacobian in theta; problems are small
        Jr = np.empty((r.size, theta.size))
        for p in range(theta.size):
            tp = theta.copy()
            tp[p] += cfg.fd_theta_step
            try:
                Jr[:, p] = (full_residual(tp) - r) / cfg.fd_theta_step
            except BarrierViolation:
                Jr[:, p] = 0.0
        H = Jr.T @ Jr
        grad = Jr.T @ r
        if np.linalg.norm(grad, np.inf) < 1e-14:
            break
        step = np.linalg.solve(H + lam * np.diag(np.maximum(np.diag(H),
                                                            1e-12)), -grad)
        try:
            r_new = full_residual(theta + step)
        except BarrierViolation:
            lam *= nu
            nu *= 2.0
            continue
        actual = float(r @ r - r_new @ r_new)
        predicted = float(-step @ (2.0 * grad + H @ step))
        gain = actual / predicted if predicted > 0 else -1.0
        if actual > 0:
            theta = theta + step
            r = r_new
            lam *= max(1.0 / 3.0, 1.0 - (2.0 * gain - 1.0) ** 3)
            nu = 2.0
            if rms(theta) < cfg.target_rms or np.linalg.norm(step) < 1e-14:
                converged = rms(theta) < cfg.target_rms
                if converged or np.linalg.norm(step) < 1e-14:
                    break
        else:
            lam *= nu
            nu *= 2.0

    final_rms = rms(theta)
    converged = final_rms < cfg.target_rms
    tfield = transform_field_general(field, family, theta)
    try:
        consistency = consistency_check(tfield, samples[: min(8, len(samples))])
    except (BarrierViolation, RuntimeError):
        consistency = np.inf
    return GeneralSolveReport(theta_final=theta, residual_norm=final_rms,
                              consistency_residual=consistency,
                              iterations=iterations, converged=converged)


def transform_field_general(field: VectorField, family: MatrixFamily,
                            theta) -> VectorField:
    """Transformed field f(x) = D(y) g(y) with y solving x = D(y) y.

    The inverse map is computed by damped Newton iteration from y = x.
    """
    n = field.dim

    def invert(x):
        y = np.asarray(x, dtype=float).copy()
        for _ in range(50):
            Dm = family.value(y, theta)
            res = Dm @ y - x
            if np.max(np.abs(res)) < 1e-13 * (1.0 + np.max(np.abs(x))):
                return y
            M = Dm + np.einsum("ijq,j->iq", family.grad(y, theta), y)
            try:
                y = y - np.linalg.solve(M, res)
            except np.linalg.LinAlgError:
                raise BarrierViolation(f"singular dx/dy while inverting {x}")
        raise RuntimeError(f"coordinate inversion did not converge at {x}")

    def func(x):
        y = invert(x)
        return family.value(y, theta) @ eval_field(field, y)

    return VectorField(dim=n, func=func, jac=None,
                       domain_radius=field.domain_radius,
                       name="general-transformed")


def consistency_check(tfield: VectorField, samples,
                      quad: QuadratureRule | None = None) -> float:
    """Max deviation of the finite-difference gradient of the ray
    potential of the transformed field from the field itself."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    form = OneForm(tfield)
    worst = 0.0
    for x in samples:
        f = eval_field(tfield, x)
        h = fd_step(x)
        for i in range(tfield.dim):
            e = np.zeros(tfield.dim)
            e[i] = h[i]
            dV = (potential(form, x + e, quad)
                  - potential(form, x - e, quad)) / (2.0 * h[i])
            worst = max(worst, abs(dV - f[i]))
    return worst


def potential_via_transform(field: VectorField, D, x,
                            quad: QuadratureRule | None = None,
                            tol: float = 1e-6) -> float:
    """Ray potential of the transformed field at x, refused when the
    transform fails to close the form."""
    x = np.asarray(x, dtype=float)
    tfield = transform_field(field, D)
    checks = [x] if np.any(x != 0) else [np.ones(field.dim)]
    checks += [0.5 * checks[0], 0.1 * checks[0] + 1e-3]
    for p in checks:
        J = jacobian(tfield, p)
        if _asymmetry(J) > tol:
            raise GradientizeError(
                "transformed form is not closed "
                f"(asymmetry {_asymmetry(J):.3e} > {tol:.1e} at {p})")
    return potential(OneForm(tfield), x, quad)
