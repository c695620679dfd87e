"""Classification of a field as closed, Frobenius-integrable, or neither."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from .fields import VectorField, eval_field, jacobian
from .homotopy import OneForm, QuadratureRule, _resolve

DEFAULT_TOL = 1e-8
DEFAULT_PANELS = 8


class Verdict(enum.Enum):
    CLOSED = "Closed"
    FROBENIUS_INTEGRABLE = "FrobeniusIntegrable"
    NON_INTEGRABLE = "NonIntegrable"


@dataclass(frozen=True)
class ClosednessReport:
    max_asymmetry: float
    frobenius_defect_max: Optional[float]
    verdict: Verdict
    loop_integrals: list = dc_field(default_factory=list)


@dataclass(frozen=True)
class Loop:
    """Closed C^1 curve s in [0, 1] -> R^N, with optional derivative."""

    gamma: Callable[[float], np.ndarray]
    dgamma: Optional[Callable[[float], np.ndarray]] = None
    label: str = "loop"

    def velocity(self, s: float) -> np.ndarray:
        if self.dgamma is not None:
            return np.asarray(self.dgamma(s), dtype=float)
        h = 1e-6
        lo, hi = max(0.0, s - h), min(1.0, s + h)
        return (np.asarray(self.gamma(hi), float)
                - np.asarray(self.gamma(lo), float)) / (hi - lo)


def circle_loop(radius: float = 1.0, center=None, dim: int = 2,
                axes=(0, 1)) -> Loop:
    """Unit-speed-parameterized circle in the (axes[0], axes[1]) plane."""
    c = np.zeros(dim) if center is None else np.asarray(center, float)
    i, j = axes

    def gamma(s):
        p = c.copy()
        p[i] += radius * np.cos(2 * np.pi * s)
        p[j] += radius * np.sin(2 * np.pi * s)
        return p

    def dgamma(s):
        v = np.zeros(dim)
        v[i] = -2 * np.pi * radius * np.sin(2 * np.pi * s)
        v[j] = 2 * np.pi * radius * np.cos(2 * np.pi * s)
        return v

    return Loop(gamma=gamma, dgamma=dgamma, label=f"circle(r={radius})")


def _relative_asymmetry(J: np.ndarray) -> float:
    return float(np.max(np.abs(J - J.T)) / (1.0 + np.max(np.abs(J))))


def closedness(field: VectorField, samples, tol: float = DEFAULT_TOL,
               scheme: str = "auto") -> ClosednessReport:
    """Max relative Jacobian asymmetry over samples; Closed iff below tol."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise ValueError("at least one sample point is required")
    worst = max(_relative_asymmetry(jacobian(field, x, scheme=scheme))
                for x in samples)
    verdict = Verdict.CLOSED if worst <= tol else Verdict.NON_INTEGRABLE
    return ClosednessReport(max_asymmetry=worst, frobenius_defect_max=None,
                            verdict=verdict)


def frobenius_defect(field: VectorField, x, scheme: str = "auto") -> float:
    """Max over index triples of the one-form wedge obstruction.

    For N = 3 this equals |f . curl f|; identically 0 for N < 3.
    """
    x = np.asarray(x, dtype=float)
    if field.dim < 3:
        return 0.0
    f = eval_field(field, x)
    J = jacobian(field, x, scheme=scheme)
    worst = 0.0
    for l, k, i in combinations(range(field.dim), 3):
        term = (f[l] * (J[i, k] - J[k, i])
                + f[k] * (J[l, i] - J[i, l])
                + f[i] * (J[k, l] - J[l, k]))
        worst = max(worst, abs(term))
    return worst


def loop_integral(form: OneForm, loop: Loop,
                  quad: QuadratureRule | None = None,
                  panels: int = DEFAULT_PANELS) -> float:
    """Circulation of the form along a closed parameterized curve."""
    start = np.asarray(loop.gamma(0.0), dtype=float)
    end = np.asarray(loop.gamma(1.0), dtype=float)
    if np.max(np.abs(start - end)) > 1e-9 * (1.0 + np.max(np.abs(start))):
        raise ValueError("loop is not closed: gamma(0) != gamma(1)")
    rule = _resolve(quad)
    total = 0.0
    width = 1.0 / panels
    for p in range(panels):
        for t, w in zip(rule.nodes, rule.weights):
            s = (p + t) * width
            point = np.asarray(loop.gamma(s), dtype=float)
            total += w * width * float(
                np.dot(eval_field(form.field, point), loop.velocity(s)))
    return total


def classify(field: VectorField, samples, tol: float = DEFAULT_TOL,
             loops=(), quad: QuadratureRule | None = None,
             scheme: str = "auto") -> ClosednessReport:
    """Closed, else FrobeniusIntegrable (local) when the wedge obstruction
    vanishes at every sample, else NonIntegrable."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise ValueError("at least one sample point is required")
    asym = max(_relative_asymmetry(jacobian(field, x, scheme=scheme))
               for x in samples)
    defect = max(frobenius_defect(field, x, scheme=scheme) for x in samples)
    if asym <= tol:
        verdict = Verdict.CLOSED
    elif defect <= tol:
        verdict = Verdict.FROBENIUS_INTEGRABLE
    else:
        verdict = Verdict.NON_INTEGRABLE
    form = OneForm(field)
    loop_vals = [(loop.label, loop_integral(form, loop, quad))
                 for loop in loops]
    return ClosednessReport(max_asymmetry=asym, frobenius_defect_max=defect,
                            verdict=verdict, loop_integrals=loop_vals)
