"""Phase-alignment weight design for constructive cross-path interference.

Finds the transmit weight applied to the collaborator's code so that the
weighted cross-path echo lands in phase with the self-echo; the transmit
sequence must stay unimodular, so the weight carries phase only.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .codes import Code


class AlignmentError(ValueError):
    pass


@dataclass
class WeightMatrix:
    """Unimodularity-preserving transmit weighting.

    kind "diagonal" stores a length-N unit-magnitude vector (the primary
    representation); "full" stores an N x N matrix kept as an extension
    point and validated against the unimodularity contract on application.
    """

    kind: str
    entries: np.ndarray
    objective_residual: float = 0.0     # final ||Im(u)||_2
    solver_iterations: int = 0
    converged: bool = True
    degraded: bool = False              # set by the side channel on drop

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.complex128)
        if self.kind == "diagonal":
            if self.entries.ndim != 1:
                raise AlignmentError("diagonal weight needs a 1-D entry vector")
            dev = np.max(np.abs(np.abs(self.entries) - 1.0))
            if dev > 1e-9:
                raise AlignmentError(
                    f"diagonal weight entries not unit magnitude: {dev:.3e}")
        elif self.kind == "full":
            if self.entries.ndim != 2 or \
                    self.entries.shape[0] != self.entries.shape[1]:
                raise AlignmentError("full weight must be a square matrix")
        else:
            raise AlignmentError(f"unknown weight kind: {self.kind!r}")

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> "WeightMatrix":
        return cls(kind="diagonal", entries=np.ones(n, dtype=np.complex128))

    def apply_vector(self, x: np.ndarray) -> np.ndarray:
        if x.shape[0] != self.n:
            raise AlignmentError(f"dimension mismatch: weight {self.n}, "
                                 f"vector {x.shape[0]}")
        if self.kind == "diagonal":
            return self.entries * x
        return self.entries @ x

    def apply_matrix(self, cols: np.ndarray) -> np.ndarray:
        if cols.shape[0] != self.n:
            raise AlignmentError(f"dimension mismatch: weight {self.n}, "
                                 f"columns {cols.shape[0]}")
        if self.kind == "diagonal":
            return self.entries[:, None] * cols
        return self.entries @ cols


@dataclass
class AlignmentProblem:
    """Pulse-1 self-echo and pulse-2 cross-echo captures at the enhanced radar."""

    self_echo: np.ndarray
    cross_echo: np.ndarray
    code: Code = None
    channel_hint: object = None

    def __post_init__(self):
        self.self_echo = np.asarray(self.self_echo, dtype=np.complex128)
        self.cross_echo = np.asarray(self.cross_echo, dtype=np.complex128)
        if self.self_echo.shape != self.cross_echo.shape or \
                self.self_echo.ndim != 1:
            raise AlignmentError("self and cross echoes must be equal-length vectors")
        if not (np.any(self.self_echo) or np.any(self.cross_echo)):
            raise AlignmentError("alignment problem is all-zero")


def _alignment_product(problem: AlignmentProblem,
                       weight: WeightMatrix) -> np.ndarray:
    """u = self_echo * conj(weighted cross echo), elementwise."""
    return problem.self_echo * np.conj(weight.apply_vector(problem.cross_echo))


def imag_residual(problem: AlignmentProblem, weight: WeightMatrix) -> float:
    return float(np.linalg.norm(np.imag(_alignment_product(problem, weight))))


def solve_alignment_closed_form(problem: AlignmentProblem) -> WeightMatrix:
    """Per-element phase rotation: entries = exp(j(angle(self) - angle(cross))).

    For a diagonal weight this zeroes Im(u) exactly with Re(u) = |y_s||y_c|
    elementwise. Elements where the cross echo is zero have undefined
    phase; their entries default to 1.
    """
    silent = problem.cross_echo == 0.0
    phase = np.angle(problem.self_echo) - np.angle(problem.cross_echo)
    entries = np.exp(1j * phase)
    entries[silent] = 1.0
    w = WeightMatrix(kind="diagonal", entries=entries)
    w.objective_residual = imag_residual(problem, w)
    return w


def solve_alignment_iterative(problem: AlignmentProblem, max_iter: int = 500,
                              tol: float = 1e-8,
                              step: float = 0.1) -> WeightMatrix:
    """Projected gradient over unit-modulus weight entries.

    Descends the elementwise alignment misfit sum |u_n - |y_s||y_c||^2
    (whose minimizers are exactly the Im(u) = 0, Re(u) = |y_s||y_c| points;
    the bare ||Im(u)||^2 objective has spurious anti-phase stationary
    points), projecting each entry back to unit magnitude after every
    step. Initialized at identity, with step halving on objective increase.
    """
    ys = problem.self_echo
    yc = problem.cross_echo
    prod = ys * np.conj(yc)          # u = prod * conj(entries)
    scale = float(np.max(np.abs(prod)))
    if scale == 0.0:
        return WeightMatrix.identity(ys.size)
    prod = prod / scale              # scale-invariant objective/step size
    target = np.abs(prod)
    # the objective is elementwise-separable; preconditioning each gradient
    # component by 1/|prod|^2 equalizes per-element convergence rates
    precond = np.where(target > 0.0, 1.0 / np.maximum(target, 1e-300) ** 2, 0.0)

    def objective(entries):
        return float(np.sum(np.abs(prod * np.conj(entries) - target) ** 2))

    entries = np.ones_like(ys)
    obj = objective(entries)
    cur_step = step
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        # d/d(conj(entries)) of sum |prod*conj(entries) - target|^2
        grad = np.conj(prod) * (prod * np.conj(entries) - target)
        cand = entries - cur_step * precond * np.conj(grad)
        mag = np.abs(cand)
        cand = np.where(mag > 0, cand / np.where(mag > 0, mag, 1.0), 1.0)
        new_obj = objective(cand)
        if new_obj > obj:
            cur_step *= 0.5
            if cur_step < 1e-12:
                converged = True
                break
            continue
        rel_drop = (obj - new_obj) / max(obj, 1e-300)
        entries, obj = cand, new_obj
        if rel_drop < tol:
            converged = True
            break
    w = WeightMatrix(kind="diagonal", entries=entries,
                     solver_iterations=it, converged=converged)
    w.objective_residual = imag_residual(problem, w)
    return w


def apply_weight(weight: WeightMatrix, code: Code) -> Code:
    """Weighted transmit code; errors if the result breaks unimodularity."""
    out = weight.apply_vector(code.samples)
    dev = np.max(np.abs(np.abs(out) - 1.0))
    if dev > 1e-6:
        raise AlignmentError(
            f"weighted code not unimodular: max deviation {dev:.3e}")
    return Code(out / np.abs(out), family_id="custom", seed=code.seed)


def save_weight_csv(weight: WeightMatrix, path) -> None:
    """The exact payload exchanged over the side channel."""
    if weight.kind != "diagonal":
        raise AlignmentError("only diagonal weights are serialized")
    with open(path, "w", newline="") as f:
        f.write(f"# kind={weight.kind} n={weight.n} "
                f"residual={float(weight.objective_residual)!r}\n")
        w = csv.writer(f)
        w.writerow(["index", "re", "im"])
        for i, v in enumerate(weight.entries):
            w.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def load_weight_csv(path) -> WeightMatrix:
    residual = 0.0
    values = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("index"):
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    k, _, v = tok.partition("=")
                    if k == "residual":
                        residual = float(v)
                continue
            _, re, im = line.split(",")
            values.append(complex(float(re), float(im)))
    w = WeightMatrix(kind="diagonal", entries=np.array(values))
    w.objective_residual = residual
    return w
