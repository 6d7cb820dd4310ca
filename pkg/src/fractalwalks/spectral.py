"""Laplacian eigendecomposition, degeneracy analysis and long-time averages.

The connectivity matrix of a connected network is real symmetric positive
semidefinite with a single zero eigenvalue.  Degenerate eigenvalues are the
interesting feature here: a cluster with normalized weight rho(E) = D(E)/N of
order one signals localization, and the long-time average of the return-
probability lower bound is chi_lb = sum(rho^2) over distinct eigenvalues.

Dense LAPACK solvers are used throughout; generation sizes beyond the dense
budget are rejected rather than silently approximated.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import BudgetExceeded, ConvergenceFailure, MissingEigenvectors

DENSE_BUDGET_VECTORS = 8192
DENSE_BUDGET_VALUES = 16384


@dataclass(frozen=True)
class SpectralDecomposition:
    """Sorted eigenvalues and (optionally) an orthonormal eigenvector set.

    ``eigenvectors[:, n]`` belongs to ``eigenvalues[n]``.  Columns follow the
    sign convention that their first component above noise level is positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def e_max(self) -> float:
        return float(self.eigenvalues[-1])

    def require_vectors(self) -> np.ndarray:
        if self.eigenvectors is None:
            raise MissingEigenvectors("decomposition was computed values-only")
        return self.eigenvectors


@dataclass(frozen=True)
class EigenvalueCluster:
    energy: float
    multiplicity: int
    rho: float


@dataclass(frozen=True)
class DegeneracySpectrum:
    """Distinct eigenvalues with multiplicities, from gap clustering."""

    clusters: tuple[EigenvalueCluster, ...]
    tolerance: float
    n: int

    @property
    def energies(self) -> np.ndarray:
        return np.array([c.energy for c in self.clusters])

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([c.multiplicity for c in self.clusters])

    @property
    def rho(self) -> np.ndarray:
        return np.array([c.rho for c in self.clusters])

    def multiplicity_at(self, energy: float, atol: float = 1e-6) -> int:
        """Total multiplicity within ``atol`` of ``energy`` (0 if absent)."""
        return int(sum(c.multiplicity for c in self.clusters
                       if abs(c.energy - energy) <= atol))

    def rho_at(self, energy: float, atol: float = 1e-6) -> float:
        return self.multiplicity_at(energy, atol) / self.n

    def smallest_nonzero(self) -> float:
        for c in self.clusters:
            if c.energy > self.tolerance:
                return c.energy
        raise ValueError("no nonzero eigenvalue cluster")


def _as_dense(matrix) -> np.ndarray:
    if sp.issparse(matrix):
        return matrix.toarray()
    return np.asarray(matrix, dtype=np.float64)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip eigenvector columns so the first non-negligible entry is positive."""
    scale = np.abs(vectors).max(axis=0)
    for col in range(vectors.shape[1]):
        nz = np.nonzero(np.abs(vectors[:, col]) > 1e-12 * scale[col])[0]
        if nz.size and vectors[nz[0], col] < 0:
            vectors[:, col] = -vectors[:, col]
    return vectors


def decompose(matrix, want_vectors: bool = False, *,
              budget: int | None = None) -> SpectralDecomposition:
    """Dense symmetric eigendecomposition of a Laplacian.

    Values-only mode roughly doubles the feasible matrix size, hence the two
    default budgets.
    """
    a = _as_dense(matrix)
    n = a.shape[0]
    limit = budget if budget is not None else (
        DENSE_BUDGET_VECTORS if want_vectors else DENSE_BUDGET_VALUES
    )
    if n > limit:
        raise BudgetExceeded(
            f"N={n} above the dense-solver budget of {limit} "
            f"({'with' if want_vectors else 'without'} eigenvectors)"
        )
    try:
        if want_vectors:
            vals, vecs = sla.eigh(a, check_finite=False)
            order = np.argsort(vals, kind="stable")
            return SpectralDecomposition(vals[order], _fix_signs(vecs[:, order]))
        vals = sla.eigvalsh(a, check_finite=False, overwrite_a=True)
        return SpectralDecomposition(np.sort(vals, kind="stable"))
    except sla.LinAlgError as exc:
        raise ConvergenceFailure(f"symmetric eigensolver failed: {exc}") from exc


def default_cluster_tolerance(e_max: float) -> float:
    return max(1e-8, 1e-12 * e_max)


def degeneracies(spec: SpectralDecomposition,
                 tol: float | None = None) -> DegeneracySpectrum:
    """Cluster adjacent eigenvalues with gaps below ``tol``.

    The published degeneracies sit at exact integers that double precision
    scatters by ~1e-12, so cluster representatives within ``tol`` of an
    integer are snapped to it (reporting convenience only; membership is
    decided purely by the gap rule).
    """
    ev = spec.eigenvalues
    if tol is None:
        tol = default_cluster_tolerance(spec.e_max)
    clusters = []
    start = 0
    for i in range(1, len(ev) + 1):
        if i == len(ev) or ev[i] - ev[i - 1] > tol:
            mean = float(ev[start:i].mean())
            if abs(mean - round(mean)) <= tol:
                mean = float(round(mean))
            clusters.append(EigenvalueCluster(
                energy=mean, multiplicity=i - start, rho=(i - start) / len(ev)
            ))
            start = i
    return DegeneracySpectrum(clusters=tuple(clusters), tolerance=tol, n=len(ev))


def chi_lb(dos: DegeneracySpectrum) -> float:
    """Long-time average of the return-probability lower bound: sum of rho^2."""
    return float((dos.rho**2).sum())


def rho_dsg_closed_form(g: int) -> tuple[Fraction, Fraction]:
    """Exact weights of the two dominant DSG eigenvalues, 3 and 5.

    Both tend to 1/6 as g grows.
    """
    if g < 1:
        raise ValueError("g must be >= 1")
    return (
        Fraction(3 ** (g - 1) + 3, 2 * 3**g),
        Fraction(3 ** (g - 1) - 1, 2 * 3**g),
    )


def chi_lb_dsg_closed_form(g: int) -> float:
    """Exact long-time average for the DSG; tends to 1/14 as g grows."""
    if g < 1:
        raise ValueError("g must be >= 1")
    exact = Fraction(3**g * (14 + 3**g), 14) + Fraction(10 * 2**g, 7) - Fraction(3, 2)
    return float(exact / 3 ** (2 * g))


def counting_function(spec: SpectralDecomposition, x_grid) -> np.ndarray:
    """Normalized cumulative eigenvalue count at relative positions ``x_grid``.

    Returns (1/N) * #{n : E_n / E_max <= x} for each x; monotone
    non-decreasing with value 1 at x = 1.
    """
    x = np.asarray(x_grid, dtype=np.float64)
    ev = spec.eigenvalues
    counts = np.searchsorted(ev, x * spec.e_max, side="right")
    return counts / spec.n


# ---------------------------------------------------------------------------
# file formats

def write_spectrum_csv(spec: SpectralDecomposition, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "eigenvalue"])
        for i, e in enumerate(spec.eigenvalues, start=1):
            writer.writerow([i, format(float(e), ".17g")])


def read_spectrum_csv(path: str | Path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["n", "eigenvalue"]:
            raise ValueError(f"unexpected header {header!r}")
        values = [float(row[1]) for row in reader]
    return np.array(values)


def write_degeneracy_report(dos: DegeneracySpectrum, path: str | Path) -> None:
    rows = [{"E": c.energy, "D": c.multiplicity, "rho": c.rho}
            for c in dos.clusters]
    Path(path).write_text(json.dumps(rows, indent=1) + "\n")
