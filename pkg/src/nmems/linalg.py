"""Small dense complex linear algebra for two- and three-qubit states.

Matrices are plain ``numpy`` complex arrays. Basis ordering is big-endian:
index ``i`` of a three-qubit operator has binary digits ``q0 q1 q2`` with
``q0`` the leftmost ket label, so ``|101>`` is index 5.

Eigenvalues come from the Jacobi / Hessenberg-QR kernels in ``_backend``;
numpy is only used for array plumbing.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from ._backend import kernels

DEFAULT_TOL = 1e-10
JACOBI_TOL = 1e-13
CLAMP_TOL = 1e-9
MAX_SWEEPS = 100
CLUSTER_FACTOR = 64

__all__ = [
    "ConvergenceError",
    "DensityMatrix",
    "DensityValidationError",
    "NotHermitianError",
    "SubsystemError",
    "Violation",
    "as_matrix",
    "charpoly_coefficients",
    "dagger",
    "density_violations",
    "general_eigenvalues_4x4",
    "hermitian_dilation",
    "hermitian_eigenvalues",
    "kron",
    "merge_root_clusters",
    "partial_trace",
    "partial_transpose",
    "psd_sqrt",
    "singular_values",
    "validate_density",
]


class ConvergenceError(RuntimeError):
    """An iterative eigen-solver stopped without meeting its tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NotHermitianError(ValueError):
    pass


class SubsystemError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    """One failed density-matrix invariant."""

    kind: str  # "shape" | "finite" | "hermitian" | "trace" | "psd"
    detail: str
    magnitude: float

    def __str__(self):
        return f"{self.kind}: {self.detail}"


class DensityValidationError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density operator (dimension 4 or 8).

    Construct through :func:`validate_density`. ``flags`` carries
    annotations such as ``"separable-by-construction"``.
    """

    mat: np.ndarray
    tol: float = DEFAULT_TOL
    flags: tuple = field(default=())

    def __post_init__(self):
        m = np.array(self.mat, dtype=np.complex128)
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def dim(self):
        return self.mat.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.mat
        return self.mat.astype(dtype)

    def __repr__(self):
        flags = f", flags={self.flags}" if self.flags else ""
        return f"DensityMatrix(dim={self.dim}{flags})"


def as_matrix(a):
    """Return ``a`` as a square complex128 array."""
    m = np.asarray(a.mat if isinstance(a, DensityMatrix) else a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def kron(a, b):
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(a):
    return as_matrix(a).conj().T


def partial_trace(rho, traced_qubit):
    """Trace one qubit out of a three-qubit density matrix.

    Parameters
    ----------
    rho : array_like or DensityMatrix, shape (8, 8)
    traced_qubit : int
        0, 1 or 2 in big-endian order.

    Returns
    -------
    DensityMatrix
        The remaining two qubits, in their original relative order.
    """
    m = as_matrix(rho)
    if m.shape != (8, 8):
        raise SubsystemError(f"partial_trace expects an 8x8 three-qubit operator, got {m.shape}")
    if traced_qubit not in (0, 1, 2) or isinstance(traced_qubit, bool):
        raise SubsystemError(f"traced_qubit must be 0, 1 or 2, got {traced_qubit!r}")
    t = m.reshape(2, 2, 2, 2, 2, 2)
    q = traced_qubit
    reduced = np.trace(t, axis1=q, axis2=q + 3).reshape(4, 4)
    tol = rho.tol if isinstance(rho, DensityMatrix) else DEFAULT_TOL
    return validate_density(reduced, tol)


def partial_transpose(rho, qubit=1):
    """Partial transpose of a two-qubit operator over ``qubit`` (0 or 1)."""
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise SubsystemError(f"partial_transpose expects a 4x4 operator, got {m.shape}")
    t = m.reshape(2, 2, 2, 2)
    if qubit == 1:
        t = t.transpose(0, 3, 2, 1)
    elif qubit == 0:
        t = t.transpose(2, 1, 0, 3)
    else:
        raise SubsystemError(f"qubit must be 0 or 1, got {qubit!r}")
    return t.reshape(4, 4)


def _hermitian_check(m, tol):
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > tol:
        raise NotHermitianError(f"matrix is not Hermitian: max |a_ij - conj(a_ji)| = {dev:.3e} > {tol:g}")


def _jacobi(sym):
    sym = np.ascontiguousarray(sym, dtype=np.float64)
    scale = max(1.0, float(np.sqrt(np.sum(sym * sym))))
    w, v, sweeps, off = kernels.jacobi_eigh(sym, JACOBI_TOL * scale, MAX_SWEEPS)
    if sweeps < 0:
        raise ConvergenceError(
            f"Jacobi did not converge in {MAX_SWEEPS} sweeps (off-diagonal norm {off:.3e})",
            {"off_norm": off, "sweeps": MAX_SWEEPS},
        )
    return w, v


def hermitian_eigenvalues(a, tol=DEFAULT_TOL):
    """Real eigenvalues of a Hermitian matrix, in descending order.

    Complex input goes through its real symmetric embedding
    ``[[Re, -Im], [Im, Re]]``, whose spectrum is the Hermitian spectrum with
    every eigenvalue doubled.
    """
    m = as_matrix(a)
    _hermitian_check(m, tol)
    m = (m + m.conj().T) / 2
    if not np.any(m.imag):
        w, _ = _jacobi(m.real)
        return np.sort(w)[::-1].copy()
    emb = np.block([[m.real, -m.imag], [m.imag, m.real]])
    w, _ = _jacobi(emb)
    w = np.sort(w)
    return ((w[0::2] + w[1::2]) / 2)[::-1].copy()


def _spectral_function(a, fn, tol):
    """Apply ``fn`` to the eigenvalues of Hermitian ``a`` and rebuild the matrix."""
    m = as_matrix(a)
    _hermitian_check(m, tol)
    m = (m + m.conj().T) / 2
    n = m.shape[0]
    if not np.any(m.imag):
        w, v = _jacobi(m.real)
        return ((v * fn(w)) @ v.T).astype(np.complex128), w
    emb = np.block([[m.real, -m.imag], [m.imag, m.real]])
    w, v = _jacobi(emb)
    f_emb = (v * fn(w)) @ v.T
    return f_emb[:n, :n] + 1j * f_emb[n:, :n], w


def psd_sqrt(a, tol=CLAMP_TOL):
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero; anything more negative
    raises. Eigenvalues below the Jacobi stopping tolerance are treated as
    exact zeros so that rank-deficient inputs keep an exactly rank-deficient
    root.
    """
    m = as_matrix(a)
    scale = max(1.0, float(np.linalg.norm(m)))
    cut = JACOBI_TOL * scale

    def root(w):
        if np.any(w < -tol):
            raise ValueError(f"matrix is not PSD: eigenvalue {w.min():.3e} < -{tol:g}")
        return np.sqrt(np.where(w < cut, 0.0, w))

    r, _ = _spectral_function(m, root, DEFAULT_TOL)
    return r


def hermitian_dilation(a):
    """``[[0, A], [A^dagger, 0]]``; its eigenvalues are +/- the singular values of ``A``."""
    m = as_matrix(a)
    z = np.zeros_like(m)
    return np.block([[z, m], [m.conj().T, z]])


def singular_values(a):
    """Singular values of a square matrix, descending, via the Hermitian dilation.

    Small singular values come out with absolute (not square-root) accuracy,
    which matters when they feed sums of square roots.
    """
    m = as_matrix(a)
    n = m.shape[0]
    vals = hermitian_eigenvalues(hermitian_dilation(m))
    return np.abs(vals[:n])


def charpoly_coefficients(a):
    """Characteristic polynomial coefficients by Faddeev-LeVerrier.

    Returns ``c`` with ``det(x I - A) = x^n + c[1] x^(n-1) + ... + c[n]``
    and ``c[0] = 1``.
    """
    m = as_matrix(a)
    n = m.shape[0]
    c = np.zeros(n + 1, dtype=np.complex128)
    c[0] = 1.0
    mk = np.zeros_like(m)
    eye = np.eye(n, dtype=np.complex128)
    for k in range(1, n + 1):
        mk = m @ mk + c[k - 1] * eye
        c[k] = -np.trace(m @ mk) / k
    return c


def _companion(c):
    n = len(c) - 1
    comp = np.zeros((n, n), dtype=np.complex128)
    comp[0, :] = -c[1:]
    comp[np.arange(1, n), np.arange(n - 1)] = 1.0
    return comp


def _taylor_coefficients(c, m):
    """Coefficients of ``p(m + h)`` in ascending powers of ``h`` (repeated synthetic division)."""
    a = list(c)
    out = []
    while a:
        r = a[0]
        quotient = []
        for coef in a[1:]:
            quotient.append(r)
            r = coef + r * m
        out.append(r)
        a = quotient
    return out


def merge_root_clusters(roots, c, norm, factor=CLUSTER_FACTOR):
    """Replace numerically split multiple roots by their mean.

    A k-fold root of a polynomial with rounded coefficients scatters by about
    ``eps**(1/k)``, but the mean of the scattered roots stays accurate. A set
    of k roots is merged when the first k Taylor coefficients of the
    polynomial at their mean all vanish to the level expected from rounding
    in the coefficients (taken as ``eps * binom(n, i) * norm**i`` for ``c[i]``)
    and every member lies within the scatter radius ``(bound_0 / |a_k|)**(1/k)``
    that rounding predicts around a k-fold root.
    """
    roots = np.array(roots, dtype=np.complex128)
    n = roots.size
    eps = np.finfo(float).eps
    free = set(range(n))
    for k in range(n, 1, -1):
        for group in combinations(range(n), k):
            if not free.issuperset(group):
                continue
            m = roots[list(group)].mean()
            taylor = _taylor_coefficients(c, m)
            am = abs(m)
            bounds = [
                factor * eps * sum(comb(n, i) * norm**i * comb(n - i, j) * am ** (n - i - j) for i in range(n - j + 1))
                for j in range(k)
            ]
            if any(abs(taylor[j]) > bounds[j] for j in range(k)):
                continue
            lead = abs(taylor[k])
            radius = 10.0 * (bounds[0] / lead) ** (1.0 / k) if lead > 0 else np.inf
            if np.max(np.abs(roots[list(group)] - m)) <= radius:
                roots[list(group)] = m
                free.difference_update(group)
    return roots


def general_eigenvalues_4x4(a, max_iter=400):
    """Eigenvalues of a (possibly non-normal) 4x4 matrix.

    Characteristic polynomial from Faddeev-LeVerrier, roots from shifted QR
    iteration on its (upper Hessenberg) companion matrix, then
    :func:`merge_root_clusters` for multiple roots.

    Simple roots close to zero next to other small roots keep an absolute
    error of order ``eps * |A|**4 / |c3|``; this route is a cross-check, not
    the primary concurrence path.
    """
    m = as_matrix(a)
    if m.shape != (4, 4):
        raise ValueError(f"general_eigenvalues_4x4 expects a 4x4 matrix, got {m.shape}")
    c = charpoly_coefficients(m)
    comp = np.ascontiguousarray(_companion(c))
    eigs, iters = kernels.hessenberg_eigvals(comp, np.finfo(float).eps, max_iter)
    if iters < 0:
        residuals = [abs(np.polyval(c, z)) for z in eigs]
        raise ConvergenceError(
            f"companion QR did not converge in {max_iter} iterations",
            {"coefficients": c.tolist(), "diagonal": eigs.tolist(), "residuals": residuals},
        )
    return merge_root_clusters(eigs, c, float(np.linalg.norm(m)))


def density_violations(m, tol=DEFAULT_TOL):
    """List every density-matrix invariant that ``m`` breaks (empty if valid)."""
    m = np.asarray(m.mat if isinstance(m, DensityMatrix) else m, dtype=np.complex128)
    out = []
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (4, 8):
        return [Violation("shape", f"expected 4x4 or 8x8, got {m.shape}", float("inf"))]
    if not np.all(np.isfinite(m)):
        return [Violation("finite", "non-finite entries", float("inf"))]
    herm = float(np.max(np.abs(m - m.conj().T)))
    if herm > tol:
        out.append(Violation("hermitian", f"max |rho_ij - conj(rho_ji)| = {herm:.3e}", herm))
    tr = np.trace(m)
    tr_dev = abs(tr - 1.0)
    if tr_dev > tol:
        out.append(Violation("trace", f"trace = {tr.real:.12g}{tr.imag:+.3g}j", tr_dev))
    lo = float(hermitian_eigenvalues((m + m.conj().T) / 2, tol=np.inf)[-1])
    if lo < -tol:
        out.append(Violation("psd", f"minimum eigenvalue {lo:.3e}", -lo))
    return out


def validate_density(m, tol=DEFAULT_TOL, flags=()):
    """Check Hermiticity, unit trace and positivity; return a :class:`DensityMatrix`.

    Raises
    ------
    DensityValidationError
        With one :class:`Violation` per broken invariant.
    """
    violations = density_violations(m, tol)
    if violations:
        raise DensityValidationError(violations)
    if isinstance(m, DensityMatrix):
        return DensityMatrix(m.mat, tol, tuple(m.flags) + tuple(flags))
    return DensityMatrix(np.asarray(m, dtype=np.complex128), tol, tuple(flags))
