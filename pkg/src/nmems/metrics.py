"""Definition-level two-qubit metrics.

Concurrence, Pauli correlation matrix, optimal teleportation fidelity,
normalized linear entropy, the Horodecki Bell-CHSH quantity and a PPT
witness, all computed from the density matrix alone. Nothing here knows
which family a state came from.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    CLAMP_TOL,
    DensityMatrix,
    as_matrix,
    general_eigenvalues_4x4,
    hermitian_eigenvalues,
    partial_transpose,
    psd_sqrt,
    singular_values,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
YY = np.kron(SIGMA_Y, SIGMA_Y)

# PAULI_PAIRS[n, m] = sigma_n (x) sigma_m
PAULI_PAIRS = np.array([[np.kron(a, b) for b in PAULIS] for a in PAULIS])

IMAG_TOL = 1e-9
CHARPOLY_IMAG_TOL = 1e-6
CSV_COLUMNS = ("family", "bell", "param", "C", "f", "N", "L", "M", "isX", "useful", "violates")


def _two_qubit(rho):
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-qubit density matrix, got {m.shape}")
    return m


def spin_flip(rho):
    """``(sy x sy) rho* (sy x sy)``."""
    m = _two_qubit(rho)
    return YY @ m.conj() @ YY


def concurrence_sqrt_eigenvalues(rho, method="hermitian"):
    """Square roots of the eigenvalues of ``rho @ spin_flip(rho)``, descending.

    ``method="hermitian"`` takes them as the singular values of
    ``sqrt(rho) @ sqrt(rho~)``, i.e. the eigenvalues of
    ``R = sqrt(sqrt(rho) rho~ sqrt(rho))``. ``method="charpoly"`` roots the
    characteristic polynomial of the non-normal product directly; small
    negative roots in ``[-1e-9, 0)`` are clamped to zero.
    """
    m = _two_qubit(rho)
    if method == "hermitian":
        root = psd_sqrt(m)
        root_flip = YY @ root.conj() @ YY
        return singular_values(root @ root_flip)
    if method == "charpoly":
        lam = general_eigenvalues_4x4(m @ spin_flip(m))
        scale = max(1.0, float(np.max(np.abs(lam))))
        if np.any(np.abs(lam.imag) > CHARPOLY_IMAG_TOL * scale):
            raise ValueError(f"rho rho~ has complex eigenvalues {lam}")
        lam = lam.real
        if np.any(lam < -CLAMP_TOL):
            raise ValueError(f"rho rho~ has negative eigenvalue {lam.min():.3e}")
        lam = np.clip(lam, 0.0, None)
        return np.sqrt(np.sort(lam)[::-1])
    raise ValueError(f"unknown concurrence method {method!r}")


def concurrence(rho, method="hermitian"):
    """Wootters concurrence ``max(0, s1 - s2 - s3 - s4)``."""
    s = concurrence_sqrt_eigenvalues(rho, method)
    return max(0.0, float(s[0] - s[1] - s[2] - s[3]))


def wootters_r_matrix(rho):
    """``sqrt(sqrt(rho) rho~ sqrt(rho))`` built literally from :func:`psd_sqrt`."""
    root = psd_sqrt(_two_qubit(rho))
    inner = root @ spin_flip(rho) @ root
    return psd_sqrt((inner + inner.conj().T) / 2)


def correlation_matrix(rho):
    """3x3 real matrix ``t[n, m] = Tr(rho sigma_n (x) sigma_m)``, order (x, y, z)."""
    m = _two_qubit(rho)
    t = np.einsum("ij,nmji->nm", m, PAULI_PAIRS)
    if np.max(np.abs(t.imag)) > IMAG_TOL:
        raise ValueError(f"correlation matrix has imaginary residue {np.max(np.abs(t.imag)):.3e}")
    return t.real.copy()


def correlation_singular_values(rho):
    """Singular values of the correlation matrix (square roots of the eig of T^T T), descending."""
    return singular_values(correlation_matrix(rho))


def ttdagger_eigenvalues(rho):
    """Eigenvalues ``u_i`` of ``T^T T``, descending."""
    return correlation_singular_values(rho) ** 2


def n_value(rho):
    """``N = sum_i sqrt(u_i)``; the state teleports better than classically iff ``N > 1``."""
    return float(np.sum(correlation_singular_values(rho)))


def teleport_fidelity(rho):
    """Optimal standard-teleportation fidelity ``(1 + N/3) / 2``."""
    return 0.5 * (1.0 + n_value(rho) / 3.0)


def linear_entropy(rho):
    """Normalized linear entropy ``4/3 (1 - Tr rho^2)``."""
    m = _two_qubit(rho)
    purity = float(np.real(np.sum(m * m.T)))
    return 4.0 / 3.0 * (1.0 - purity)


def bell_chsh_m(rho):
    """Sum of the two largest eigenvalues of ``T^T T``; CHSH is violated iff ``M > 1``."""
    u = ttdagger_eigenvalues(rho)
    return float(u[0] + u[1])


def ppt_min_eigenvalue(rho):
    """Smallest eigenvalue of the partial transpose over the second qubit."""
    return float(hermitian_eigenvalues(partial_transpose(_two_qubit(rho), 1))[-1])


def _clamp(x, lo, hi):
    return min(hi, max(lo, x))


@dataclass(frozen=True)
class MetricsReport:
    """Metrics for one state.

    Reported values are clamped to their mathematical ranges; ``raw`` keeps
    the unclamped numbers for diagnostics.
    """

    concurrence: float
    fidelity: float
    n_value: float
    linear_entropy: float
    m_value: float
    is_x: bool
    family: str = ""
    bell: str = ""
    param: float | None = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def useful_for_teleport(self):
        return self.n_value > 1.0

    @property
    def violates_bell(self):
        return self.m_value > 1.0

    def to_dict(self):
        return {
            "family": self.family,
            "bell": self.bell,
            "param": self.param,
            "C": self.concurrence,
            "f": self.fidelity,
            "N": self.n_value,
            "L": self.linear_entropy,
            "M": self.m_value,
            "isX": self.is_x,
            "useful": self.useful_for_teleport,
            "violates": self.violates_bell,
        }

    def csv_row(self):
        d = self.to_dict()
        return [_fmt(d[k]) for k in CSV_COLUMNS]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def compute_metrics(rho, family=None, x_tol=1e-10):
    """All metrics of a two-qubit state as a :class:`MetricsReport`.

    ``family`` may be a :class:`~nmems.states.StateFamily` whose label and
    parameter are echoed in the report.
    """
    from .states import is_x_state

    m = _two_qubit(rho)
    svals = correlation_singular_values(m)
    n = float(np.sum(svals))
    f = 0.5 * (1.0 + n / 3.0)
    u = svals**2
    mval = float(u[0] + u[1])
    c = concurrence(m)
    lin = linear_entropy(m)
    raw = {"C": c, "f": f, "N": n, "L": lin, "M": mval, "u": u.tolist()}
    fam_name = bell = ""
    param = None
    if family is not None:
        fam_name = family.family.value
        bell = family.bell.value if family.bell is not None else ""
        param = family.param
    return MetricsReport(
        concurrence=_clamp(c, 0.0, 1.0),
        fidelity=_clamp(f, 0.0, 1.0),
        n_value=max(n, 0.0),
        linear_entropy=_clamp(lin, 0.0, 1.0),
        m_value=_clamp(mval, 0.0, 2.0),
        is_x=is_x_state(m, x_tol),
        family=fam_name,
        bell=bell,
        param=param,
        raw=raw,
    )


def fidelity_from_n(n):
    return 0.5 * (1.0 + n / 3.0)
