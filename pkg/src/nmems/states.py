"""Pure states and the parameterized two-qubit mixtures built from them.

Every family is built from first principles: take a three-qubit pure state,
trace one qubit out, and mix the resulting pair state with a Bell projector::

    rho(x) = x * reduced + (1 - x) * |bell><bell|

Kets are big-endian (``|q0 q1 q2>``).
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_TOL, DensityMatrix, partial_trace, validate_density

SQRT2 = np.sqrt(2.0)


class BellKind(enum.Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


class Tripartite(enum.Enum):
    W = "w"
    WBAR = "wbar"
    WWBAR = "wwbar"
    STAR = "star"
    GHZ = "ghz"


class Family(enum.Enum):
    RHO1 = "rho1"
    RHO2 = "rho2"
    RHO3 = "rho3"
    RHO4 = "rho4"
    RHO5 = "rho5"
    RHO6 = "rho6"
    TAU1 = "tau1"
    TAU2 = "tau2"
    RHOG = "rhog"
    WERNER = "werner"
    MEMS_W = "mems_w"
    MEMS_WBAR = "mems_wbar"


PHI = (BellKind.PHI_PLUS, BellKind.PHI_MINUS)
PSI = (BellKind.PSI_PLUS, BellKind.PSI_MINUS)

# family -> (tripartite source, allowed Bell partners)
_MIXTURES = {
    Family.RHO1: (Tripartite.W, PHI),
    Family.RHO2: (Tripartite.W, PSI),
    Family.RHO3: (Tripartite.WBAR, PHI),
    Family.RHO4: (Tripartite.WBAR, PSI),
    Family.RHO5: (Tripartite.WWBAR, PHI),
    Family.RHO6: (Tripartite.WWBAR, PSI),
    Family.TAU1: (Tripartite.STAR, PHI),
    Family.TAU2: (Tripartite.STAR, PSI),
    Family.RHOG: (Tripartite.GHZ, PHI + PSI),
}
_BELL_FREE = (Family.WERNER, Family.MEMS_W, Family.MEMS_WBAR)

X_TYPE_FAMILIES = frozenset(
    {Family.RHO1, Family.RHO2, Family.RHO3, Family.RHO4, Family.RHOG, Family.WERNER, Family.MEMS_W, Family.MEMS_WBAR}
)

STAR_CENTRAL_QUBIT = 2
STAR_DEFAULT_TRACED = 0
DEFAULT_TRACED = 2


class FamilyError(ValueError):
    pass


class SeparableReductionWarning(UserWarning):
    pass


def _ket(*labels):
    n = len(labels[0])
    v = np.zeros(2**n, dtype=np.complex128)
    for lab in labels:
        v[int(lab, 2)] += 1.0
    return v


def bell_state(kind):
    """Unit 4-vector for a Bell state.

    ``PHI_*`` are ``(|00> +/- |11>)/sqrt2``, ``PSI_*`` are ``(|01> +/- |10>)/sqrt2``.
    """
    kind = BellKind(kind)
    if kind is BellKind.PHI_PLUS:
        return (_ket("00") + _ket("11")) / SQRT2
    if kind is BellKind.PHI_MINUS:
        return (_ket("00") - _ket("11")) / SQRT2
    if kind is BellKind.PSI_PLUS:
        return (_ket("01") + _ket("10")) / SQRT2
    return (_ket("01") - _ket("10")) / SQRT2


def bell_projector(kind):
    v = bell_state(kind)
    return np.outer(v, v.conj())


def tripartite_state(kind):
    """Unit 8-vector for W, W-bar, their superposition, Star or GHZ."""
    kind = Tripartite(kind)
    if kind is Tripartite.W:
        return _ket("001", "010", "100") / np.sqrt(3.0)
    if kind is Tripartite.WBAR:
        return _ket("110", "101", "011") / np.sqrt(3.0)
    if kind is Tripartite.WWBAR:
        return (tripartite_state(Tripartite.W) + tripartite_state(Tripartite.WBAR)) / SQRT2
    if kind is Tripartite.STAR:
        return _ket("000", "100", "101", "111") / 2.0
    return _ket("000", "111") / SQRT2


def reduced_pair(kind, traced_qubit=None):
    """Two-qubit state left after tracing one qubit out of ``tripartite_state(kind)``.

    The default traced qubit is 2, except for Star where it is the peripheral
    qubit 0. Tracing the Star's central qubit (2) leaves a product state; the
    result is then flagged ``"separable-by-construction"`` and a
    :class:`SeparableReductionWarning` is issued.
    """
    kind = Tripartite(kind)
    if traced_qubit is None:
        traced_qubit = STAR_DEFAULT_TRACED if kind is Tripartite.STAR else DEFAULT_TRACED
    psi = tripartite_state(kind)
    rho = partial_trace(np.outer(psi, psi.conj()), traced_qubit)
    if kind is Tripartite.STAR and traced_qubit == STAR_CENTRAL_QUBIT:
        warnings.warn(
            "tracing the Star state's central qubit leaves a separable pair",
            SeparableReductionWarning,
            stacklevel=2,
        )
        return validate_density(rho, flags=("separable-by-construction",))
    return rho


@dataclass(frozen=True)
class StateFamily:
    """One point of a parameterized family.

    ``bell`` is ignored (and normalized to ``None``) for Werner and the two
    constant MEMS families.
    """

    family: Family
    bell: BellKind | None = None
    param: float = 0.0

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        p = float(self.param)
        if not (0.0 <= p <= 1.0) or not np.isfinite(p):
            raise FamilyError(f"parameter must lie in [0, 1], got {self.param!r}")
        object.__setattr__(self, "param", p)
        if fam in _BELL_FREE:
            object.__setattr__(self, "bell", None)
            return
        allowed = _MIXTURES[fam][1]
        bell = allowed[0] if self.bell is None else BellKind(self.bell)
        if bell not in allowed:
            names = ", ".join(b.value for b in allowed)
            raise FamilyError(f"{fam.value} mixes with {names}; got {bell.value}")
        object.__setattr__(self, "bell", bell)

    def with_param(self, param):
        return StateFamily(self.family, self.bell, param)

    @property
    def label(self):
        if self.bell is None:
            return self.family.value
        return f"{self.family.value}:{self.bell.value}"

    @property
    def is_x_family(self):
        return self.family in X_TYPE_FAMILIES


def werner(m):
    """Isotropic singlet mixture ``(1-m)/3 I + (4m-1)/3 |psi-><psi-|``.

    The singlet overlap equals ``m``; ``m = 1/4`` is the maximally mixed state.
    """
    return (1.0 - m) / 3.0 * np.eye(4, dtype=np.complex128) + (4.0 * m - 1.0) / 3.0 * bell_projector(
        BellKind.PSI_MINUS
    )


def materialize(fam, tol=DEFAULT_TOL):
    """Build the density matrix for a :class:`StateFamily` point."""
    fam = fam if isinstance(fam, StateFamily) else StateFamily(*fam)
    x = fam.param
    if fam.family is Family.WERNER:
        mat = werner(x)
    elif fam.family is Family.MEMS_W:
        mat = reduced_pair(Tripartite.W).mat
    elif fam.family is Family.MEMS_WBAR:
        mat = reduced_pair(Tripartite.WBAR).mat
    else:
        source, _ = _MIXTURES[fam.family]
        mat = x * reduced_pair(source).mat + (1.0 - x) * bell_projector(fam.bell)
    return validate_density(mat, tol)


def is_x_state(rho, tol=DEFAULT_TOL):
    """True when every entry off the main and anti-diagonal is below ``tol``."""
    m = np.asarray(rho.mat if isinstance(rho, DensityMatrix) else rho)
    if m.shape != (4, 4):
        raise ValueError(f"is_x_state expects a 4x4 matrix, got {m.shape}")
    mask = np.ones((4, 4), dtype=bool)
    idx = np.arange(4)
    mask[idx, idx] = False
    mask[idx, 3 - idx] = False
    return bool(np.all(np.abs(m[mask]) <= tol))


def all_families():
    """Every (family, bell) combination the toolkit knows, at param 0."""
    out = []
    for fam in Family:
        if fam in _BELL_FREE:
            out.append(StateFamily(fam))
        else:
            out.extend(StateFamily(fam, b) for b in _MIXTURES[fam][1])
    return out


def parse_family(text, param=0.0):
    """Parse ``<family>[:<bell>]`` (e.g. ``rho1:phi+``, ``werner``)."""
    name, _, bell = text.strip().lower().partition(":")
    aliases = {"memsw": "mems_w", "memswbar": "mems_wbar", "mems-w": "mems_w", "mems-wbar": "mems_wbar"}
    name = aliases.get(name, name)
    try:
        fam = Family(name)
    except ValueError:
        known = ", ".join(f.value for f in Family)
        raise FamilyError(f"unknown family {name!r} (known: {known})") from None
    bell_kind = None
    if bell:
        try:
            bell_kind = BellKind(bell)
        except ValueError:
            raise FamilyError(f"unknown Bell state {bell!r} (use phi+, phi-, psi+, psi-)") from None
    return StateFamily(fam, bell_kind, param)
