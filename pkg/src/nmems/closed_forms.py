"""Printed closed-form expressions, checked against the generic engine.

Each expression is evaluated exactly as written (``sqrt(x**2)`` becomes
``abs(x)``, nothing is simplified or corrected) and compared with the value
the definition-level metrics give for the same state. Disagreement is data:
it becomes a ``Mismatch`` report, never an exception.

Generic X-state forms take the six entries of::

    [[a, 0, 0, h],
     [0, b, x, 0],
     [0, x*, g, 0],
     [h*, 0, 0, d]]

named ``alpha, beta, gamma, delta, xi, eta`` below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .metrics import compute_metrics
from .states import BellKind, Family, StateFamily, materialize

DEFAULT_TOL = 1e-9
# sqrt(a + b) - sqrt(a - b) with a - b -> 0 keeps only half the digits of a - b
RADICAL_TOL = 1e-7
SQRT2 = math.sqrt(2.0)


def _sqrt(x):
    if x < 0.0:
        if x > -1e-14:
            return 0.0
        return math.nan
    return math.sqrt(x)


def _real(z, name):
    z = complex(z)
    if abs(z.imag) > 1e-12:
        raise ValueError(f"{name} must be real for this expression, got {z}")
    return z.real


# --- generic X state -------------------------------------------------------


def x_entries(rho):
    """``(alpha, beta, gamma, delta, xi, eta)`` read off a 4x4 matrix."""
    m = np.asarray(rho.mat if hasattr(rho, "mat") else rho)
    return (m[0, 0].real, m[1, 1].real, m[2, 2].real, m[3, 3].real, complex(m[1, 2]), complex(m[0, 3]))


def x_concurrence(alpha, beta, gamma, delta, xi, eta):
    return 2.0 * max(0.0, abs(xi) - _sqrt(alpha * delta), abs(eta) - _sqrt(beta * gamma))


def x_fidelity(alpha, beta, gamma, delta, xi, eta):
    xi, eta = _real(xi, "xi"), _real(eta, "eta")
    return (
        0.5
        + abs(2 * eta + 2 * xi) / 6.0
        + abs(-2 * eta + 2 * xi) / 6.0
        + abs(alpha - beta - gamma + delta) / 6.0
    )


def x_mixedness(alpha, beta, gamma, delta, xi, eta):
    return (
        4.0 / 3.0
        - 4.0 / 3.0 * (alpha**2 + beta**2 + gamma**2 + delta**2)
        - 8.0 / 3.0 * (abs(eta) ** 2 + abs(xi) ** 2)
    )


def x_ttdagger_eigs(alpha, beta, gamma, delta, xi, eta):
    """The printed triple ``(u1, u2, u3)`` for the X state."""
    xi, eta = _real(xi, "xi"), _real(eta, "eta")
    z = (alpha - beta - gamma + delta) ** 2
    return (8.0 * (xi**2 + eta**2), (-2 * eta + 2 * xi) ** 2 + z, (2 * eta + 2 * xi) ** 2 + z)


# --- subclass B, parameterized by the printed matrix symbols ---------------


def c1_concurrence(alpha, delta):
    d1 = 4.5 * alpha**2 + 2 * alpha * delta + 2 * delta**2
    d2 = 81 * alpha**4 + 72 * alpha**3 * delta - 168 * alpha**2 * delta**2 + 32 * alpha * delta**3 + 16 * delta**4
    d3 = alpha**2
    r = _sqrt(d2)
    return _sqrt(d1 + r / 2) - _sqrt(d1 - r / 2) - _sqrt(d3)


def c1_ttdagger_eigs(alpha, delta):
    return ((2 * alpha - 2 * delta) ** 2, (4 * alpha + 2 * delta) ** 2, (4 * alpha - 2 * delta) ** 2)


def c1_fidelity(alpha, delta):
    return 0.5 + abs(2 * alpha - 2 * delta) / 6 + abs(2 * delta + 4 * alpha) / 6 + abs(-2 * delta + 4 * alpha) / 6


def c1_mixedness(alpha, delta):
    return 4 / 3 - 8 / 3 * (alpha + delta) ** 2 - 32 * alpha**2 - 8 / 3 * delta**2


def c2a_concurrence(alpha, beta):
    f1 = 4.5 * alpha**2 + 8 * alpha * beta + 2 * beta**2
    f2 = 81 * alpha**4 + 288 * alpha**3 * beta + 312 * alpha**2 * beta**2 + 128 * alpha * beta**3 + 16 * beta**4
    f3 = alpha**2
    r = _sqrt(f2)
    return _sqrt(f1 + r / 2) - _sqrt(f1 - r / 2) - _sqrt(f3)


def c2a_ttdagger_eigs(alpha, beta):
    return ((4 * alpha + 2 * beta) ** 2, (4 * alpha + 2 * beta) ** 2, (-2 * alpha - 2 * beta) ** 2)


def c2a_fidelity(alpha, beta):
    return 0.5 + abs(4 * alpha + 2 * beta) / 3 + abs(-2 * alpha - 2 * beta) / 6


def c2a_mixedness(alpha, beta):
    return 4 / 3 - 40 / 3 * alpha**2 - 16 / 3 * (2 * alpha + beta) ** 2


def c2b_concurrence(alpha, beta):
    return 2 * abs(alpha) - 2 * abs(beta)


def c2b_ttdagger_eigs(alpha, beta):
    return ((4 * alpha - 2 * beta) ** 2, (4 * alpha - 2 * beta) ** 2, (-2 * alpha - 2 * beta) ** 2)


def c2b_fidelity(alpha, beta):
    return 0.5 + abs(4 * alpha - 2 * beta) / 3 + abs(-2 * alpha - 2 * beta) / 6


def c2b_mixedness(alpha, beta):
    return 4 / 3 - 104 * alpha**2 / 3 - 16 * beta**2 / 3


def star_phi_plus_concurrence(alpha, beta):
    inner = 2 * _sqrt(2 * alpha * (alpha + beta))
    return _sqrt(alpha + beta) * (_sqrt(3 * alpha + beta + inner) - _sqrt(3 * alpha + beta - inner))


def star_phi_minus_concurrence(alpha, beta):
    u = 3 * alpha**2 - 4 * alpha * beta + 9 * beta**2
    v = 2 * alpha**4 - 10 * alpha**3 * beta + 6 * (alpha * beta) ** 2 + 18 * alpha * beta**3
    r = _sqrt(v)
    return _sqrt(u + 2 * r) - _sqrt(u - 2 * r)


def star_phi_plus_fidelity(alpha, beta):
    return 0.5 + abs(alpha + beta) / 3 + 2 / 3 * _sqrt(2 * (alpha**2 + beta**2))


def star_phi_minus_fidelity(alpha, beta):
    u = 2 * alpha**2 - 4 * alpha * beta + 6 * beta**2
    v = 4 * SQRT2 * (beta**2 - alpha * beta)
    return 0.5 + abs(alpha + beta) / 3 + (_sqrt(u + v) + _sqrt(u - v)) / 3


def star_phi_plus_mixedness(alpha, beta):
    return 4 / 3 - 16 * alpha**2 + 16 / 3 * (alpha * beta - 2 * beta**2)


def star_phi_minus_mixedness(alpha, beta):
    return 4 / 3 - 16 * alpha**2 + 80 / 3 * alpha * beta - 32 * beta**2


# Matrix-symbol values for a mixing parameter, read off the first-principles
# matrices (the printed forms never state them).
def c1_symbols(r):
    return r / 6, (1 - r) / 2


def c2_symbols(r):
    return r / 6, (1 - r) / 2


def star_symbols(s):
    return 0.25, (1 - s) / 4


def star_psi_minus_symbols(s):
    return 0.25, s / 4


# --- registry --------------------------------------------------------------


@dataclass(frozen=True)
class ClosedForm:
    """One printed expression for one metric of one family.

    ``valid`` is ``(lo, hi, lo_open, hi_open)`` or None for the whole range.
    ``metric`` is one of C, f, L, M or ``u1``..``u3`` (sorted ascending).
    """

    source: str
    metric: str
    fn: Callable[[float], float]
    valid: tuple | None = None
    tol: float = DEFAULT_TOL

    def applies(self, x):
        if self.valid is None:
            return True
        lo, hi, lo_open, hi_open = self.valid
        above = x > lo if lo_open else x >= lo
        below = x < hi if hi_open else x <= hi
        return above and below


def _eig_forms(prefix, triple_fn):
    out = []
    for k in range(3):
        out.append(ClosedForm(f"{prefix}.u{k + 1}", f"u{k + 1}", lambda x, k=k: sorted(triple_fn(x))[k]))
    return out


def _rho1_fidelity(p):
    return 0.5 + (abs(1 - p / 3) + abs(-1 + 5 * p / 3) + abs(1 - 4 * p / 3)) / 6


def _rho1_c_high(p):
    return 2 / 3 * p - 2 * _sqrt((3 - p) * (1 - p) / 12)


def _rho1_c_low(p):
    return 1 - p - 2 / 3 * abs(p)


def _rho1_mixedness(p):
    return 20 / 9 * p - 44 / 27 * p**2


_HIGH_P = (0.7081, 1.0, True, False)
_LOW_P = (0.0, 0.6, False, True)

_RHO1_PHI_PLUS = [
    ClosedForm("rho1:phi+.C.high-p", "C", _rho1_c_high, _HIGH_P),
    ClosedForm("rho1:phi+.C.low-p", "C", _rho1_c_low, _LOW_P),
    ClosedForm("rho1:phi+.f", "f", _rho1_fidelity),
    ClosedForm("rho1:phi+.L", "L", _rho1_mixedness),
    ClosedForm("rho1:phi+.M", "M", lambda p: 4 - 10 * p + 67 / 9 * p**2),
]
_RHO1_PHI_MINUS = [
    ClosedForm("rho1:phi-.C.high-p", "C", _rho1_c_high, _HIGH_P),
    ClosedForm("rho1:phi-.f", "f", _rho1_fidelity),
    ClosedForm("rho1:phi-.L", "L", _rho1_mixedness),
    ClosedForm("rho1:phi-.M", "M", lambda p: 4 - 22 / 3 * p + 43 / 9 * p**2),
]
_RHO2_PSI_PLUS = [
    ClosedForm("rho2:psi+.C", "C", lambda p: 1 - p / 3),
    ClosedForm("rho2:psi+.L", "L", lambda p: p * (8 / 9 - 8 / 27 * p)),
    ClosedForm("rho2:psi+.f", "f", lambda p: 1 - 2 / 9 * p),
    ClosedForm("rho2:psi+.M", "M", lambda p: 7 / 9 * p**2 - 10 / 3 * p + 4),
]
_RHO2_PSI_MINUS = [
    ClosedForm("rho2:psi-.C", "C", lambda p: 1 - p / 3),
    ClosedForm("rho2:psi-.f", "f", lambda p: 0.5 + abs(5 * p / 3 - 1) / 3 + abs(2 * p / 3 - 1) / 6),
    ClosedForm("rho2:psi-.L", "L", lambda p: 8 * p * (1 / 3 - 7 / 27 * p)),
    ClosedForm("rho2:psi-.M", "M", lambda p: 79 / 9 * p**2 - 34 / 2 * p + 4),
]


def _c1_phi_plus_concurrence(r):
    u = 18 * r**2 + 48 * r * (1 - r) / 2 + 288 * (1 - r) ** 2 / 4
    v = -135 * r**4 + 72 * r**3 + 408 * r**2 - 480 * r + 144
    sv = _sqrt(v)
    return _sqrt(u + 6 * sv) / 12 - _sqrt(u - 6 * sv) / 12 - abs(r) / 6


def _c2a_concurrence_r(r):
    x = 18 * r**2 + 192 * r * (1 - r) / 2 + 288 * (1 - r) ** 2 / 2
    y = -15 * r**4 + 48 * r**3 + 24 * r**2 - 192 * r + 144
    sy = _sqrt(y)
    return (x + 6 * sy) / 12 - (x - 6 * sy) / 12 - abs(r) / 6


def _sym(fn, symbols):
    return lambda x: fn(*symbols(x))


_RHO5_PHI_PLUS = [
    ClosedForm("rho5:phi+.symbols.C", "C", _sym(c1_concurrence, c1_symbols), tol=RADICAL_TOL),
    *_eig_forms("rho5:phi+.symbols", _sym(c1_ttdagger_eigs, c1_symbols)),
    ClosedForm("rho5:phi+.symbols.f", "f", _sym(c1_fidelity, c1_symbols)),
    ClosedForm("rho5:phi+.symbols.L", "L", _sym(c1_mixedness, c1_symbols)),
    ClosedForm("rho5:phi+.C", "C", _c1_phi_plus_concurrence),
    ClosedForm(
        "rho5:phi+.f", "f", lambda r: 0.5 + (abs(4 * r / 3 - 1) + abs(1 - r / 3) + abs(-1 + 5 * r / 3)) / 6
    ),
    ClosedForm("rho5:phi+.L", "L", lambda r: -50 / 27 * r**2 + 20 / 9 * r),
    ClosedForm("rho5:phi+.M", "M", lambda r: (4 * r / 3 - 1) ** 2 + (1 - r / 3) ** 2),
]
_RHO5_PHI_MINUS = [
    ClosedForm("rho5:phi-.M", "M", lambda r: (1 - r / 3) ** 2 + (-1 + 5 * r / 3) ** 2),
]
_RHO6_PSI_PLUS = [
    ClosedForm("rho6:psi+.symbols.C", "C", _sym(c2a_concurrence, c2_symbols), tol=RADICAL_TOL),
    *_eig_forms("rho6:psi+.symbols", _sym(c2a_ttdagger_eigs, c2_symbols)),
    ClosedForm("rho6:psi+.symbols.f", "f", _sym(c2a_fidelity, c2_symbols)),
    ClosedForm("rho6:psi+.symbols.L", "L", _sym(c2a_mixedness, c2_symbols)),
    ClosedForm("rho6:psi+.C", "C", _c2a_concurrence_r),
    ClosedForm("rho6:psi+.L", "L", lambda r: 8 / 9 * r - 14 / 27 * r**2),
    ClosedForm("rho6:psi+.f", "f", lambda r: 0.5 + abs(1 - r / 3) / 3 + abs(2 * r / 3 - 1) / 6),
]
_RHO6_PSI_MINUS = [
    ClosedForm("rho6:psi-.symbols.C", "C", _sym(c2b_concurrence, c2_symbols)),
    *_eig_forms("rho6:psi-.symbols", _sym(c2b_ttdagger_eigs, c2_symbols)),
    ClosedForm("rho6:psi-.symbols.f", "f", _sym(c2b_fidelity, c2_symbols)),
    ClosedForm("rho6:psi-.symbols.L", "L", _sym(c2b_mixedness, c2_symbols)),
    ClosedForm("rho6:psi-.C", "C", lambda r: abs(r) / 3 - 2 * abs((1 - r) / 2)),
    ClosedForm("rho6:psi-.f", "f", lambda r: 0.5 + abs(2 * r / 3 - 1) / 6 + abs(5 * r / 3 - 1) / 3),
    ClosedForm("rho6:psi-.L", "L", lambda r: 8 / 3 * r - 62 / 27 * r**2),
]


def _tau_plus_c(s):
    return _sqrt((1 + s) / 4) * _sqrt(0.75 + s / 4 + 0.5 * _sqrt(2 + 2 * s)) - _sqrt(
        0.75 + s / 4 - 0.5 * _sqrt(2 + 2 * s)
    )


def _tau_minus_c(s):
    inner = 2 * _sqrt(18 * s**3 + 6 * s**2 - 10 * s + 2)
    base = 3 - 4 * s + 9 * s**2
    return 0.25 * (_sqrt(base + inner) - _sqrt(base - inner))


def _tau_minus_f(s):
    a = 4 * SQRT2 * (s**2 - s) + 2 - 4 * s + 6 * s**2
    b = 4 * SQRT2 * (s - s**2) + 2 - 4 * s + 6 * s**2
    return 0.5 + abs((3 * s + 1) / 4) / 3 + (_sqrt(a) + _sqrt(b)) / 12


_TAU_PLUS_PARAM = [
    ClosedForm("tau:phi+.C", "C", _tau_plus_c),
    ClosedForm("tau:phi+.f", "f", lambda s: 0.5 + _sqrt((1 + s) ** 2 / 4) / 3 + _sqrt(2 * s**2 + 2) / 6),
    ClosedForm("tau:phi+.L", "L", lambda s: (1 + s - 2 * s**2) / 3),
    ClosedForm("tau:phi+.M", "M", lambda s: (1 + s**2) / 2),
]
_TAU_MINUS_PARAM = [
    ClosedForm("tau:phi-.C", "C", _tau_minus_c),
    ClosedForm("tau:phi-.f", "f", _tau_minus_f),
    ClosedForm("tau:phi-.L", "L", lambda s: (1 + 5 * s) / 3 - 2 * s**2),
    ClosedForm("tau:phi-.M", "M", lambda s: SQRT2 * s * (1 - s) + 0.5 + s * (1.5 * s - 1)),
]
_TAU1_PHI_PLUS = [
    ClosedForm("tau1:phi+.symbols.C", "C", _sym(star_phi_plus_concurrence, star_symbols)),
    ClosedForm("tau1:phi+.symbols.f", "f", _sym(star_phi_plus_fidelity, star_symbols)),
    ClosedForm("tau1:phi+.symbols.L", "L", _sym(star_phi_plus_mixedness, star_symbols)),
    *_TAU_PLUS_PARAM,
]
_TAU1_PHI_MINUS = [
    ClosedForm("tau1:phi-.symbols.C", "C", _sym(star_phi_minus_concurrence, star_symbols)),
    ClosedForm("tau1:phi-.symbols.f", "f", _sym(star_phi_minus_fidelity, star_symbols)),
    ClosedForm("tau1:phi-.symbols.L", "L", _sym(star_phi_minus_mixedness, star_symbols)),
    *_TAU_MINUS_PARAM,
]

_WERNER = [
    ClosedForm("werner.C.branch-a", "C", lambda m: (2 * m + 1) / 6, (-0.5, math.inf, True, True)),
    ClosedForm("werner.C.branch-b", "C", lambda m: (1 - 2 * m) / 2, (-math.inf, 0.5, True, True)),
    ClosedForm("werner.L", "L", lambda m: 8 / 9 - 16 / 9 * m**2 + 8 / 9 * m),
    ClosedForm("werner.f", "f", lambda m: (1 + 2 * m) / 3),
]
_MEMS = [
    ClosedForm("mems.f", "f", lambda _: 7 / 9),
    ClosedForm("mems.L", "L", lambda _: 16 / 27),
]

_REGISTRY = {
    (Family.RHO1, BellKind.PHI_PLUS): _RHO1_PHI_PLUS,
    (Family.RHO1, BellKind.PHI_MINUS): _RHO1_PHI_MINUS,
    (Family.RHO2, BellKind.PSI_PLUS): _RHO2_PSI_PLUS,
    (Family.RHO2, BellKind.PSI_MINUS): _RHO2_PSI_MINUS,
    # rho3/rho4 are asserted to share the rho1/rho2 expressions
    (Family.RHO3, BellKind.PHI_PLUS): _RHO1_PHI_PLUS,
    (Family.RHO3, BellKind.PHI_MINUS): _RHO1_PHI_MINUS,
    (Family.RHO4, BellKind.PSI_PLUS): _RHO2_PSI_PLUS,
    (Family.RHO4, BellKind.PSI_MINUS): _RHO2_PSI_MINUS,
    (Family.RHO5, BellKind.PHI_PLUS): _RHO5_PHI_PLUS,
    (Family.RHO5, BellKind.PHI_MINUS): _RHO5_PHI_MINUS,
    (Family.RHO6, BellKind.PSI_PLUS): _RHO6_PSI_PLUS,
    (Family.RHO6, BellKind.PSI_MINUS): _RHO6_PSI_MINUS,
    (Family.TAU1, BellKind.PHI_PLUS): _TAU1_PHI_PLUS,
    (Family.TAU1, BellKind.PHI_MINUS): _TAU1_PHI_MINUS,
    # tau2 is asserted to share the tau1 metrics
    (Family.TAU2, BellKind.PSI_PLUS): _TAU_PLUS_PARAM,
    (Family.TAU2, BellKind.PSI_MINUS): _TAU_MINUS_PARAM,
    (Family.RHOG, BellKind.PHI_PLUS): [ClosedForm("rhog:phi+.f", "f", lambda t: 2 / 3 + (1 - t) / 3)],
    (Family.WERNER, None): _WERNER,
    (Family.MEMS_W, None): _MEMS,
    (Family.MEMS_WBAR, None): _MEMS,
}

X_FORMS = [
    ClosedForm("x-state.C", "C", lambda e: x_concurrence(*e)),
    ClosedForm("x-state.f", "f", lambda e: x_fidelity(*e)),
    ClosedForm("x-state.L", "L", lambda e: x_mixedness(*e)),
    *[ClosedForm(f"x-state.u{k + 1}", f"u{k + 1}", lambda e, k=k: sorted(x_ttdagger_eigs(*e))[k]) for k in range(3)],
]


def forms_for(fam):
    """Printed expressions registered for a family (parameter-based only)."""
    return list(_REGISTRY.get((fam.family, fam.bell), []))


@dataclass(frozen=True)
class ClosedFormReport:
    family: str
    bell: str
    param: float
    source: str
    metric: str
    value: float
    generic_value: float
    abs_delta: float
    tol: float

    @property
    def status(self):
        return "Match" if self.abs_delta <= self.tol else "Mismatch"

    def to_dict(self):
        return {
            "family": self.family,
            "bell": self.bell,
            "param": self.param,
            "source_eq": self.source,
            "metric": self.metric,
            "closed_value": self.value,
            "generic_value": self.generic_value,
            "delta": self.abs_delta,
            "status": self.status,
        }


def _generic_lookup(report):
    u = sorted(report.raw["u"])
    return {
        "C": report.raw["C"],
        "f": report.raw["f"],
        "L": report.raw["L"],
        "M": report.raw["M"],
        "u1": u[0],
        "u2": u[1],
        "u3": u[2],
    }


def _compare(fam, form, value, generic):
    return _report(fam.family.value, fam.bell.value if fam.bell is not None else "", fam.param, form, value, generic)


def _report(family, bell, param, form, value, generic):
    target = generic[form.metric]
    if form.metric == "C" and not math.isnan(value):
        compared = max(0.0, value)
    else:
        compared = value
    delta = abs(compared - target) if math.isfinite(compared) else math.inf
    return ClosedFormReport(
        family=family,
        bell=bell,
        param=param,
        source=form.source,
        metric=form.metric,
        value=value,
        generic_value=target,
        abs_delta=delta,
        tol=form.tol,
    )


def family_closed_forms(fam, metrics_report=None, include_x=True):
    """Every applicable printed expression for ``fam``, compared with the generic engine.

    Concurrence expressions are compared after ``max(0, .)``; a printed
    value that is undefined in real arithmetic (negative radicand) is a
    Mismatch with infinite delta.
    """
    rho = materialize(fam)
    if metrics_report is None:
        metrics_report = compute_metrics(rho, fam)
    generic = _generic_lookup(metrics_report)
    out = []
    if include_x and fam.is_x_family:
        entries = x_entries(rho)
        for form in X_FORMS:
            out.append(_compare(fam, form, float(form.fn(entries)), generic))
    for form in forms_for(fam):
        if form.applies(fam.param):
            out.append(_compare(fam, form, float(form.fn(fam.param)), generic))
    return out


def matrix_closed_forms(rho, metrics_report=None, x_tol=1e-10):
    """Generic X-state expressions for an arbitrary matrix (empty if it is not X-shaped)."""
    from .states import is_x_state

    if not is_x_state(rho, x_tol):
        return []
    if metrics_report is None:
        metrics_report = compute_metrics(rho)
    generic = _generic_lookup(metrics_report)
    entries = x_entries(rho)
    out = []
    for form in X_FORMS:
        try:
            value = float(form.fn(entries))
        except ValueError:
            # complex coherences: the printed expression has no real reading
            value = math.nan
        out.append(_report("matrix", "", None, form, value, generic))
    return out


@dataclass(frozen=True)
class AgreementSummary:
    """Agreement of one printed expression with the generic engine over a grid."""

    label: str
    source: str
    points: int
    matches: int
    max_delta: float
    first_mismatch: float | None

    @property
    def all_match(self):
        return self.points > 0 and self.matches == self.points


def scan_agreement(fam, grid, sources=None):
    """Summarize every printed expression of ``fam`` over ``grid``.

    The summary for each source names the first grid value where it
    disagrees with the generic engine.
    """
    acc = {}
    for x in grid:
        point = fam.with_param(float(x))
        for rep in family_closed_forms(point):
            if sources is not None and rep.source not in sources:
                continue
            pts, hits, worst, first = acc.get(rep.source, (0, 0, 0.0, None))
            ok = rep.status == "Match"
            if not ok and first is None:
                first = point.param
            acc[rep.source] = (pts + 1, hits + ok, max(worst, rep.abs_delta), first)
    return [AgreementSummary(fam.label, src, *vals) for src, vals in acc.items()]
