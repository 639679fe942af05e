"""Parameter sweeps, threshold bisection, the fidelity table and figure datasets."""
from __future__ import annotations

import csv
import json
import math
import operator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path

import numpy as np

from .closed_forms import family_closed_forms, forms_for
from .metrics import CSV_COLUMNS, compute_metrics, concurrence_sqrt_eigenvalues
from .states import BellKind, Family, StateFamily, materialize

CLOSED_COLUMNS = ("source_eq", "closed_value", "delta", "status")
DISPLAY_COLUMNS = ("C_display", "f_display", "N_display", "L_display", "M_display")
SWEEP_COLUMNS = CSV_COLUMNS + DISPLAY_COLUMNS + CLOSED_COLUMNS
DISPLAY_DIGITS = 4
CLAIM_TOL = 0.01
SEVEN_NINTHS = 7.0 / 9.0


def round_half_away(x, digits=2):
    """Round half away from zero, on the decimal representation of ``x``."""
    q = Decimal(1).scaleb(-digits)
    d = Decimal(repr(float(x)))
    return float(d.copy_abs().quantize(q, rounding=ROUND_HALF_UP).copy_sign(d))


def grid(start, stop, step):
    """Inclusive grid with values rounded to 12 decimals (no 0.30000000000000004)."""
    n = int(round((stop - start) / step))
    pts = np.round(start + step * np.arange(n + 1), 12)
    return [float(min(max(p, start), stop)) for p in pts]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


# --- sweeps ----------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    families: tuple
    start: float = 0.0
    stop: float = 1.0
    step: float = 0.001
    closed_forms: bool = True
    csv_path: str | None = None
    json_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        if not (0.0 <= self.start < self.stop <= 1.0):
            raise ValueError(f"need 0 <= start < stop <= 1, got start={self.start}, stop={self.stop}")
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        object.__setattr__(self, "families", tuple(self.families))

    def points(self):
        return grid(self.start, self.stop, self.step)


@dataclass(frozen=True)
class SweepRow:
    family: StateFamily
    report: object
    closed: tuple = ()

    def records(self):
        """Flat dicts, one per closed-form report (one bare row if there are none)."""
        base = self.report.to_dict()
        for name, key in zip(DISPLAY_COLUMNS, ("C", "f", "N", "L", "M")):
            base[name] = round_half_away(base[key], DISPLAY_DIGITS)
        if not self.closed:
            return [{**base, **{c: None for c in CLOSED_COLUMNS}}]
        out = []
        for cf in self.closed:
            d = cf.to_dict()
            out.append({**base, **{c: d[c] for c in CLOSED_COLUMNS}})
        return out


def _sort_key(fam):
    return (fam.family.value, fam.bell.value if fam.bell else "", fam.param)


def evaluate(fam, closed_forms=True):
    report = compute_metrics(materialize(fam), fam)
    closed = tuple(family_closed_forms(fam, report)) if closed_forms else ()
    return SweepRow(fam, report, closed)


def sweep(cfg):
    """Evaluate every family at every grid point, ordered by (family, bell, param).

    Writes CSV and JSON if the config names targets; an I/O failure on one
    target is reported in the raised error and does not stop the other.
    """
    jobs = sorted((f.with_param(p) for f in cfg.families for p in cfg.points()), key=_sort_key)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(lambda f: evaluate(f, cfg.closed_forms), jobs))
    else:
        rows = [evaluate(f, cfg.closed_forms) for f in jobs]
    errors = []
    for path, writer in ((cfg.csv_path, write_csv), (cfg.json_path, write_json)):
        if path is None:
            continue
        try:
            writer(rows, path)
        except OSError as exc:
            errors.append(f"{path}: {exc.strerror or exc}")
    if errors:
        raise OSError("could not write sweep output: " + "; ".join(errors))
    return rows


def sweep_records(rows):
    return [rec for row in rows for rec in row.records()]


def write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for rec in sweep_records(rows):
            w.writerow([f"{rec[c]:.{DISPLAY_DIGITS}f}" if c in DISPLAY_COLUMNS else _fmt(rec[c]) for c in SWEEP_COLUMNS])


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def write_json(rows, path):
    recs = [{c: _json_safe(rec[c]) for c in SWEEP_COLUMNS} for rec in sweep_records(rows)]
    Path(path).write_text(json.dumps(recs, indent=1) + "\n")


# --- thresholds ------------------------------------------------------------

_OPS = {">": operator.gt, ">=": operator.ge, "<": operator.lt, "<=": operator.le}


def parse_predicate(text):
    """``"> 2/3"`` -> ``(">", 0.666...)``."""
    s = text.replace(" ", "")
    for op in (">=", "<=", ">", "<"):
        if s.startswith(op):
            try:
                return op, float(Fraction(s[len(op):]))
            except (ValueError, ZeroDivisionError):
                break
    raise ValueError(f"cannot parse predicate {text!r} (expected e.g. '> 1' or '>= 2/3')")


class ThresholdError(ValueError):
    pass


@dataclass(frozen=True)
class ThresholdResult:
    family: str
    metric: str
    predicate: str
    lo: float
    hi: float
    root: float
    tol: float
    source: str = "generic"

    def to_dict(self):
        return {
            "family": self.family,
            "metric": self.metric,
            "predicate": self.predicate,
            "bracket": [self.lo, self.hi],
            "root": self.root,
            "tolerance": self.tol,
            "source": self.source,
        }


def generic_metric(fam, metric):
    """One generic-engine metric at a family point.

    ``"C"`` here is the unclamped Wootters difference ``s1 - s2 - s3 - s4``,
    so ``C > 0`` is a clean sign test.
    """
    rho = materialize(fam)
    if metric == "C":
        s = concurrence_sqrt_eigenvalues(rho)
        return float(s[0] - s[1] - s[2] - s[3])
    raw = compute_metrics(rho).raw
    if metric not in raw:
        raise ValueError(f"unknown metric {metric!r} (use C, f, N, L or M)")
    return float(raw[metric])


def closed_metric(fam, source):
    for form in forms_for(fam):
        if form.source == source:
            return float(form.fn(fam.param))
    raise ValueError(f"{fam.label} has no printed expression {source!r}")


def _evaluator(fam, metric, source):
    if source == "generic":
        return lambda x: generic_metric(fam.with_param(x), metric)
    return lambda x: closed_metric(fam.with_param(x), source)


def find_threshold(fam, metric, predicate, bracket, tol=1e-6, source="generic"):
    """Bisect for the parameter where ``predicate`` on ``metric`` changes truth value.

    ``source`` is ``"generic"`` or the tag of a printed expression for ``fam``.
    Terminates with ``hi - lo <= 2 * tol`` and reports the midpoint.
    """
    op_name, level = parse_predicate(predicate)
    op = _OPS[op_name]
    value = _evaluator(fam, metric, source)
    lo, hi = map(float, bracket)
    vlo, vhi = value(lo), value(hi)
    tlo, thi = op(vlo, level), op(vhi, level)
    if tlo == thi:
        raise ThresholdError(
            f"{fam.label} {metric} {predicate}: no sign change in [{lo}, {hi}] "
            f"({metric}({lo}) = {vlo:.6g}, {metric}({hi}) = {vhi:.6g})"
        )
    while hi - lo > 2 * tol:
        mid = 0.5 * (lo + hi)
        if op(value(mid), level) == tlo:
            lo = mid
        else:
            hi = mid
    return ThresholdResult(fam.label, metric, predicate, lo, hi, 0.5 * (lo + hi), tol, source)


def scan_roots(fam, metric, predicate, start=0.0, stop=1.0, step=0.001, tol=1e-6, source="generic"):
    """All truth-value changes of ``predicate`` on a grid, each refined by bisection."""
    op_name, level = parse_predicate(predicate)
    op = _OPS[op_name]
    value = _evaluator(fam, metric, source)
    pts = grid(start, stop, step)
    truth = []
    for x in pts:
        v = value(x)
        truth.append(None if math.isnan(v) else op(v, level))
    out = []
    for i in range(len(pts) - 1):
        a, b = truth[i], truth[i + 1]
        if a is None or b is None or a == b:
            continue
        out.append(find_threshold(fam, metric, predicate, (pts[i], pts[i + 1]), tol, source))
    return out


@dataclass(frozen=True)
class Claim:
    """A printed parameter boundary for one predicate on one family."""

    name: str
    family: StateFamily
    metric: str
    predicate: str
    claimed: tuple
    closed_source: str | None = None


@dataclass(frozen=True)
class ClaimResult:
    claim: Claim
    generic_roots: tuple
    closed_roots: tuple
    matched: tuple  # per claimed root: nearest generic root within CLAIM_TOL, or None

    @property
    def reproduced(self):
        return all(m is not None for m in self.matched)

    def to_dict(self):
        return {
            "claim": self.claim.name,
            "family": self.claim.family.label,
            "metric": self.claim.metric,
            "predicate": self.claim.predicate,
            "claimed": list(self.claim.claimed),
            "generic_roots": list(self.generic_roots),
            "closed_source": self.claim.closed_source,
            "closed_roots": list(self.closed_roots),
            "status": "reproduced" if self.reproduced else "mismatch",
        }


def _fam(family, bell=None):
    return StateFamily(family, bell, 0.0)


CLAIMS = (
    Claim("rho1-phi+ bell violation", _fam(Family.RHO1, BellKind.PHI_PLUS), "M", "> 1", (0.45, 0.89), "rho1:phi+.M"),
    Claim("rho2-psi- bell violation", _fam(Family.RHO2, BellKind.PSI_MINUS), "M", "> 1", (0.37, 0.91), "rho2:psi-.M"),
    Claim("rho2-psi- useful fidelity", _fam(Family.RHO2, BellKind.PSI_MINUS), "f", "> 2/3", (0.5, 0.75), "rho2:psi-.f"),
    Claim("rho6-psi- entanglement onset", _fam(Family.RHO6, BellKind.PSI_MINUS), "C", "> 0", (0.75,), "rho6:psi-.C"),
    Claim("rho5-phi+ bell violation", _fam(Family.RHO5, BellKind.PHI_PLUS), "M", "> 1", (0.38,), "rho5:phi+.M"),
    Claim("rho5-phi- bell violation", _fam(Family.RHO5, BellKind.PHI_MINUS), "M", "> 1", (0.32,), "rho5:phi-.M"),
    Claim("tau1-phi- useful fidelity", _fam(Family.TAU1, BellKind.PHI_MINUS), "f", "> 2/3", (0.314, 0.43), "tau:phi-.f"),
    Claim("werner useful fidelity", _fam(Family.WERNER), "f", "> 2/3", (0.5,), "werner.f"),
)


def check_claim(claim, step=0.001, tol=1e-6):
    generic = tuple(r.root for r in scan_roots(claim.family, claim.metric, claim.predicate, step=step, tol=tol))
    closed = ()
    if claim.closed_source is not None:
        closed = tuple(
            r.root
            for r in scan_roots(
                claim.family, claim.metric, claim.predicate, step=step, tol=tol, source=claim.closed_source
            )
        )
    matched = []
    for c in claim.claimed:
        near = [g for g in generic if abs(g - c) <= CLAIM_TOL]
        matched.append(min(near, key=lambda g: abs(g - c)) if near else None)
    return ClaimResult(claim, generic, closed, tuple(matched))


def check_claims(claims=CLAIMS, step=0.001, tol=1e-6):
    return [check_claim(c, step, tol) for c in claims]


# --- fidelity table --------------------------------------------------------

TABLE1_COLUMNS = (
    StateFamily(Family.RHO1, BellKind.PHI_PLUS),
    StateFamily(Family.RHO2, BellKind.PSI_PLUS),
    StateFamily(Family.RHO2, BellKind.PSI_MINUS),
    StateFamily(Family.RHOG, BellKind.PHI_PLUS),
)


@dataclass(frozen=True)
class FidelityTable:
    params: tuple
    columns: tuple
    raw: tuple  # raw[i][j]: row i, column j
    rounded: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "rounded", tuple(tuple(round_half_away(v, 2) for v in row) for row in self.raw))

    def format(self):
        head = ["p"] + [c.label for c in self.columns]
        lines = ["  ".join(f"{h:>10s}" for h in head)]
        for p, row in zip(self.params, self.rounded):
            lines.append("  ".join([f"{p:>10.1f}"] + [f"{v:>10.2f}" for v in row]))
        return "\n".join(lines)

    def records(self):
        out = []
        for p, raw, rnd in zip(self.params, self.raw, self.rounded):
            rec = {"p": p}
            for c, r, d in zip(self.columns, raw, rnd):
                rec[c.label] = d
                rec[c.label + "_raw"] = r
            out.append(rec)
        return out


def table1():
    """Teleportation fidelity of the four X-type mixtures at p = 0.0, 0.1, ..., 1.0."""
    params = tuple(grid(0.0, 1.0, 0.1))
    raw = tuple(
        tuple(compute_metrics(materialize(c.with_param(p))).raw["f"] for c in TABLE1_COLUMNS) for p in params
    )
    return FidelityTable(params, TABLE1_COLUMNS, raw)


# --- figure datasets -------------------------------------------------------

FIGURES = {
    1: (
        (0.0, 1.0),
        (
            StateFamily(Family.RHO1, BellKind.PHI_PLUS),
            StateFamily(Family.RHO2, BellKind.PSI_PLUS),
            StateFamily(Family.RHO2, BellKind.PSI_MINUS),
            StateFamily(Family.RHOG, BellKind.PHI_PLUS),
        ),
    ),
    2: (
        (0.0, 1.0),
        (
            StateFamily(Family.MEMS_W),
            StateFamily(Family.RHO5, BellKind.PHI_PLUS),
            StateFamily(Family.RHO6, BellKind.PSI_PLUS),
            StateFamily(Family.RHO6, BellKind.PSI_MINUS),
        ),
    ),
    3: (
        (0.0, 1.0),
        (
            StateFamily(Family.TAU1, BellKind.PHI_PLUS),
            StateFamily(Family.TAU1, BellKind.PHI_MINUS),
            StateFamily(Family.RHO1, BellKind.PHI_PLUS),
            StateFamily(Family.RHO6, BellKind.PSI_PLUS),
            StateFamily(Family.RHO6, BellKind.PSI_MINUS),
        ),
    ),
    4: (
        (0.5, 1.0),
        (
            StateFamily(Family.TAU1, BellKind.PHI_PLUS),
            StateFamily(Family.TAU1, BellKind.PHI_MINUS),
            StateFamily(Family.WERNER),
        ),
    ),
}
FIG3_DISPLAY_WINDOW = (0.0, 0.45)


@dataclass(frozen=True)
class FigureData:
    figure: int
    columns: tuple
    rows: tuple  # dicts keyed by columns

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([_fmt(r[c]) for c in self.columns])

    def column(self, name):
        return np.array([r[name] for r in self.rows], dtype=float)


def figure_data(figure, step=0.01):
    """Fidelity curves for one figure; every curve shares the horizontal parameter.

    Figure 2 carries the constant 7/9 reference line; figure 3 spans [0, 1]
    and flags the points inside its display window.
    """
    if figure not in FIGURES:
        raise ValueError(f"figure must be one of {sorted(FIGURES)}, got {figure!r}")
    (start, stop), fams = FIGURES[figure]
    cols = ["p"] + [f"f[{f.label}]" for f in fams]
    if figure == 2:
        cols.append("reference_7_9")
    if figure == 3:
        cols.append("in_display_window")
    rows = []
    for p in grid(start, stop, step):
        row = {"p": p}
        for f in fams:
            row[f"f[{f.label}]"] = compute_metrics(materialize(f.with_param(p))).raw["f"]
        if figure == 2:
            row["reference_7_9"] = SEVEN_NINTHS
        if figure == 3:
            lo, hi = FIG3_DISPLAY_WINDOW
            row["in_display_window"] = lo <= p <= hi
        rows.append(row)
    return FigureData(figure, tuple(cols), tuple(rows))
