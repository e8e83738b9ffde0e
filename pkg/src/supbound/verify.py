"""Empirical check of a bound curve against simulated supremum samples."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .bounds import BOUND_COLUMNS
from .errors import InvalidParameter, SchemaError
from ._io import open_out

__all__ = [
    "clopper_pearson_upper",
    "VerifyRow",
    "read_bound_csv",
    "read_sup_csv",
    "verify_rows",
    "write_verify_csv",
    "GRID_CAVEAT",
]

GRID_CAVEAT = (
    "empirical statistic is a grid maximum, a lower bound on the path supremum; "
    "PASS is conservative evidence, not proof"
)
VERIFY_COLUMNS = ["u", "bound", "exceedances", "replications", "p_hat", "upper_limit", "pass"]


def clopper_pearson_upper(x, n, confidence):
    """One-sided exact binomial upper limit for the success probability."""
    if not 0 < confidence < 1:
        raise InvalidParameter("confidence must lie in (0, 1)")
    if n < 0 or not 0 <= x <= n:
        raise InvalidParameter("need 0 <= x <= n")
    if n == 0 or x == n:
        return 1.0
    return float(stats.beta.ppf(confidence, x + 1, n - x))


@dataclass(frozen=True)
class VerifyRow:
    u: float
    bound: float
    exceedances: int
    replications: int
    p_hat: float
    upper_limit: float
    passed: bool


def _rows(path):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.reader(lines))


def read_bound_csv(path):
    rows = _rows(path)
    if not rows or rows[0] != BOUND_COLUMNS:
        raise SchemaError(f"{path}: expected columns {BOUND_COLUMNS}")
    out = []
    for r in rows[1:]:
        if len(r) != len(BOUND_COLUMNS):
            raise SchemaError(f"{path}: row has {len(r)} fields")
        if r[5] not in ("true", "false"):
            raise SchemaError(f"{path}: feasible must be true/false")
        try:
            u, bound = float(r[0]), float(r[3])
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}") from None
        out.append((u, bound, r[5] == "true"))
    return out


def read_sup_csv(path):
    rows = _rows(path)
    if not rows or rows[0] != ["sup_abs"]:
        raise SchemaError(f"{path}: expected a single sup_abs column")
    try:
        return np.array([float(r[0]) for r in rows[1:] if r], dtype=float)
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"{path}: {exc}") from None


def verify_rows(bound_rows, samples, confidence=0.95):
    """PASS at u iff the Clopper-Pearson upper limit of P{sup > u} is <= the bound."""
    if not 0.5 < confidence < 1:
        raise InvalidParameter("confidence must lie in (0.5, 1)")
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    out = []
    for u, bound, feasible in bound_rows:
        if not feasible:
            continue
        x = int(np.count_nonzero(samples > u))
        up = clopper_pearson_upper(x, n, confidence)
        out.append(VerifyRow(u, bound, x, n, x / n if n else math.nan, up, up <= bound))
    return out


def write_verify_csv(rows, path, confidence):
    with open_out(path) as fh:
        fh.write(f"# {GRID_CAVEAT}; confidence {confidence:g}\n")
        w = csv.writer(fh)
        w.writerow(VERIFY_COLUMNS)
        for r in rows:
            w.writerow(
                [
                    f"{r.u:.17g}",
                    f"{r.bound:.17g}",
                    r.exceedances,
                    r.replications,
                    f"{r.p_hat:.17g}",
                    f"{r.upper_limit:.17g}",
                    "PASS" if r.passed else "FAIL",
                ]
            )
