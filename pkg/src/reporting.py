"""
CSV result files and their JSON metadata sidecars.

Floats are written with ``repr`` so every file re-parses to the exact values
that were reported.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

from .diagnostics import DiagnosticCheck
from .estimators import EstimatorReport
from .harness import ConvergenceResult, RmseRow

logger = logging.getLogger(__name__)

CONVERGENCE_HEADER = ['n', 'h', 'err', 'err_se']
RMSE_HEADER = ['model', 'payoff', 'rmse', 'rmse_se', 'avg_work', 'elapsed_s']
PRICE_HEADER = ['payoff', 'mean', 'std_error', 'ci_lo', 'ci_hi', 'avg_work', 'n_samples']
DIAGNOSTICS_HEADER = ['name', 'observed', 'expected', 'tolerance', 'passed']


def _cell(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def save_csv(path, headers: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(headers)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    logger.info(f"Wrote {path}")
    return path


def read_csv(path) -> List[Dict[str, str]]:
    with open(path, 'r', newline='', encoding='utf-8') as f:
        return list(csv.DictReader(f))


def output_path_for(base, label: str, several: bool) -> Path:
    """``results/out.csv`` becomes ``results/out-put_k1.csv`` when one run writes several files."""
    base = Path(base)
    if not several:
        return base
    return base.with_name(f"{base.stem}-{label}{base.suffix}")


def write_convergence(path, result: ConvergenceResult) -> Path:
    path = save_csv(path, CONVERGENCE_HEADER, [(r.n, float(r.h), float(r.err), float(r.err_se))
                                               for r in result.rows])
    meta = path.with_suffix('.meta.json')
    with open(meta, 'w', encoding='utf-8') as f:
        json.dump(result.metadata(), f, indent=2)
    return path


def write_rmse_table(path, rows: Sequence[RmseRow]) -> Path:
    return save_csv(path, RMSE_HEADER, [(r.model, r.payoff, float(r.rmse), float(r.rmse_se), float(r.avg_work),
                                         float(r.elapsed_s)) for r in rows])


def write_prices(path, reports: Dict[str, EstimatorReport]) -> Path:
    rows = []
    for label, report in reports.items():
        lo, hi = report.ci()
        rows.append((label, float(report.mean), float(report.std_error), float(lo), float(hi),
                     float(report.avg_work_units), int(report.n_samples)))
    return save_csv(path, PRICE_HEADER, rows)


def write_diagnostics(path, checks: Sequence[DiagnosticCheck]) -> Path:
    return save_csv(path, DIAGNOSTICS_HEADER, [(c.name, c.observed, c.expected, c.tolerance, c.passed)
                                               for c in checks])
