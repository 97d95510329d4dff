"""Data behind the delta tables and plots, emitted as long-format rows."""

from __future__ import annotations

import csv
import io

import numpy as np

from .privacy import delta_strongly_safe, min_epsilon, solve_min_epsilon

TABLE2_K = 20
TABLE2_BETAS = (0.05, 0.1, 0.2)
TABLE2_EPSILONS = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0)

GRID_POINTS = 40
GRID_END = 3.0
FIG6_KS = tuple(range(5, 101, 5))
FIG6_DELTA_MAX = 1e-6

# figure id -> list of (k, beta) series; figure 6 is handled separately
SERIES = {
    2: [(k, 0.2) for k in (5, 10, 20, 30, 50)],
    3: [(20, b) for b in (0.05, 0.1, 0.2, 0.3, 0.4)],
    4: [(15, 0.05), (22, 0.1), (35, 0.2), (60, 0.4)],
    5: [(k, 0.025) for k in range(1, 6)],
}
FIGURES = (2, 3, 4, 5, 6)


def table2() -> list[list[float]]:
    return [[delta_strongly_safe(TABLE2_K, b, e) for e in TABLE2_EPSILONS] for b in TABLE2_BETAS]


def table2_csv() -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["beta", *TABLE2_EPSILONS])
    for b, row in zip(TABLE2_BETAS, table2()):
        w.writerow([b, *(f"{v:.6e}" for v in row)])
    return buf.getvalue()


def epsilon_grid(beta: float) -> np.ndarray:
    return np.linspace(min_epsilon(beta) + 0.01, GRID_END, GRID_POINTS)


def figure_rows(figure: int) -> list[tuple]:
    """Rows ``(x, series, y)`` for one figure.

    Figures 2-5: x = epsilon, y = 1/delta, one series per (k, beta).
    Figure 6: x = k, y = least epsilon reaching delta <= 1e-6 (None if none).
    """
    if figure == 6:
        rows = []
        for beta in TABLE2_BETAS:
            for k in FIG6_KS:
                rows.append((k, f"beta={beta}", solve_min_epsilon(k, beta, FIG6_DELTA_MAX)))
        return rows
    if figure not in SERIES:
        raise KeyError(f"unknown figure {figure}; choose from {FIGURES}")
    rows = []
    for k, beta in SERIES[figure]:
        for eps in epsilon_grid(beta):
            delta = delta_strongly_safe(k, beta, float(eps))
            rows.append((float(eps), f"k={k},beta={beta}", 1.0 / delta if delta > 0 else float("inf")))
    return rows


def figure_csv(figure: int) -> str:
    rows = figure_rows(figure)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "series", "y"])
    for x, s, y in rows:
        w.writerow([x, s, "" if y is None else repr(y)])
    return buf.getvalue()
