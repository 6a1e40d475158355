"""Render the two sweep figures and the trace diagnostic from simulator CSVs.

These are thin consumers: every plotted number is read from the CSV (the
return values expose exactly the plotted series so tests can checksum them
against the raw columns).  The only computed overlay is the theta^2
reference curve on the progress-rate figure.
"""

from typing import NamedTuple, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .csvio import FigureDataError, Table, read_table  # noqa: E402

_SERIES_STYLE = {5: "o-", 10: "s-", 20: "^-"}


class PlotResult(NamedTuple):
    """What was drawn: one (x, y) series per key, plus any reference overlay."""

    series: dict
    overlay: Optional[tuple] = None


def _series_by_lambda(table: Table, ycol: str):
    thetas = table.column("theta")
    lams = table.column("lambda")
    ys = table.column(ycol)
    series = {}
    for theta, lam, y in sorted(zip(thetas, lams, ys)):
        series.setdefault(int(lam), ([], []))
        series[int(lam)][0].append(theta)
        series[int(lam)][1].append(y)
    return series


def _save(fig, out_path):
    fig.savefig(out_path, dpi=130)
    plt.close(fig)


def plot_progress_rate(csv_path, out_path):
    """Per-offspring progress rate against the constraint angle, one curve
    per lambda, with the theta^2 small-angle reference overlaid.

    Returns the plotted series and the overlay grid.
    """
    table = read_table(csv_path)
    series = _series_by_lambda(table, "phi_star_over_lambda")
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for lam, (xs, ys) in sorted(series.items()):
        ax.plot(xs, ys, _SERIES_STYLE.get(lam, "-"), ms=3.5,
                label=f"$\\lambda$ = {lam}")
    xs_all = sorted({t for xs, _ in series.values() for t in xs})
    overlay = (xs_all, [t * t for t in xs_all])
    ax.plot(*overlay, "k--", lw=1, label=r"$\theta^2$")
    ax.set_xlabel(r"constraint angle $\theta$")
    ax.set_ylabel(r"$\varphi^*/\lambda$")
    ax.set_yscale("log")
    ax.legend(frameon=False)
    ax.set_title("Per-offspring progress rate, constant step-size")
    fig.tight_layout()
    _save(fig, out_path)
    return PlotResult(series, overlay)


def plot_stationary_delta(csv_path, out_path):
    """Average normalized distance to the constraint against the angle, one
    curve per lambda.  Returns {lambda: (thetas, values)} exactly as plotted."""
    table = read_table(csv_path)
    series = _series_by_lambda(table, "mean_delta")
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for lam, (xs, ys) in sorted(series.items()):
        ax.plot(xs, ys, _SERIES_STYLE.get(lam, "-"), ms=3.5,
                label=f"$\\lambda$ = {lam}")
    ax.set_xlabel(r"constraint angle $\theta$")
    ax.set_ylabel(r"mean normalized distance $\delta$")
    ax.set_yscale("log")
    ax.legend(frameon=False)
    ax.set_title("Stationary distance to the constraint")
    fig.tight_layout()
    _save(fig, out_path)
    return PlotResult(series)


TRACE_PANELS = (
    ("delta", r"$\delta_t$"),
    ("log_sigma", r"$\ln \sigma_t$"),
    ("f_value", r"$f(X_t)$"),
)


def plot_trace(csv_path, out_path):
    """Stacked time panels for whichever trace columns are present.

    Returns {column: (t, values)} exactly as plotted.
    """
    table = read_table(csv_path)
    if len(table) < 2:
        raise FigureDataError(f"{csv_path}: a trace needs at least 2 points")
    t = table.column("t")
    panels = [(col, label) for col, label in TRACE_PANELS if col in table.columns]
    if not panels:
        raise FigureDataError(
            f"{csv_path}: none of the trace columns "
            f"({', '.join(c for c, _ in TRACE_PANELS)}) present")
    fig, axes = plt.subplots(len(panels), 1, sharex=True,
                             figsize=(6.4, 2.2 * len(panels)), squeeze=False)
    plotted = {}
    for ax, (col, label) in zip(axes[:, 0], panels):
        ys = table.column(col)
        ax.plot(t, ys, lw=0.8)
        ax.set_ylabel(label)
        plotted[col] = (t, ys)
    axes[-1, 0].set_xlabel("generation $t$")
    fig.tight_layout()
    _save(fig, out_path)
    return PlotResult(plotted)
