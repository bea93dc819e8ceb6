import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def save_line_plot(table, x, y, path, log_y=False):
    """SVG line plot of two table columns; rows with empty cells are skipped."""
    pairs = [(a, b) for a, b in zip(table.column(x), table.column(y)) if a is not None and b is not None]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([a for a, _ in pairs], [b for _, b in pairs], marker="o", markersize=3)
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    if log_y:
        ax.set_yscale("log")
    if table.title:
        ax.set_title(table.title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
