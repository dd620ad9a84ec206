import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from .excel_exporter import family_colors  # noqa: E402


def plot_size_vs_si_snri(plot_data: pd.DataFrame, filename="size_vs_si_snri.png", title="SI-SNRi vs. number of parameters",
                         verbose=True):
    """Scatter of params (millions) vs SI-SNRi, one color per family tag."""
    folder = os.path.dirname(filename)
    if folder:
        os.makedirs(folder, exist_ok=True)
    colors = family_colors(sorted(plot_data["family"].unique()))

    fig, ax = plt.subplots(figsize=(7, 5))
    for family, group in plot_data.groupby("family", sort=True):
        ax.scatter(group["params"] / 1e6, group["si_snri"], color=colors[family], label=family, s=36)
        for _, row in group.iterrows():
            ax.annotate(row["label"], (row["params"] / 1e6, row["si_snri"]), fontsize=6,
                        xytext=(3, 3), textcoords="offset points")
    ax.set_xlabel("Parameters (M)")
    ax.set_ylabel("SI-SNRi (dB)")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(filename, dpi=150)
    plt.close(fig)
    if verbose:
        print(f"Figure saved to: {filename}")
    return filename
