"""Figures for benchmark reports. Rendering is file-only (Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

REPORT_RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.dpi": 120,
    "svg.hashsalt": "spihtmark",
}

# keep PNG bytes stable across runs
_PNG_METADATA = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_METADATA)
    plt.close(fig)


def plot_attack_curve(kind, rows, images, means, path):
    """Mean correlation per image against the attack parameter.

    ``means[image][row]`` holds the value for each row label.
    """
    with plt.rc_context(REPORT_RC):
        fig, ax = plt.subplots(figsize=(4.2, 3.0))
        x = range(len(rows))
        for image in images:
            ax.plot(x, [means[image].get(r, float("nan")) for r in rows],
                    marker="o", ms=3, lw=1, label=image)
        ax.set_xticks(list(x))
        ax.set_xticklabels(rows, rotation=30 if len(rows) > 4 else 0, ha="right" if len(rows) > 4 else "center")
        ax.set_ylim(-0.05, 1.05)
        ax.set_ylabel("correlation")
        ax.set_title(kind.replace("_", " "))
        ax.grid(alpha=0.3, lw=0.5)
        if len(images) <= 8:
            ax.legend(frameon=False, loc="lower left")
        _save(fig, path)


def plot_fidelity(images, psnr_values, path, floor_db=40.0):
    with plt.rc_context(REPORT_RC):
        fig, ax = plt.subplots(figsize=(max(3.0, 0.6 * len(images) + 1.5), 3.0))
        ax.bar(range(len(images)), psnr_values, color="0.55")
        ax.axhline(floor_db, color="k", lw=0.8, ls="--")
        ax.set_xticks(range(len(images)))
        ax.set_xticklabels(images, rotation=30, ha="right")
        ax.set_ylabel("PSNR host vs watermarked (dB)")
        _save(fig, path)


def plot_watermarks(original, extracted, labels, path):
    """Original watermark followed by a row of extracted ones."""
    n = len(extracted) + 1
    with plt.rc_context(REPORT_RC):
        fig, axes = plt.subplots(1, n, figsize=(1.3 * n, 1.6))
        axes = [axes] if n == 1 else list(axes)
        for ax, bits, label in zip(axes, [original] + list(extracted), ["original"] + list(labels)):
            ax.imshow(bits, cmap="gray", vmin=0, vmax=1, interpolation="nearest")
            ax.set_title(label.replace("(", "\n("), fontsize=6)
            ax.axis("off")
        _save(fig, path)
