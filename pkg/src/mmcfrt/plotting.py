"""Six-panel SVG summary of a run, drawn from its CSV log alone."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .engine import TimeSeriesLog  # noqa: E402

PANELS = (
    "(a) DC-link voltage",
    "(b) Grid-side AC voltages",
    "(c) Wind-side AC voltage",
    "(d) Active power",
    "(e) MMC energy",
    "(f) Energy dissipated in EDD",
)


def plot_log(log: TimeSeriesLog, svg_path, window: tuple[float, float] | None = None) -> None:
    """Write the panel figure for ``log`` to ``svg_path``.

    Output is byte-stable: the SVG id salt is fixed and no date is embedded.
    """
    t = log["t_s"]
    mask = np.ones_like(t, dtype=bool)
    if window is not None:
        mask = (t >= window[0]) & (t <= window[1])
    t = t[mask]

    def col(name):
        return log[name][mask]

    with plt.rc_context({"svg.hashsalt": "mmcfrt", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(3, 2, figsize=(11, 9), sharex=True)
        ax = axes.ravel()
        ax[0].plot(t, col("v_dc_on_pu"), label="onshore")
        ax[0].plot(t, col("v_dc_off_pu"), label="offshore", lw=0.8)
        ax[0].set_ylabel("V_dc (p.u.)")
        for name, label in (("v_pcc_a_v", "a"), ("v_pcc_b_v", "b"), ("v_pcc_c_v", "c")):
            ax[1].plot(t, col(name) / 1e3, label=label, lw=0.6)
        ax[1].set_ylabel("v_pcc (kV)")
        ax[2].plot(t, col("v_owf_pu"))
        ax[2].set_ylabel("|v_owf| (p.u.)")
        ax[3].plot(t, col("p_wind_w") / 1e6, label="wind")
        ax[3].plot(t, col("p_export_w") / 1e6, label="exported")
        ax[3].set_ylabel("P (MW)")
        ax[4].plot(t, col("rec_energy_pu"), label="REC")
        ax[4].plot(t, col("sec_energy_pu"), label="SEC")
        ax[4].set_ylabel("E / E_MMC (p.u.)")
        ax[5].plot(t, col("edd_energy_j") / 1e6)
        ax[5].set_ylabel("E_EDD (MJ)")
        for a, title in zip(ax, PANELS):
            a.set_title(title, fontsize=10)
            a.grid(True, lw=0.3)
            if a.get_legend_handles_labels()[0]:
                a.legend(fontsize=8, loc="upper right")
        for a in ax[4:]:
            a.set_xlabel("time (s)")
        fig.tight_layout()
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
        plt.close(fig)


def plot_csv(csv_path, svg_path, window: tuple[float, float] | None = None) -> None:
    plot_log(TimeSeriesLog.from_csv(csv_path), svg_path, window)
