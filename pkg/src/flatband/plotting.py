"""PNG figures for the CLI's ``--plot`` flag.  matplotlib is imported lazily."""

from __future__ import annotations

import math


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def profile_figure(rows: list[dict], path: str) -> None:
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    for sub, marker in (("o", "o"), ("prime", "s")):
        xs = [r["x"] for r in rows if r["sublattice"] == sub]
        ax1.plot(xs, [r["n"] for r in rows if r["sublattice"] == sub], marker, ms=3,
                 label=r"$\Lambda_o$" if sub == "o" else r"$\Lambda'$")
        ax2.plot(xs, [r["S3"] for r in rows if r["sublattice"] == sub], marker, ms=3)
    ax1.set_ylabel(r"$\langle n_x\rangle$")
    ax1.legend()
    ax2.axhline(0, color="0.6", lw=0.8)
    ax2.set_ylabel(r"$\langle S^{(3)}_x\rangle$")
    ax2.set_xlabel("x")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def correlation_figure(rows: list[dict], path: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    d = [abs(r["y"] - r["x"]) for r in rows]
    for key, label in (("nn_truncated", "density"), ("s3s3_truncated", "spin (3,3)")):
        ax.semilogy(d, [abs(r[key]) or math.nan for r in rows], "o-", ms=3, label=label)
    ax.semilogy(d, [math.hypot(r["cdc_up_re"], r["cdc_up_im"]) for r in rows], "s-", ms=3,
                label="electron up-up")
    ax.set_xlabel("|y - x|")
    ax.set_ylabel("|correlation|")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def sweep_figure(rows: list[dict], path: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    idx = range(len(rows))
    ax.plot(idx, [r["plateau_integer"] for r in rows], "o", label="plateau (formula)")
    ax.plot(idx, [r["n_integer_far"] for r in rows], "x", label="<n> far from wall")
    ax.set_xlabel("grid point")
    ax.set_ylabel(r"$\langle n\rangle$ on $\Lambda_o$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
