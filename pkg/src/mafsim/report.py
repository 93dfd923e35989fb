"""Delimited output and companion figures for experiment records.

CSV files carry a one-line provenance header followed by a frozen column
schema; floating-point fields are printed with 17 significant digits so a
re-run with the same configuration and seed reproduces the file byte for
byte.  Each CSV gets a rendered figure next to it (probabilities on a log
axis, tradeoff curves on linear axes); figure output is pinned to a fixed
hash salt and stripped of timestamps so it is reproducible too.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

WER_COLUMNS = "snr_db,trials,word_errors_system,word_errors_user1,word_errors_user2,wer_system,decoder_mode"
OUTAGE_COLUMNS = "snr_db,trials,outage_events,p_out,stderr"
DMT_COLUMNS = "curve,r_num,r_den,d_num,d_den,r,d"


def _f(value: float) -> str:
    return format(float(value), ".17g")


def header_line(command: str, scheme: str, seed: int) -> str:
    return f"# mafsim,v1,{command},{scheme},seed={seed}"


def write_csv(records, path, command: str, scheme: str, seed: int) -> None:
    """Serialize records for one command to the frozen CSV schema."""
    if not records:
        raise ValueError("no records to write")
    lines = [header_line(command, scheme, seed)]
    if command == "wer":
        lines.append(WER_COLUMNS)
        for r in records:
            lines.append(
                ",".join(
                    [
                        _f(r.snr_db),
                        str(r.trials),
                        str(r.word_errors_system),
                        str(r.word_errors_user1),
                        str(r.word_errors_user2),
                        _f(r.wer_system),
                        r.decoder_mode,
                    ]
                )
            )
    elif command == "outage":
        lines.append(OUTAGE_COLUMNS)
        for r in records:
            lines.append(
                ",".join(
                    [
                        _f(r.snr_db),
                        str(r.trials),
                        str(r.outage_events),
                        _f(r.p_out),
                        _f(r.stderr),
                    ]
                )
            )
    elif command == "dmt":
        lines.append(DMT_COLUMNS)
        for r in records:
            lines.append(
                ",".join(
                    [
                        r.curve,
                        str(r.r.numerator),
                        str(r.r.denominator),
                        str(r.d.numerator),
                        str(r.d.denominator),
                        _f(r.r),
                        _f(r.d),
                    ]
                )
            )
    else:
        raise ValueError(f"no CSV schema for command {command!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def figure_path_for(out_path) -> str:
    """Figure file associated with a CSV path (same stem, .svg suffix)."""
    p = Path(out_path)
    fig = p.with_suffix(".svg")
    if str(fig) == str(p):
        fig = p.with_name(p.stem + "-figure.svg")
    return str(fig)


def render_svg(records, path, command: str) -> None:
    """Render the records as a chart; probabilities use a log axis."""
    if not records:
        raise ValueError("no records to render")
    plt.rcParams["svg.hashsalt"] = "mafsim"
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    if command == "wer":
        _plot_prob(ax, [(r.snr_db, r.wer_system) for r in records], "system WER")
        u1 = [(r.snr_db, r.word_errors_user1 / r.trials) for r in records]
        u2 = [(r.snr_db, r.word_errors_user2 / r.trials) for r in records]
        _plot_prob(ax, u1, "user 1", style="--")
        _plot_prob(ax, u2, "user 2", style=":")
        ax.set_ylabel("word error rate")
        ax.set_xlabel("received SNR (dB)")
    elif command == "outage":
        _plot_prob(ax, [(r.snr_db, r.p_out) for r in records], "outage probability")
        ax.set_ylabel("outage probability")
        ax.set_xlabel("received SNR (dB)")
    elif command == "dmt":
        by_curve: dict[str, list] = {}
        for r in records:
            by_curve.setdefault(r.curve, []).append((float(r.r), float(r.d)))
        for name, pts in by_curve.items():
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], label=name)
        ax.set_xlabel("multiplexing gain r")
        ax.set_ylabel("diversity gain d(r)")
    else:
        plt.close(fig)
        raise ValueError(f"no figure layout for command {command!r}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None} if str(path).endswith(".svg") else None)
    plt.close(fig)


def _plot_prob(ax, points, label, style="-o"):
    pts = [(x, y) for x, y in points if y > 0]
    if not pts:
        return
    marker = "o" if "o" in style else None
    ls = style.replace("o", "") or "-"
    ax.semilogy(
        [p[0] for p in pts],
        [p[1] for p in pts],
        linestyle=ls,
        marker=marker,
        markersize=3.5,
        label=label,
    )
