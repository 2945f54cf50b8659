"""CSV/JSON output and figures for sweeps."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from .bounds import best_block_length, compression_gap
from .lossy import RdPoint

REDUNDANCY_SCHEMA = "fsencrypt-redundancy/1"
RD_SCHEMA = "fsencrypt-rd/1"
REDUNDANCY_COLUMNS = ["n", "log2_n", "s", "alpha", "chosen_m", "delta", "compression_gap"]
RD_COLUMNS = ["n", "D", "value", "exact", "witness_hex"]


def write_csv(path: str | Path, schema: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: {schema}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_csv(path: str | Path) -> tuple[str, list[dict[str, str]]]:
    """Returns the schema tag and the data rows."""
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("# schema: "):
            raise ValueError(f"{path}: missing schema header")
        return first[len("# schema: "):].strip(), list(csv.DictReader(fh))


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def redundancy_rows(states: Sequence[int], exponents: Sequence[int], alpha: int = 2) -> list[list]:
    rows = []
    for s in states:
        for k in exponents:
            n = 1 << k
            m, delta, _ = best_block_length(s, n, alpha)
            rows.append([n, k, s, alpha, m, delta, compression_gap(n, alpha, s)])
    return rows


def rd_rows(points: Sequence[RdPoint], n: int) -> list[list]:
    return [[n, p.D, p.value, int(p.exact), bytes(p.witness).hex()] for p in points]


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_redundancy(rows: Sequence[Sequence], path: str | Path) -> None:
    """Encryption redundancy and the compression-side gap against ``log2 n``, both on log scale."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for s in sorted({int(r[2]) for r in rows}):
        sub = sorted((r for r in rows if int(r[2]) == s), key=lambda r: int(r[0]))
        xs = [math.log2(int(r[0])) for r in sub]
        line, = ax.plot(xs, [float(r[5]) for r in sub], marker="o", label=f"encryption, s={s}")
        ax.plot(xs, [float(r[6]) for r in sub], linestyle="--", color=line.get_color(),
                label=f"compression gap, s={s}")
    ax.set_xlabel("log2 n")
    ax.set_ylabel("redundancy (bits/symbol)")
    ax.set_yscale("log")
    ax.legend(fontsize=7)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_rd(points: Sequence[RdPoint], path: str | Path, title: str = "") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for exact, style in ((True, "o-"), (False, "s--")):
        sub = sorted((p for p in points if p.exact == exact), key=lambda p: p.D)
        if sub:
            ax.plot([p.D for p in sub], [p.value for p in sub], style,
                    label="exact" if exact else "local search")
    ax.set_xlabel("D")
    ax.set_ylabel("LZ complexity of reconstruction")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_sigma_sweep(rows: Sequence[Sequence], path: str | Path) -> None:
    """LZ complexity, redundancy and the resulting key-rate bound over prefix lengths."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [math.log2(float(r[1])) for r in rows]
    ax.plot(xs, [float(r[6]) for r in rows], marker="o", label="LZ complexity")
    ax.plot(xs, [float(r[7]) for r in rows], marker="s", label="redundancy")
    ax.plot(xs, [float(r[8]) for r in rows], marker="^", label="key-rate lower bound")
    ax.set_xlabel("log2 n")
    ax.set_ylabel("bits/symbol")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
