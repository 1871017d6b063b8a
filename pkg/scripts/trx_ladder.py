"""Half-chain defect tr X_N over a ladder of ring sizes for several presets.

    python3 scripts/trx_ladder.py --out results/trx.json
"""
import argparse
from dataclasses import asdict, dataclass, field

from fermichain import io
from fermichain.covariance import XYParams
from fermichain.diagnostics import DEFAULT_LADDER, DivergenceThresholds, scan_trace_X


@dataclass
class Config:
    presets: list = field(default_factory=lambda: [(0.0, 0.0), (1.0, 1.0), (0.0, 2.0), (1.0, 2.0)])
    ladder: list = field(default_factory=lambda: list(DEFAULT_LADDER))
    thresholds: DivergenceThresholds = field(default_factory=DivergenceThresholds)
    compressed: bool = True


def run(cfg: Config) -> dict:
    scans = {}
    for g, l in cfg.presets:
        scan = scan_trace_X(XYParams(g, l), cfg.ladder, cfg.thresholds, compressed=cfg.compressed)
        scans[f"{g},{l}"] = scan.to_dict()
        print(f"gamma={g:g} lambda={l:g}: {scan.classification:12s} " + " ".join(f"{v:.5f}" for v in scan.values))
    return scans


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="trx.json")
    args = ap.parse_args()
    cfg = Config()
    text = io.json_text({"scans": run(cfg)}, asdict(cfg))
    with open(args.out, "w") as fh:
        fh.write(text)
