"""Per-radius form norms and verdicts for the reference weights; writes JSON, CSV and SVG per weight."""

import argparse
from dataclasses import asdict, dataclass
from pathlib import Path

from bilinlab.reports import emit_plot, write_csv, write_json
from bilinlab.trilinear import certify_weight
from bilinlab.weights import parse_weight


@dataclass
class CriticalityConfig:
    weights: tuple = ("const:1", "sum-power:-0.5", "split:-0.25,-0.25", "split:0,-0.5", "left(bracket:-0.25)")
    radii: tuple = (4, 8, 16, 32, 64)
    restarts: int = 8
    seed: int = 3


def main(out: Path, cfg: CriticalityConfig) -> None:
    for i, spec in enumerate(cfg.weights):
        cert = certify_weight(parse_weight(spec), cfg.radii, restarts=cfg.restarts, seed=cfg.seed, label=spec)
        stem = out / f"criticality_{i}"
        write_json(stem.with_suffix(".json"), cert.to_dict(), asdict(cfg))
        write_csv(stem.with_suffix(".csv"), ["radius", "norm"], zip(cert.radii, cert.norms))
        emit_plot(cert, stem.with_suffix(".svg"))
        print(f"{spec:24s} slope {cert.slope:6.3f}  {cert.verdict}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results"))
    main(ap.parse_args().out, CriticalityConfig())
