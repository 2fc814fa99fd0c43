"""Growth experiments for the range exponent r and for the smoothness indices."""

import argparse
from dataclasses import asdict, dataclass
from pathlib import Path

from bilinlab.experiments import exp_range, exp_smoothness
from bilinlab.reports import emit_plot, write_json


@dataclass
class SharpnessConfig:
    r_values: tuple = (1.0, 1.5, 2.0, 4.0)
    K: int = 5
    J: int = 5


def main(out: Path, cfg: SharpnessConfig) -> None:
    reports = {f"range_r{r:g}": rep for r, rep in exp_range(cfg.r_values, cfg.K).items()}
    reports["smooth_s0"] = exp_smoothness("s0", s0=0.25, r=2.0, J=cfg.J)
    reports["smooth_s1"] = exp_smoothness("s1", s1=0.0, r=1.0, J=cfg.J)
    for a in (0.25, 0.75):
        reports[f"smooth_s1s2_{a:g}"] = exp_smoothness("s1s2", s1=a, s2=a, r=1.0, J=cfg.J)
    for name, rep in reports.items():
        write_json(out / f"{name}.json", rep, asdict(cfg))
        emit_plot(rep, out / f"{name}.svg")
        print(f"{name:22s} slope {rep.slope:7.3f}  predicted {rep.predicted:6.3f}  {rep.verdict}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results"))
    main(ap.parse_args().out, SharpnessConfig())
