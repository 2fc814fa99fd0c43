"""Random-sign lower bounds, the dyadic decomposition of <(xi1, xi2)>^m and the (L2, l1) ratio sweep."""

import argparse
from dataclasses import asdict, dataclass
from pathlib import Path

from bilinlab.bilinop import op_ratio_sweep
from bilinlab.experiments import exp_ghs, exp_random_sign, ghs_preset
from bilinlab.lpcalc import parse_symbol
from bilinlab.reports import emit_plot, write_json
from bilinlab.weights import parse_weight


@dataclass
class OperatorConfig:
    sign_weights: tuple = ("const:1", "sum-power:-0.5", "bracket-power:-0.25")
    radii: tuple = (4, 8, 16, 32)
    trials: int = 16
    ghs_m: float = -0.625
    ghs_q: float = 3.6
    sweep_symbol: str = "weight:step(sum-power:-0.5)"
    bands: tuple = (2, 3, 4, 5, 6)
    seed: int = 20240611


def main(out: Path, cfg: OperatorConfig) -> None:
    for i, spec in enumerate(cfg.sign_weights):
        rep = exp_random_sign(parse_weight(spec), cfg.radii, cfg.trials, seed=cfg.seed)
        write_json(out / f"randomsign_{i}.json", rep, asdict(cfg))
        emit_plot(rep, out / f"randomsign_{i}.svg")
        print(f"random sign {spec:22s} proxy slope {rep.slope:6.3f}  median slope {rep.extra['median_slope']:6.3f}")
    ghs = exp_ghs(ghs_preset(cfg.ghs_m, cfg.ghs_q), cfg.ghs_q, seed=cfg.seed)
    write_json(out / "ghs.json", ghs, asdict(cfg))
    print(f"decomposition: increment ratio beyond k=3 {ghs.ratio_after(3):.3g}, fitted constant {ghs.fitted_constant:.3g}")
    sweep = op_ratio_sweep(parse_symbol(cfg.sweep_symbol), "amalgam:1", cfg.bands, cfg.trials, cfg.seed)
    write_json(out / "sweep.json", sweep, asdict(cfg))
    emit_plot(sweep, out / "sweep.svg")
    print(f"sweep {cfg.sweep_symbol}: slope {sweep.slope:.3f} ({sweep.label})")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results"))
    main(ap.parse_args().out, OperatorConfig())
