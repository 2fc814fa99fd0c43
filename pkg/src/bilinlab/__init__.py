"""Numerical tools for bilinear pseudo-differential operators with rough symbols:
lattice weight classes, FFT-based operator evaluation, dyadic symbol norms and
growth experiments."""

from bilinlab.bilinop import apply, apply_general, apply_xindep, op_ratio_sweep, quadrature_oracle
from bilinlab.fieldgrid import Grid, GridFunction, amalgam_norm, grid_ft, grid_ift, l2ul_norm, lr_norm
from bilinlab.lattice import IndexBox, SeqFunction, seq_add_convolve, seq_norm
from bilinlab.lpcalc import Symbol, besov_norm_star, besov_norm_vec, lp_partition, parse_symbol, sample_symbol
from bilinlab.trilinear import certify_weight, form_norm_alt, form_norm_oracle, trilinear_form
from bilinlab.weights import moderate_check, parse_weight, v_star, weak_l4_norm

__version__ = "0.1.0"

__all__ = [
    "Grid", "GridFunction", "IndexBox", "SeqFunction", "Symbol", "amalgam_norm", "apply", "apply_general",
    "apply_xindep", "besov_norm_star", "besov_norm_vec", "certify_weight", "form_norm_alt", "form_norm_oracle",
    "grid_ft", "grid_ift", "l2ul_norm", "lp_partition", "lr_norm", "moderate_check", "op_ratio_sweep",
    "parse_symbol", "parse_weight", "quadrature_oracle", "sample_symbol", "seq_add_convolve", "seq_norm",
    "trilinear_form", "v_star", "weak_l4_norm",
]
