from kpriorpy.kprior.divergences import L2Shift, TwoGenerator, WeightDivergenceSpec
from kpriorpy.kprior.optimal import SvdBasis, optimal_error_norm, optimal_kprior_grad, svd_basis
from kpriorpy.kprior.priors import (
    KPriorSpec,
    grad_reconstruction_error,
    kprior_grad,
    kprior_value,
    taylor_error_estimate,
    weight_prior_quad,
)
