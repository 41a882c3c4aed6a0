from kpriorpy.mlp.distillation import (
    DeepKPriorSpec,
    deep_kprior_grad,
    deep_kprior_value,
    dl_kprior_grad,
    kd_leftover_identity_check,
    mlp_loss_grad,
    softmax_with_temperature,
)
from kpriorpy.mlp.network import MlpModel, MlpParams, MlpSpec, init_params, mlp_forward, mlp_ggn
