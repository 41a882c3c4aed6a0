from kpriorpy.glm.families import ExpFamily, bregman_log_partition, family_eval
from kpriorpy.glm.features import FeatureMap, features_expand, prefix_projection
from kpriorpy.glm.models import (
    GlmModel,
    LabeledData,
    fit_glm,
    ggn_matrix,
    glm_gradient,
    glm_objective,
)
