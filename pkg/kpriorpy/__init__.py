from kpriorpy import (
    adapt,
    bench,
    core,
    data_wrangler,
    glm,
    kprior,
    memory,
    mlp,
    optim,
)
