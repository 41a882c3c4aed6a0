from kpriorpy.optim.minibatch import MinibatchConfig, minimize_minibatch
from kpriorpy.optim.quasi_newton import OptimizerConfig, OptimResult, minimize
from kpriorpy.optim.tracking import TargetTracker, target_accuracy_run
