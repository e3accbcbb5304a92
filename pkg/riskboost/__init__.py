from .fit import run_experiment
