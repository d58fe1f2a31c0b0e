"""Online learning and control of kernelized nonlinear regulators.

Submodules:
  linalg    dense kernels (cholesky, log-det, spectral norm) and seeded streams
  features  feature maps: random Fourier, maze one-hot, state-control concat
  model     online ridge estimator, confidence ball, Thompson sampling
  planner   MPPI, receding horizon, exhaustive and optimistic planning
  envs      LQR / maze / pendulum ground-truth environments
  driver    the episodic learn-plan-execute loop with regret accounting
  analysis  numerical checks of the supporting concentration results
  config    experiment config files and shipped presets
  cli       command line: run / verify / oracle / sweep
"""

__version__ = "0.1.0"
