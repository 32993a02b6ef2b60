"""
Numerical core - module-level functions over numpy arrays, no state.

operators      backup operators (max, mean, boltzmann, mellowmax, sm2)
theory         closed-form constants, bounds and empirical scans
mdp            TabularMdp, generators, YAML file format
solve          value iteration, policy evaluation, tabular Q-learning
overestimation Monte Carlo overestimation estimates
"""
