"""
Estimators, Fisher information, analytic bounds and Monte Carlo metrics.
"""
