"""
Experiment configuration and command implementations.
"""
