"""
Quantum-SWITCH continuous-variable metrology simulator
"""

__version__ = "0.2.0"
