"""
Displacement-operator algebra, coherent-state simulation and the error hierarchy.
"""
