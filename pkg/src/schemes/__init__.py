"""
Problem instances and estimation protocols.
"""
