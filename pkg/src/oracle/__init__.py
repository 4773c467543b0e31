"""
Truncated Fock-space oracle for checking the closed-form algebra.
"""
