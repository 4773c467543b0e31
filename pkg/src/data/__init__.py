"""
Result tables and provenance.
"""
