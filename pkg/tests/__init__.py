"""
iol - tests.
"""
