"""
Tests for salt-lab.
"""
