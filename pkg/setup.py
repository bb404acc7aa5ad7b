"""
Setup script for salt-lab.

This file is provided for backward compatibility.
Modern installation should use pyproject.toml.
"""

from setuptools import setup

# Configuration is in pyproject.toml
setup()
