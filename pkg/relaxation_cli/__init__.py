# -*- coding: utf-8 -*-

"""Top-level package for the Relaxation CLI."""

__author__ = """Relaxation CLI maintainers"""
__version__ = "0.1.0"
