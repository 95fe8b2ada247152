"""
Domain layer for stable-spline-maxent.

This layer contains the kernel, band-matrix and dataset models and the
numerical services acting on them, independent of file formats and the
command line.
"""
