"""Repository interfaces for stable-spline-maxent."""
