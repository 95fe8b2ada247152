"""Infrastructure layer for stable-spline-maxent."""
