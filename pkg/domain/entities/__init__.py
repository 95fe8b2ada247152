"""Domain entities: the stable spline kernel, partial band matrices and identification datasets."""
