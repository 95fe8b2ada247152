"""Immutable results: kernel factors, band extensions, hyperparameters and estimates."""
