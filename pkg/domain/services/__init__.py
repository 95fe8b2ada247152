"""Domain services: kernel closed forms, maximum-entropy completion and its oracle."""
