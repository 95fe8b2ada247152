"""Command-line surface: argument parsing and subcommand handlers."""
