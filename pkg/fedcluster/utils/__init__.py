"""Environment, logging and tracking helpers."""
