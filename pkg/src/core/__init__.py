"""Core shared infrastructure: configuration, logging, errors, randomness, storage."""
