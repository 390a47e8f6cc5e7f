"""GACN services - each component lives in its own subdirectory."""
