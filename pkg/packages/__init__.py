"""Top-level package for the library code; import as ``packages.ptebd``."""
