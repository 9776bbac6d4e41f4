class ConfigurationError(ValueError):
    """Raised for invalid run configuration; detected before any transaction runs."""
