"""Command-line interface for lt-phigamma."""
