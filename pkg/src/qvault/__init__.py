"""qvault: simulator and verification toolkit for SWAP-test token authentication."""

__version__ = "0.1.0"
