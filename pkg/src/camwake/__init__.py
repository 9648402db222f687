"""RSSI-assisted probabilistic wake-up of a battery-powered camera."""

__version__ = "0.1.0"
