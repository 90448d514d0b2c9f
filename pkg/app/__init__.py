"""App package for the position/momentum superposition laboratory."""
