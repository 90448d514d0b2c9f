"""Physics of the position/momentum superposition: states, propagation, probabilities and analysis."""
