"""MTJ-based stochastic-computing neural network simulator and optimizer."""
