"""Register-file fault model and campaign planning."""
