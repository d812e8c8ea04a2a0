"""FastAPI application exposing simulation, optima and experiment sweeps."""
