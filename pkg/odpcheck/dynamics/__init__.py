"""Executable dynamic schemas: rule types, the step engine, simulation and trace checks."""
