"""Service shell: HTTP API, simulated SMS endpoint, CLI, and cohort simulator."""
