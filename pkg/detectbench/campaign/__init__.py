"""Campaign configuration, execution, sweeps and reports."""
