"""Experiment configuration, execution and reporting."""
