"""Outcome classification, statistics and cost models."""
