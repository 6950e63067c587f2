"""Confined time-of-arrival operator toolkit."""
