"""Quantile models of pediatric heart rate from body temperature and age."""

__version__ = "0.1.0"
