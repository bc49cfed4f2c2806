"""Better-solution selection: subsample/subset objectives, robust estimators, seeded Monte Carlo."""

__version__ = "0.1.0"
