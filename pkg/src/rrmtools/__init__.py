"""rrmtools - conditional-on-activity random rule models for binary risky choice."""

__version__ = "0.1.0"
