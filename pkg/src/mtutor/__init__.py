"""Adaptive tutoring engine: course knowledge base, learner modeling, rule-based
test planning, a pre-test / learning / post-test session machine, SMS-style text
delivery, and event-sourced persistence."""

__version__ = "0.1.0"
