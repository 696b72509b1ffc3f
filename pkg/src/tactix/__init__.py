"""Game-theoretic football tactics engine.

Pre-match formation/style optimization against a learned opposition
belief, and in-match substitution payoffs over scoreline states.
"""

__version__ = "0.1.0"
