"""Set-valued social choice functions on weak preferences: exhaustive axiom
checkers under the Kelly extension and mechanical replay of impossibility
derivations."""

__version__ = "0.1.0"
