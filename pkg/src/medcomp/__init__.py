"""Design-time mediation compiler.

Reconciles an annotated business process with a registry of annotated
technical services: matches activity groups to service compositions,
generates message transformations, and emits an orchestration document.
"""

__version__ = "0.1.0"
