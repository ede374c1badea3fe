"""Reuse-aware placement and provisioning of MEC network services.

The package bundles a placement engine that shares already-deployed network
functions between edge services, a seeded simulator for capacity studies, a
descriptor format, and a small provisioning orchestrator driven by mock
infrastructure backends.
"""

__version__ = "0.1.0"
