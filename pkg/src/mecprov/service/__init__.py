"""HTTP service surface wrapping the core package."""
