"""Exception types shared across the simulator."""


class ConfigurationError(Exception):
    """Invalid scenario configuration (bad keys, values, or structure)."""


class SingularClusteringError(Exception):
    """Effective channels of the designated first users are too close to
    collinear for zero forcing (near-coincident beams)."""
