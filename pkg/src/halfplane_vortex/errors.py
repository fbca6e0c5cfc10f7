class DomainError(ValueError):
    """Argument outside the domain where a quantity is defined."""


class SingularityError(DomainError):
    """Evaluation on top of a same-layer point vortex."""
