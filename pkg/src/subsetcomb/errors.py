"""Exception hierarchy shared by all modules."""


class SubsetCombError(Exception):
    pass


class ConfigError(SubsetCombError):
    """Invalid group/expression/window parameters."""


class UsageError(SubsetCombError):
    """An operation was applied to an unsupported model or mixed inputs."""


class ResourceError(SubsetCombError):
    """A configured budget (elements, combinations, depth) was exceeded."""


class ModelError(SubsetCombError):
    """A generator produced elements violating its contract."""


class ConstructionError(SubsetCombError):
    """A greedy builder ran out of budget before satisfying a constraint."""

    def __init__(self, constraint: str, detail: str = ""):
        self.constraint = constraint
        super().__init__(f"budget exhausted while satisfying {constraint}" + (f": {detail}" if detail else ""))
