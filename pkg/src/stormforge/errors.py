"""Exception hierarchy shared by all stormforge modules."""


class StormError(Exception):
    pass


class ParseError(StormError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class SortError(StormError):
    pass


class UnsupportedError(StormError):
    """Well-formed input that uses a construct outside the supported grammar."""


class ExpansionLimitError(UnsupportedError):
    """Inline expansion of let/define-fun grew an assertion past the size cap."""


class MissingBinding(StormError):
    def __init__(self, symbol: str):
        super().__init__(f"assignment has no value for {symbol!r}")
        self.symbol = symbol


class OracleUnavailable(StormError):
    pass


class SeedRejected(StormError):
    pass


class EmptyPool(StormError):
    pass


class StallError(StormError):
    pass


class SpawnError(StormError):
    pass


class NotReproducible(StormError):
    pass


class ConfigError(StormError):
    pass
