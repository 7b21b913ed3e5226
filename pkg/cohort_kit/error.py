import typing as T

EXIT_INPUT_ERROR = 3
EXIT_DEGENERATE = 4


class CohortUserError(Exception):
    exit_code = EXIT_INPUT_ERROR


class CohortInputError(CohortUserError):
    pass


class CohortRecordError(CohortInputError):
    def __init__(self, path: str, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line
        self.reason = reason


class CohortHistoryError(CohortInputError):
    def __init__(self, message: str, week: int, start: T.Optional[str] = None):
        super().__init__(message)
        self.week = week
        self.start = start


class CohortConfigError(CohortInputError):
    pass


class CohortDegenerateError(CohortUserError):
    exit_code = EXIT_DEGENERATE
