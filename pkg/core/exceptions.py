# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
from typing import Optional

EXIT_OK = 0
EXIT_PARSE_ERROR = 2
EXIT_INVALID_FLAGS = 3
EXIT_NUMERICAL_FAILURE = 4


class MatrixCompletionError(Exception):
    exit_code = 1


class InvalidInputError(MatrixCompletionError, ValueError):
    exit_code = EXIT_INVALID_FLAGS


class DimensionError(InvalidInputError):
    pass


class InvalidFlagsError(InvalidInputError):
    pass


class ParseError(MatrixCompletionError, ValueError):
    exit_code = EXIT_PARSE_ERROR


class ConditioningError(MatrixCompletionError, ArithmeticError):
    exit_code = EXIT_NUMERICAL_FAILURE

    def __init__(self, message: str, iteration: Optional[int] = None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class RankDeficiencyError(ConditioningError):
    pass
