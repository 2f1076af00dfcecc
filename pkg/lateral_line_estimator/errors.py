# Copyright The lateral-line-estimator Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Exceptions raised by the lateral line estimation pipeline.

Each exception carries the process exit code the command line reports for it.
"""

from typing import Any, List, Optional


class AlleError(Exception):
    """Base class for every pipeline error."""

    exit_code = 1


class ArgumentError(AlleError, ValueError):
    """An argument or precondition was violated."""

    exit_code = 2


class DataError(AlleError):
    """Input data is malformed, incomplete or inconsistent."""

    exit_code = 3


class SchemaError(DataError):
    """A file does not match its expected column layout."""


class ParseError(DataError):
    """A cell could not be read as a finite number.

    Attributes:
        row: 1-based data row (header excluded) of the offending cell.
        column: Column name of the offending cell.
    """

    def __init__(self, message: str, row: int, column: str):
        """Initialize with the offending cell position."""
        super().__init__(message)
        self.row = row
        self.column = column


class LabelMismatchError(DataError):
    """A recording is labeled with a different state kind than expected."""


class CompletenessError(DataError):
    """Required (parameter, recording) pairs or samples are missing.

    Attributes:
        gaps: Human readable descriptions of what is missing.
    """

    def __init__(self, message: str, gaps: Optional[List[str]] = None):
        """Initialize with the list of gaps."""
        super().__init__(message)
        self.gaps = gaps or []


class StratificationError(DataError):
    """A split fraction leaves one stratum without train or test samples."""


class StandardizationError(DataError):
    """A feature has zero spread and cannot be standardized.

    Attributes:
        feature: Label of the degenerate feature.
    """

    def __init__(self, message: str, feature: str):
        """Initialize with the degenerate feature label."""
        super().__init__(message)
        self.feature = feature


class SingularityError(DataError):
    """The design matrix is rank deficient.

    Attributes:
        columns: Labels of the linearly dependent columns.
    """

    def __init__(self, message: str, columns: List[str]):
        """Initialize with the dependent column labels."""
        super().__init__(message)
        self.columns = columns


class UndefinedVarianceError(DataError):
    """Labels have zero variance, so the coefficient of determination is undefined."""


class ReportWriteError(DataError):
    """A report could not be written to its destination."""


class NumericalError(AlleError):
    """A numerical procedure failed."""

    exit_code = 4


class ConvergenceError(NumericalError):
    """An iterative solver hit its iteration cap before reaching tolerance.

    Attributes:
        best: The best iterate reached before giving up.
    """

    def __init__(self, message: str, best: Any = None):
        """Initialize with the best iterate."""
        super().__init__(message)
        self.best = best


class DegenerateBootstrapError(NumericalError):
    """A tree's bootstrap left no out-of-bag samples.

    Attributes:
        tree_index: Index of the degenerate tree.
    """

    def __init__(self, message: str, tree_index: int):
        """Initialize with the degenerate tree index."""
        super().__init__(message)
        self.tree_index = tree_index
