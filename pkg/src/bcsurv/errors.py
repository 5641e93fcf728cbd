"""Exception hierarchy. Each module raises subclasses of its own base so the
harness can report which stage failed."""


class BcsurvError(Exception):
    stage = "bcsurv"


class DataError(BcsurvError, ValueError):
    stage = "tabular_data"


class HeaderMismatch(DataError):
    def __init__(self, expected, found):
        self.expected = list(expected)
        self.found = list(found)
        super().__init__(f"header mismatch: expected {self.expected}, found {self.found}")


class RowWidthMismatch(DataError):
    def __init__(self, line, expected, found):
        self.line = line
        super().__init__(f"line {line}: expected {expected} cells, found {found}")


class UnparseableNumeric(DataError):
    def __init__(self, line, column, value):
        self.line, self.column = line, column
        super().__init__(f"line {line}, column {column!r}: cannot parse {value!r} as a finite number")


class MissingValue(DataError):
    def __init__(self, line, column):
        self.line, self.column = line, column
        super().__init__(f"line {line}, column {column!r}: missing value")


class UnknownCategory(DataError):
    def __init__(self, line, column, value):
        self.line, self.column = line, column
        where = f"line {line}, " if line is not None else ""
        super().__init__(f"{where}column {column!r}: unknown category {value!r}")


class SchemaError(DataError):
    pass


class EmptyTable(DataError):
    pass


class NonBinaryTarget(DataError):
    pass


class DegenerateSplit(DataError):
    pass


class TooFewRows(DataError):
    pass


class ModelError(BcsurvError, ValueError):
    stage = "classifiers"


class EmptyNode(ModelError):
    stage = "cart"


class EmptySampleSet(ModelError):
    stage = "cart"


class DimensionMismatch(ModelError):
    pass


class SingleClassTraining(ModelError):
    pass


class ModelFormatError(ModelError):
    pass


class MetricsError(BcsurvError, ValueError):
    stage = "metrics"


class LengthMismatch(MetricsError):
    pass


class EmptyInput(MetricsError):
    pass


class SingleClassLabels(MetricsError):
    pass


class ConfigError(BcsurvError, ValueError):
    stage = "experiment"
