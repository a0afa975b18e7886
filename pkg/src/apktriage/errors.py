"""Exception types raised by apktriage.

Everything the library raises on bad input (files, bytes, datasets, models)
derives from TriageError so callers can catch one type at an API boundary.
Plain ValueError is reserved for misuse of the API itself (a zero bound, an
empty grid, an unknown rule kind).
"""


class TriageError(Exception):
    """Base class for all apktriage errors."""


# -- archive / manifest parsing ------------------------------------------

class MalformedArchiveError(TriageError):
    """The byte stream is not a well-formed ZIP archive."""


class CorruptEntryError(TriageError):
    """An archive entry failed CRC or decompression checks."""


class UnsupportedFeatureError(TriageError):
    """The entry needs a feature this parser does not do (compression
    methods other than Stored/Deflate, encryption, multi-disk archives)."""


class NotAxmlError(TriageError):
    """The blob does not start with a binary-XML file header."""


class MalformedAxmlError(TriageError):
    """The binary-XML structure is inconsistent or exceeds parser limits."""


class MissingManifestError(TriageError):
    """The archive has no AndroidManifest.xml entry."""


# -- dataset ingestion ----------------------------------------------------

class CsvFormatError(TriageError):
    """The CSV text violates the strict grammar (ragged, quoted, empty)."""


class CsvSchemaError(TriageError):
    """Header problems: missing label column or duplicate feature names."""


class CsvValueError(TriageError):
    """A cell holds something other than 0 or 1; names the row and column."""


class StratificationError(TriageError):
    """A stratified split needs at least one sample of each class."""


class FoldError(TriageError):
    """A class has fewer members than the requested fold count."""


# -- training and persistence ---------------------------------------------

class TrainingError(TriageError):
    """The training subset is empty or single-class."""


class NumericalError(TriageError):
    """A numerical step failed (singular pooled covariance, etc.)."""


class SchemaMismatchError(TriageError):
    """Feature vector or dataset does not match the model schema."""


class ModelFormatError(TriageError):
    """The model file is truncated or structurally invalid."""


class ModelVersionError(TriageError):
    """The model file declares a format version newer than this library."""


# -- evaluation ------------------------------------------------------------

class UndefinedMetricError(TriageError):
    """A metric is undefined (empty confusion matrix)."""


class UnsupportedModelError(TriageError):
    """The operation does not apply to this model kind."""
