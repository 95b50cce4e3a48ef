"""Exception types shared across the workbench."""


class FolioError(Exception):
    """Base class for all workbench errors."""


class EmptyImageError(FolioError):
    """An operation that needs foreground pixels got a blank image."""


class DimensionMismatchError(FolioError):
    """Two rasters or a raster and a segmentation disagree in size."""


class InvalidSegmentationError(FolioError):
    """A segmentation failed model validation; carries the violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"segmentation invalid: {lines}")


class PageXmlParseError(FolioError):
    """The input is not well-formed XML."""


class PageXmlSchemaError(FolioError):
    """Well-formed XML that is not usable PAGE content."""


class EmptyGroundTruthError(FolioError):
    """Character accuracy needs a nonempty ground-truth string."""


class NoWordsError(FolioError):
    """Word accuracy needs at least one ground-truth word."""


class TooFewPagesError(FolioError):
    """Confidence intervals need at least two pages."""


class UnknownPageError(FolioError):
    """The review store has no page under the requested id."""


class UnknownRegionError(FolioError):
    """An edit command referenced a region id the page does not have."""


class EditRejectedError(FolioError):
    """An edit command is structurally impossible (bad cut row, kind
    mismatch on merge, reading order not a permutation)."""


class StaleRevisionError(FolioError):
    """The client's revision token no longer matches the page state."""
