"""Exception hierarchy shared by the pipeline stages."""


class ArchiveLinkError(Exception):
    """Base class for every error raised by archivelink."""


class CatalogParseError(ArchiveLinkError):
    """A catalog line is not valid JSON or has the wrong shape."""

    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{self.path}:{lineno}: {message}")


class CatalogValidationError(ArchiveLinkError):
    """A record violates a catalog invariant (duplicate id, dangling reference, bad URL)."""

    def __init__(self, record_id, message):
        self.record_id = record_id
        super().__init__(f"record {record_id!r}: {message}")


class EmptyPublicationsError(ArchiveLinkError):
    pass


class InvalidURLError(ArchiveLinkError, ValueError):
    pass


class MalformedCDXLineError(ArchiveLinkError, ValueError):
    pass


class LinkFormatError(ArchiveLinkError, ValueError):
    pass


class BackendError(ArchiveLinkError):
    """The archive backend cannot serve requests (missing fixture, bad config)."""


class NetworkError(BackendError):
    """Remote archive unreachable after retries, or offline with a cold cache."""


class CaptureNotFoundError(ArchiveLinkError):
    pass


class PreconditionError(ArchiveLinkError):
    pass
