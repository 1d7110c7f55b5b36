'''
Exceptions for the anbsak library
'''


class AnbSAKException(Exception):
    """
    Generic base class for anbsak exceptions
    """
    pass


class AnbSAKTypeError(AnbSAKException, TypeError):
    """
    Type error
    """
    pass


class AnbSAKIOError(AnbSAKException):
    """
    IO error (unreadable or unwritable files)
    """
    pass


class AnbSAKValueError(AnbSAKException, ValueError):
    """
    Value error
    """
    pass


class AnbSAKLimitError(AnbSAKValueError):
    """
    Variable count exceeds the exact-search cap
    """
    pass


class AnbSAKSchemaError(AnbSAKValueError):
    """
    Model and data disagree on variables, arities or state labels
    """
    pass


class AnbSAKContentError(AnbSAKException):
    """
    Content error (such as zero-probability evidence or inconsistent tables)
    """
    pass


class AnbSAKNotImplemented(AnbSAKException):
    """
    Not implemented error
    """
    pass
