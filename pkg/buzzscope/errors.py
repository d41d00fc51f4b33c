#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

class BuzzScopeError(ValueError):
    pass


class AlignmentError(BuzzScopeError):
    pass


class ValidationError(BuzzScopeError):
    pass


class ConfigError(BuzzScopeError):
    pass


class ShapeError(BuzzScopeError):
    pass


class DomainError(BuzzScopeError):
    pass


class CheckpointError(BuzzScopeError):
    pass


class FormatError(BuzzScopeError):
    def __init__(self, message, filename=None, line=None):
        self.filename = filename
        self.line     = line
        if filename is not None:
            where   = filename if line is None else f"{filename}:{line}"
            message = f"{where}: {message}"
        BuzzScopeError.__init__(self, message)


class NumericHealthError(BuzzScopeError):
    def __init__(self, op, context=None):
        self.op      = op
        self.context = context
        message = f"non-finite values produced by {op}"
        if context:
            message += f" ({context})"
        BuzzScopeError.__init__(self, message)

    def with_context(self, context):
        return NumericHealthError(self.op, context if not self.context else f"{context}, {self.context}")
