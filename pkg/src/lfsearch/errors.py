"""Exception types shared across the package."""


class LFSearchError(Exception):
    """Base class for all package errors."""


class InvalidAction(LFSearchError):
    """An action was applied to a state that does not offer it.

    This always indicates a harness or search bug, never a lost game.
    """


class DomainError(LFSearchError, ValueError):
    """Argument outside the domain of an analytic formula or statistic."""


class GenerationFailure(LFSearchError):
    """Instance generation gave up after its bounded number of attempts."""


class TemplateError(LFSearchError):
    """A prompt template could not be filled."""


class ParseError(LFSearchError):
    """A model response did not contain a usable boxed JSON answer."""


class BudgetExhausted(LFSearchError):
    """The per-run token budget was spent before an evaluator call."""


class TransportError(LFSearchError):
    """Network failure, timeout, or a replay log that no longer matches."""


class NoActions(LFSearchError):
    """Selection was asked to choose among zero edges."""


class DegenerateInput(LFSearchError, ValueError):
    """Metric input for which the quantity is undefined."""
