"""Milnor invariants of string links and their low-degree generators."""

from .errors import (InsufficientClassError, MalformedInputError, OutOfRangeError,
                     RankMismatchError, ResourceLimitError, StringLinkError,
                     UnsupportedInputError, UnvalidatedCaseError)
from .freegroup import FreeWord, artin_act, commutator, parse_word
from .magnus import TruncSeries, expand, format_series, parse_series
from .stringlink import (MorseWord, chen_milnor, concordance_inverse, from_braid,
                         longitude_series, milnor_mu, parse_braid, parse_morse, stack)

__version__ = "0.1.0"
