"""Built-in English stop-word list.

Small function-word list used by the tokenizer when no file is supplied.
Kept as data, not logic, so a project can swap in its own list with
``load_stop_words`` without touching code.
"""

DEFAULT_STOP_WORDS = frozenset(
    """
    a about above after again against all am an and any are aren as at
    be because been before being below between both but by
    can cannot could couldn
    did didn do does doesn doing don down during
    each either few for from further
    had hadn has hasn have haven having he her here hers herself him himself
    his how
    i if in into is isn it its itself
    just
    me more most my myself
    no nor not now
    of off on once only onto or other our ours ourselves out over own
    s same she should shouldn so some such
    t than that the their theirs them themselves then there these they this
    those through to too
    under until up upon
    very
    was wasn we were weren what when where which while who whom why will with
    won would wouldn
    you your yours yourself yourselves
    """.split()
)
