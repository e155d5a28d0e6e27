import random

from hypothesis import strategies as st

from mtlmon import formula as F
from mtlmon.trace import Trace, make_trace

MAX_T2 = 6


def interval_strategy():
    return st.tuples(st.integers(0, MAX_T2), st.integers(0, MAX_T2)).map(
        lambda ab: (min(ab), max(ab))
    )


def formulas(max_aps: int = 4) -> st.SearchStrategy:
    """Random well-formed formulas, including constants."""
    atoms = st.one_of(
        st.builds(F.AP, st.integers(0, max_aps - 1)),
        st.just(F.TrueConst()),
    )

    def extend(children):
        iv = interval_strategy()
        return st.one_of(
            st.builds(F.Not, children),
            st.builds(F.Next, children),
            st.builds(F.And, children, children),
            st.builds(F.Or, children, children),
            st.builds(F.Implies, children, children),
            st.tuples(children, iv).map(lambda t: F.Box(t[0], *t[1])),
            st.tuples(children, iv).map(lambda t: F.Diamond(t[0], *t[1])),
            st.tuples(children, children, iv).map(
                lambda t: F.Until(t[0], t[1], *t[2])
            ),
        )

    return st.recursive(atoms, extend, max_leaves=8)


def random_mixed_formula(rng: random.Random, depth: int, max_t2: int = 4,
                         true_prob: float = 0.2) -> F.Formula:
    """Seeded-random formula with occasional constant leaves, for the
    folding property runs that need an exact iteration count."""
    from mtlmon.toolchain import random_formula

    f = random_formula(rng, depth, max_t2)

    def sprinkle(node: F.Formula) -> F.Formula:
        if isinstance(node, F.AP):
            return F.TrueConst() if rng.random() < true_prob else node
        kids = F.children(node)
        if not kids:
            return node
        if isinstance(node, (F.Not, F.Next)):
            return type(node)(sprinkle(kids[0]))
        if isinstance(node, (F.Box, F.Diamond)):
            return type(node)(sprinkle(kids[0]), node.lo, node.hi)
        if isinstance(node, F.Until):
            return F.Until(sprinkle(kids[0]), sprinkle(kids[1]), node.lo, node.hi)
        return type(node)(sprinkle(kids[0]), sprinkle(kids[1]))

    return sprinkle(f)


def random_bool_trace(rng: random.Random, length: int, width: int) -> Trace:
    return make_trace(
        [[rng.random() < 0.5 for _ in range(width)] for _ in range(length)]
    )
