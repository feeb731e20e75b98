import pytest

from qmix import build_group, compute_character_table, conjugacy_classes


@pytest.fixture(scope="session")
def bundle():
    """Memoized (group, classes, table) triples keyed by spec text.

    Character tables are deterministic for a fixed seed, so sharing them
    across tests is safe; nothing downstream mutates them.
    """
    cache: dict = {}

    def get(spec: str):
        if spec not in cache:
            G = build_group(spec)
            C = conjugacy_classes(G)
            T = compute_character_table(G, C)
            cache[spec] = (G, C, T)
        return cache[spec]

    return get
