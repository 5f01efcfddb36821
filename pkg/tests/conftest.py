import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rotset import zoo

settings.register_profile("rotset", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("rotset")


@pytest.fixture
def shear():
    return zoo.sine_shear_h(0.25, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def zoo_maps():
    return [(name, e.build()) for name, e in zoo.ZOO.items()]


# every chain produced by a search anywhere in the suite is replayed against its map
RETURNED_CHAINS = []
_SEARCHES = ("find_chain_to_target", "find_periodic_chain", "find_return_chain")


def check_chain(G, ch):
    from rotset import chains
    from rotset.torus import parse_map
    F = parse_map(G.map_spec)
    res = chains.replay(F, ch)
    ledger = (sum(s[0] for s in ch.steps), sum(s[1] for s in ch.steps))
    assert np.all(res < G.slack), f"unsound chain step: max residual {res.max():.3g} >= {G.slack:.3g}"
    assert ch.displacement == ledger
    return float(res.max()) if len(res) else 0.0


@pytest.fixture(autouse=True, scope="session")
def _record_chains():
    from rotset import chains
    originals = {name: getattr(chains, name) for name in _SEARCHES}

    def wrap(fn):
        def inner(G, *args, **kwargs):
            ch = fn(G, *args, **kwargs)
            if ch is not None and G.map_spec:
                check_chain(G, ch)
                RETURNED_CHAINS.append((G.map_spec, G.N, G.epsilon, ch))
            return ch
        return inner

    for name, fn in originals.items():
        setattr(chains, name, wrap(fn))
    yield RETURNED_CHAINS
    for name, fn in originals.items():
        setattr(chains, name, fn)
