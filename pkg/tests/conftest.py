import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from cnoma_eh.model import ChannelRealization, SystemParams

settings.register_profile(
    "numeric",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")


def system_params_strategy(mu=st.sampled_from([0.0, 0.5, 1.0, 2.0]),
                           wtilde2=st.floats(1.1, 10.0)):
    return st.builds(
        SystemParams,
        avg_snr=st.floats(0.5, 1e4),
        mu=mu,
        eta=st.floats(0.05, 1.0),
        var1=st.just(1.0),
        var2=st.just(1.0),
        var3=st.just(1.0),
        w1=st.just(1.0),
        w2=wtilde2,
    )


@st.composite
def ordered_channels(draw):
    """Strictly ordered g1 > g2 with all gains bounded away from zero."""
    g1 = draw(st.floats(0.05, 20.0))
    ratio = draw(st.floats(0.01, 0.95))
    g3 = draw(st.floats(0.001, 20.0))
    return ChannelRealization(g1=g1, g2=g1 * ratio, g3=g3)


@st.composite
def design_points(draw):
    from cnoma_eh.model import DesignPoint

    return DesignPoint(
        alpha=draw(st.floats(0.01, 0.99)),
        rho=draw(st.floats(0.0, 0.98)),
    )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)
