import pytest

from beamplan.instance import BeamType, Instance


@pytest.fixture
def toy_instance() -> Instance:
    """One 10.0 mold, one type curing 3 periods, single 6.0 length, demand 1.

    The only feasible schedule starts the single one-beam pattern at t=1,
    so the idle-capacity optimum is 3 * (10 - 6) = 12.
    """
    return Instance(
        molds=(10_000,),
        periods=3,
        beam_types=(BeamType(curing_time=3, lengths=(6_000,), demands=(1,)),),
    )


@pytest.fixture
def two_length_instance() -> Instance:
    """One 10.0 mold, one 1-period type with lengths 3.0 and 4.0."""
    return Instance(
        molds=(10_000,),
        periods=2,
        beam_types=(BeamType(curing_time=1, lengths=(3_000, 4_000), demands=(2, 1)),),
    )
